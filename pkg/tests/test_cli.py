import io
import json

import numpy as np
import pandas as pd
import pytest

import cli
from conftest import GOLDEN
from radii import RadiusBracket

GOLDEN_DOC = {"alphabet": 2, "dim": 2, "operators": {"0": [[1, 1], [0, 1]], "1": [[1, 0], [1, 1]]}}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def constant_doc(T, alphabet=1):
    return {
        "alphabet": alphabet,
        "dim": len(T),
        "operators": {str(a): T for a in range(alphabet)},
    }


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def table(out, **kwargs):
    return pd.read_csv(io.StringIO(out), **kwargs)


def test_radii_constant(tmp_path, capsys):
    path = write(tmp_path, "diag.json", constant_doc([[3, 0], [0, 2]]))
    code, out, _ = run(capsys, ["radii", path, "--s", "1"])
    assert code == 0
    df = table(out, dtype={"lower_witness_cycle": str, "upper_witness_word": str})
    assert list(df.columns) == ["s", "lower", "lower_witness_cycle", "upper", "upper_witness_word", "gap", "depth", "K"]
    assert df["lower"][0] == pytest.approx(3.0)
    assert df["upper"][0] == pytest.approx(3.0)
    assert df["lower_witness_cycle"][0] == "0"


def test_radii_golden(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, _ = run(capsys, ["radii", path, "--s", "1", "1.5", "--depth", "14", "--orbits", "8", "--prune"])
    assert code == 0
    df = table(out)
    assert df["s"].tolist() == [1.0, 1.5]
    assert df["lower"][0] >= 1.6180
    assert df["gap"][0] <= 0.08
    assert df["depth"].tolist() == [14, 14]


def test_radii_output_is_deterministic_with_full_precision(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    _, first, _ = run(capsys, ["radii", path, "--depth", "6", "--orbits", "4"])
    _, second, _ = run(capsys, ["radii", path, "--depth", "6", "--orbits", "4"])
    assert first == second
    assert table(first)["lower"][0] == pytest.approx(GOLDEN, rel=1e-12)


def test_missing_operator_exits_2(tmp_path, capsys):
    doc = {"alphabet": 2, "dim": 2, "operators": {"0": [[1, 0], [0, 1]]}}
    code, out, err = run(capsys, ["radii", write(tmp_path, "bad.json", doc)])
    assert code == 2
    assert out == ""
    assert "operators.1" in err


def test_envelope_exits_3_unless_forced(tmp_path, capsys):
    path = write(tmp_path, "wide.json", constant_doc([[0.5]], alphabet=5))
    code, out, err = run(capsys, ["radii", path, "--depth", "2", "--orbits", "1"])
    assert code == 3
    assert out == ""
    assert "--force" in err
    code, out, _ = run(capsys, ["radii", path, "--depth", "2", "--orbits", "1", "--force"])
    assert code == 0
    assert table(out)["upper"][0] == pytest.approx(0.5)

    golden = write(tmp_path, "golden.json", GOLDEN_DOC)
    assert run(capsys, ["radii", golden, "--depth", "17"])[0] == 3
    assert run(capsys, ["radii", golden, "--orbits", "11"])[0] == 3


def test_berger_wang_golden(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    plot = tmp_path / "gap.png"
    argv = ["berger-wang", path, "--s", "1", "--depths", "4", "6", "8", "10", "12", "14",
            "--orbits", "2", "3", "4", "5", "6", "8", "--plot", str(plot)]
    code, out, _ = run(capsys, argv)
    assert code == 0
    df = table(out)
    assert list(df.columns) == ["n", "K", "lower", "upper", "gap"]
    gaps = df["gap"].tolist()
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert plot.exists()


def test_berger_wang_constant_and_fractional(tmp_path, capsys):
    path = write(tmp_path, "diag.json", constant_doc([[3, 0], [0, 2]], alphabet=2))
    code, out, _ = run(capsys, ["berger-wang", path, "--depths", "1", "2", "4", "--orbits", "1"])
    assert code == 0
    assert (table(out)["gap"].abs() <= 1e-9).all()

    pair = {"alphabet": 2, "dim": 2, "operators": {"0": [[2, 0], [0, 0.5]], "1": [[1, 0.3], [0, 1.5]]}}
    code, out, _ = run(capsys, ["berger-wang", write(tmp_path, "pair.json", pair), "--s", "1.5",
                                "--depths", "2", "4", "8", "--orbits", "1", "2", "4"])
    assert code == 0
    gaps = table(out)["gap"]
    assert np.isfinite(gaps).all()
    assert gaps.is_monotonic_decreasing


def test_berger_wang_rejects_decreasing_pairs(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    assert run(capsys, ["berger-wang", path, "--depths", "4", "2"])[0] == 2
    assert run(capsys, ["berger-wang", path, "--depths", "2", "4", "6", "--orbits", "1", "2"])[0] == 2


def test_berger_wang_growing_gap_exits_4(tmp_path, capsys, monkeypatch):
    def fake_bracket(A, S, s, n, K, prune=False):
        return RadiusBracket(s=s, depth=n, horizon=K, lower=1.0, lower_witness=(0,), upper=1.0 + n, upper_witness=(0,))

    monkeypatch.setattr(cli, "bracket", fake_bracket)
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, err = run(capsys, ["berger-wang", path, "--depths", "2", "4"])
    assert code == 4
    assert out == ""
    assert "gap grew" in err


def test_continuity(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    direction = {"alphabet": 2, "dim": 2, "operators": {"0": [[0.2, 0.7], [0.1, 0.4]], "1": [[0.9, 0.3], [0.5, 0.6]]}}
    plot = tmp_path / "drift.png"
    code, out, _ = run(capsys, ["continuity", path, "--direction", write(tmp_path, "b.json", direction),
                                "--depth", "8", "--orbits", "4", "--plot", str(plot)])
    assert code == 0
    df = table(out)
    assert list(df.columns) == ["eps", "lower", "upper", "midpoint", "drift", "holder_distance"]
    assert df["eps"].tolist() == [0.1, 0.01, 0.001]
    drifts = df["drift"].tolist()
    assert all(b <= a for a, b in zip(drifts, drifts[1:]))
    assert drifts[-1] <= 0.02
    assert plot.exists()


def test_continuity_shape_mismatch_exits_2(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    direction = write(tmp_path, "b.json", constant_doc(np.eye(3).tolist(), alphabet=2))
    code, out, _ = run(capsys, ["continuity", path, "--direction", direction])
    assert code == 2
    assert out == ""


def test_orbits_golden(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, _ = run(capsys, ["orbits", path, "--max-period", "2", "--s", "1", "2"])
    assert code == 0
    df = table(out, dtype={"cycle": str})
    assert list(df.columns) == ["k", "cycle", "rho_1", "value_1", "rho_2", "value_2"]
    assert len(df) == 6
    assert df["cycle"][0] in {"01", "10"}
    assert df["value_1"][0] == pytest.approx(GOLDEN)
    assert df["value_1"].is_monotonic_decreasing


def test_orbits_constant_top_row_is_period_one(tmp_path, capsys):
    path = write(tmp_path, "id.json", constant_doc([[1, 0], [0, 1]]))
    code, out, _ = run(capsys, ["orbits", path, "--max-period", "3"])
    assert code == 0
    df = table(out, dtype={"cycle": str})
    assert df["k"][0] == 1
    assert df["cycle"][0] == "0"


def test_orbits_rejects_zero_period(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, _ = run(capsys, ["orbits", path, "--max-period", "0"])
    assert code == 2
    assert out == ""


def test_truncate(tmp_path, capsys):
    doc = {"compact_model": {"kind": "diagonal", "family": "geometric", "params": {"c": 1, "q": 0.5}, "rank": 4}}
    path = write(tmp_path, "compact.json", doc)
    code, out, _ = run(capsys, ["truncate", path, "--ranks", "1", "2", "4", "--s", "1"])
    assert code == 0
    df = table(out)
    assert list(df.columns) == ["m", "rho_s", "error_bound"]
    assert df["rho_s"].tolist() == [0.5, 0.5, 0.5]
    assert df["error_bound"].tolist() == pytest.approx([0.25, 0.125, 1 / 32])

    shift = {"compact_model": {"kind": "weighted-shift", "family": "geometric", "params": {"c": 1, "q": 0.5}, "rank": 4}}
    code, out, _ = run(capsys, ["truncate", write(tmp_path, "shift.json", shift), "--ranks", "1", "3", "5"])
    assert code == 0
    assert table(out)["rho_s"].tolist() == [0.0, 0.0, 0.0]


def test_truncate_requires_compact_model(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, err = run(capsys, ["truncate", path, "--ranks", "1"])
    assert code == 2
    assert "compact_model" in err


def test_kingman_requires_seed(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    assert run(capsys, ["kingman", path, "--length", "10"])[0] == 2


def test_kingman_is_reproducible(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    argv = ["kingman", path, "--length", "200", "--checkpoints", "10", "100", "200", "--seed", "7", "--s", "1", "2"]
    code, first, _ = run(capsys, argv)
    assert code == 0
    _, second, _ = run(capsys, argv)
    assert first == second
    df = table(first)
    assert list(df.columns) == ["n", "s", "average"]
    assert len(df) == 6
    ones = df[df["s"] == 1.0]["average"]
    assert ((ones >= 0) & (ones <= np.log(GOLDEN) + 1e-12)).all()
    assert run(capsys, ["kingman", path, "--length", "5", "--checkpoints", "6", "--seed", "1"])[0] == 2


def test_envelope_is_checked_before_words_are_enumerated(tmp_path, capsys):
    wide = write(tmp_path, "window.json", {"alphabet": 4, "dim": 1, "window": 14, "operators": {}})
    code, out, err = run(capsys, ["radii", wide, "--depth", "1", "--orbits", "1"])
    assert code == 3
    assert out == ""
    assert "window" in err

    many = write(tmp_path, "alphabet.json", {"alphabet": 50, "dim": 1, "operators": {}})
    assert run(capsys, ["orbits", many, "--max-period", "1"])[0] == 3
    assert run(capsys, ["orbits", many, "--max-period", "1", "--force"])[0] == 2

    golden = write(tmp_path, "golden.json", GOLDEN_DOC)
    assert run(capsys, ["continuity", golden, "--direction", wide])[0] == 3


def test_out_of_memory_exits_4(tmp_path, capsys, monkeypatch):
    def exhausted(*args, **kwargs):
        raise MemoryError()

    monkeypatch.setattr(cli, "bracket", exhausted)
    code, out, err = run(capsys, ["radii", write(tmp_path, "golden.json", GOLDEN_DOC)])
    assert code == 4
    assert out == ""
    assert "out of memory" in err


def test_kingman_second_order_stays_exact(tmp_path, capsys):
    path = write(tmp_path, "golden.json", GOLDEN_DOC)
    code, out, _ = run(capsys, ["kingman", path, "--s", "2", "--length", "3000", "--checkpoints", "3000", "--seed", "5"])
    assert code == 0
    assert abs(table(out)["average"][0]) <= 1e-12
