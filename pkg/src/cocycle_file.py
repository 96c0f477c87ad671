"""
JSON cocycle files.

    {
      "alphabet": 2,
      "transition": [[1, 1], [1, 0]],          # optional, default full shift
      "dim": 2,
      "window": 1,                             # optional
      "operators": {"0": [[1, 1], [0, 1]], "1": [[1, 0], [1, 1]]},
      "alpha": 1.0                             # optional
    }

A file may give "compact_model" instead of "operators", which expands to the
constant cocycle on one symbol whose value is the rank-m finite section.
"""
import json
import logging
from dataclasses import dataclass

import numpy as np

from compact_ops import FAMILIES, KINDS, CompactModel, truncate
from dynamics import Subshift, WindowCocycle, admissible_words
from utils import DomainError, word_label

log = logging.getLogger(__name__)

KNOWN_KEYS = ("alphabet", "transition", "dim", "window", "operators", "compact_model", "alpha")
COMPACT_KEYS = ("kind", "family", "params", "rank")
FAMILY_PARAMS = {"geometric": ("c", "q"), "power": ("c", "p")}
MAX_ALPHABET = 10


class SpecFileError(DomainError):
    """Malformed cocycle file; key names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class CocycleSpec:
    """In-memory form of a cocycle file, holding plain JSON values."""

    alphabet: int
    dim: int
    operators: dict = None
    transition: list = None
    window: int = 1
    alpha: float = 1.0
    compact_model: dict = None

    def subshift(self):
        if self.transition is None:
            return Subshift.full(self.alphabet)
        return Subshift(np.array(self.transition))

    def model(self):
        if self.compact_model is None:
            raise SpecFileError("compact_model", "file has no compact model")
        cm = self.compact_model
        return CompactModel(kind=cm["kind"], family=cm["family"], **cm["params"])

    def cocycle(self):
        S = self.subshift()
        if self.compact_model is not None:
            section = truncate(self.model(), self.compact_model["rank"])
            return WindowCocycle.constant(S, section.matrix, window=self.window, alpha=self.alpha)
        return WindowCocycle(S, dict(self.operators), window=self.window, alpha=self.alpha)


def _integer(doc, key, minimum=1, label=None):
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SpecFileError(label or key, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _matrix(key, value, dim):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecFileError(key, "expected a numeric matrix") from None
    if M.shape != (dim, dim):
        raise SpecFileError(key, f"expected shape {(dim, dim)}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise SpecFileError(key, "entries must be finite")
    return M.tolist()


def _compact_model(value):
    if not isinstance(value, dict):
        raise SpecFileError("compact_model", "expected an object")
    for key in value:
        if key not in COMPACT_KEYS:
            raise SpecFileError(f"compact_model.{key}", "unknown key")
    for key in COMPACT_KEYS:
        if key not in value:
            raise SpecFileError(f"compact_model.{key}", "missing")
    if value["kind"] not in KINDS:
        raise SpecFileError("compact_model.kind", f"expected one of {KINDS}, got {value['kind']!r}")
    if value["family"] not in FAMILIES:
        raise SpecFileError("compact_model.family", f"expected one of {FAMILIES}, got {value['family']!r}")
    rank = _integer(value, "rank", label="compact_model.rank")
    params = value["params"]
    if not isinstance(params, dict) or set(params) != set(FAMILY_PARAMS[value["family"]]):
        raise SpecFileError(
            "compact_model.params", f"{value['family']} family takes exactly {FAMILY_PARAMS[value['family']]}"
        )
    params = {k: float(v) for k, v in params.items()}
    try:
        CompactModel(kind=value["kind"], family=value["family"], **params)
    except DomainError as e:
        raise SpecFileError("compact_model.params", str(e)) from e
    return {"kind": value["kind"], "family": value["family"], "params": params, "rank": rank}


def parse_spec(doc):
    """
    Validates a decoded JSON document and returns the CocycleSpec it describes.

    Raises:
        SpecFileError: naming the first offending key.
    """
    if not isinstance(doc, dict):
        raise SpecFileError("<root>", "expected a JSON object")
    for key in doc:
        if key not in KNOWN_KEYS:
            raise SpecFileError(key, "unknown key")

    window = _integer(doc, "window") if "window" in doc else 1
    alpha = doc.get("alpha", 1.0)
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) or not alpha > 0:
        raise SpecFileError("alpha", f"expected a positive number, got {alpha!r}")

    if "compact_model" in doc:
        if "operators" in doc:
            raise SpecFileError("operators", "not allowed together with compact_model")
        cm = _compact_model(doc["compact_model"])
        alphabet = _integer(doc, "alphabet") if "alphabet" in doc else 1
        if alphabet != 1:
            raise SpecFileError("alphabet", "a compact model expands to a 1-symbol cocycle")
        if "dim" in doc and _integer(doc, "dim") != cm["rank"]:
            raise SpecFileError("dim", f"must equal compact_model.rank = {cm['rank']}")
        if "transition" in doc and doc["transition"] != [[1]]:
            raise SpecFileError("transition", "a 1-symbol shift has transition [[1]]")
        return CocycleSpec(alphabet=1, dim=cm["rank"], window=window, alpha=float(alpha), compact_model=cm)

    for key in ("alphabet", "dim", "operators"):
        if key not in doc:
            raise SpecFileError(key, "missing")
    alphabet = _integer(doc, "alphabet")
    if alphabet > MAX_ALPHABET:
        raise SpecFileError("alphabet", f"symbols are single digits, at most {MAX_ALPHABET}")
    dim = _integer(doc, "dim")

    transition = None
    if "transition" in doc:
        transition = doc["transition"]
        T = np.array(transition, dtype=object)
        if T.shape != (alphabet, alphabet):
            raise SpecFileError("transition", f"expected shape {(alphabet, alphabet)}, got {T.shape}")
        if not all(v in (0, 1) and not isinstance(v, bool) for v in T.reshape(-1)):
            raise SpecFileError("transition", "entries must be 0 or 1")
        transition = [[int(v) for v in row] for row in transition]
    try:
        S = Subshift.full(alphabet) if transition is None else Subshift(np.array(transition))
    except DomainError as e:
        raise SpecFileError("transition", str(e)) from e

    operators = doc["operators"]
    if not isinstance(operators, dict):
        raise SpecFileError("operators", "expected an object keyed by window words")
    admissible = [word_label(u) for u in admissible_words(S, window)]
    for label in operators:
        if label not in admissible:
            raise SpecFileError(f"operators.{label}", f"not an admissible {window}-word")
    for label in admissible:
        if label not in operators:
            raise SpecFileError(f"operators.{label}", "missing operator for admissible word")
    operators = {label: _matrix(f"operators.{label}", operators[label], dim) for label in admissible}

    return CocycleSpec(
        alphabet=alphabet,
        dim=dim,
        operators=operators,
        transition=transition,
        window=window,
        alpha=float(alpha),
    )


def read_document(path):
    """Decoded JSON of a cocycle file, before any validation."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise SpecFileError("<file>", f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise SpecFileError("<file>", f"{path} is not valid JSON: {e}") from e


def load_spec(path):
    spec = parse_spec(read_document(path))
    log.info("loaded %s: alphabet %d, dim %d, window %d", path, spec.alphabet, spec.dim, spec.window)
    return spec


def dump_spec(spec):
    """The JSON document parse_spec turns back into spec."""
    doc = {"alphabet": spec.alphabet, "dim": spec.dim}
    if spec.transition is not None:
        doc["transition"] = spec.transition
    doc["window"] = spec.window
    if spec.compact_model is not None:
        doc["compact_model"] = spec.compact_model
    else:
        doc["operators"] = spec.operators
    doc["alpha"] = spec.alpha
    return doc


def write_spec(spec, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(dump_spec(spec), f, indent=2)
        f.write("\n")


def spec_from_cocycle(A):
    """CocycleSpec of an in-memory window cocycle with a single-digit alphabet."""
    S = A.subshift
    full = bool(np.all(S.transition == 1))
    return CocycleSpec(
        alphabet=S.alphabet_size,
        dim=A.dim,
        operators={word_label(u): T.entries.tolist() for u, T in A.table.items()},
        transition=None if full else S.transition.tolist(),
        window=A.window,
        alpha=float(A.alpha),
    )
