"""Shared domain types, validation, and numeric conventions.

Every other module works with the types defined here: a ``Menu`` fixes the
alternative labels and their order, a ``ValueVector`` carries one real value
per alternative, a ``SimplexPoint`` carries choice probabilities, and a
``Dataset`` pairs the two across observations.

Numeric conventions:

* probability vectors are renormalized so their entries sum to one at the
  bit level (|sum - 1| <= 1e-15 * length) and validation is idempotent;
* inner products and cycle sums that feed tolerance checks use compensated
  (exactly rounded) summation via ``math.fsum``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadSumError,
    DuplicateValuesWarning,
    EmptyDatasetError,
    LengthMismatchError,
    MixedMenusError,
    NegativeEntryError,
    NonFiniteError,
    RecordValidationError,
)

#: Default tolerance for simplex validation (negative dust, sum deviation).
TOL_SIMPLEX = 1e-9
#: Default absolute tolerance on cycle sums in monotonicity tests.
TOL_CM = 1e-9
#: Default certified optimality gap for iterative solvers.
TOL_OPT = 1e-8

# Bit-level slack per coordinate allowed after exact renormalization.
_EXACT_SUM_SLACK = 1e-15


def comp_sum(terms: Iterable[float]) -> float:
    """Exactly rounded sum of a sequence of floats."""
    return math.fsum(terms)


def comp_dot(x, y) -> float:
    """Inner product with compensated summation of the rounded products."""
    prod = np.multiply(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return math.fsum(prod.tolist())


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


def _check_vector(raw, *, name: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1:
        raise LengthMismatchError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise LengthMismatchError(f"{name} needs at least two entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


def exact_simplex_array(nonneg: np.ndarray) -> np.ndarray:
    """Rescale a non-negative vector so it sums to one at the bit level.

    Divides by the compensated sum, then pushes the residual into the
    largest entry so ``fsum(out)`` is within one ulp of 1.
    """
    s = math.fsum(nonneg.tolist())
    out = nonneg / s
    resid = 1.0 - math.fsum(out.tolist())
    out[int(np.argmax(out))] += resid
    return out


@dataclass(frozen=True, eq=False)
class Menu:
    """A finite set of alternatives with a fixed ordering.

    The ordering is shared by every vector indexed over the menu.
    """

    id: str
    alternatives: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if len(self.alternatives) < 2:
            raise LengthMismatchError(
                f"menu {self.id!r} needs at least two alternatives, got {len(self.alternatives)}"
            )
        if len(set(self.alternatives)) != len(self.alternatives):
            raise ValueError(f"menu {self.id!r} has duplicate alternative labels")

    @property
    def size(self) -> int:
        return len(self.alternatives)

    def __eq__(self, other):
        return (
            isinstance(other, Menu)
            and self.id == other.id
            and self.alternatives == other.alternatives
        )

    def __repr__(self):
        return f"Menu({self.id!r}, {list(self.alternatives)!r})"


@dataclass(frozen=True, eq=False)
class ValueVector:
    """One real value per alternative; entries may have any sign."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _check_vector(self.entries, name="value vector")
        object.__setattr__(self, "entries", _readonly(arr))

    def __len__(self):
        return self.entries.size

    def __eq__(self, other):
        return isinstance(other, ValueVector) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"ValueVector({self.entries.tolist()!r})"


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector: non-negative entries summing to one.

    Construct through :func:`validate_simplex` (or the model-side
    normalization helpers), which enforce the invariants.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", _readonly(arr))

    def __len__(self):
        return self.entries.size

    def __eq__(self, other):
        return isinstance(other, SimplexPoint) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"SimplexPoint({self.entries.tolist()!r})"


def validate_simplex(raw, tol: float = TOL_SIMPLEX) -> SimplexPoint:
    """Validate and normalize a raw probability vector.

    Entries in ``[-tol, 0)`` are treated as numerical dust: clamped to zero,
    after which the vector is rescaled to sum to one exactly.  The function is
    idempotent: feeding the output back in returns an identical vector, and
    alternatives are never reordered.

    Raises ``NegativeEntryError`` for entries below ``-tol``, ``BadSumError``
    when the sum deviates from one by more than ``tol``, and
    ``LengthMismatchError`` / ``NonFiniteError`` for malformed input.
    """
    arr = _check_vector(raw, name="probability vector")
    low = int(np.argmin(arr))
    if arr[low] < -tol:
        raise NegativeEntryError(
            f"entry {arr[low]!r} at position {low} is below -{tol:g}"
        )
    total = math.fsum(arr.tolist())
    if abs(total - 1.0) > tol:
        raise BadSumError(f"entries sum to {total!r}, expected 1 within {tol:g}")
    clamped = np.where(arr < 0.0, 0.0, arr)
    if np.array_equal(clamped, arr) and abs(total - 1.0) <= _EXACT_SUM_SLACK * arr.size:
        return SimplexPoint(arr)
    return SimplexPoint(exact_simplex_array(clamped))


@dataclass(frozen=True, eq=False)
class Observation:
    """A paired value vector and choice-probability vector over one menu."""

    values: ValueVector
    probs: SimplexPoint

    def __post_init__(self):
        if len(self.values) != len(self.probs):
            raise LengthMismatchError(
                f"values have {len(self.values)} entries but probabilities have {len(self.probs)}"
            )

    def __eq__(self, other):
        return (
            isinstance(other, Observation)
            and self.values == other.values
            and self.probs == other.probs
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered collection of observations over a single menu.

    Observation positions (1..n) are stable and are the indices used in
    witness cycles and reports.
    """

    menu: Menu
    observations: tuple[Observation, ...]

    def __post_init__(self):
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        if not obs:
            raise EmptyDatasetError(f"dataset over menu {self.menu.id!r} has no observations")
        for k, o in enumerate(obs):
            if len(o.values) != self.menu.size:
                raise LengthMismatchError(
                    f"observation {k + 1} has {len(o.values)} entries, menu has {self.menu.size}"
                )
        values = np.vstack([o.values.entries for o in obs])
        probs = np.vstack([o.probs.entries for o in obs])
        values.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "_values", values)
        object.__setattr__(self, "_probs", probs)

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def values_matrix(self) -> np.ndarray:
        """n-by-|A| matrix of value vectors (read-only)."""
        return self._values

    @property
    def probs_matrix(self) -> np.ndarray:
        """n-by-|A| matrix of choice probabilities (read-only)."""
        return self._probs

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.menu == other.menu
            and len(self.observations) == len(other.observations)
            and all(a == b for a, b in zip(self.observations, other.observations))
        )

    def __repr__(self):
        return f"Dataset(menu={self.menu.id!r}, n={self.n}, size={self.menu.size})"


def validate_dataset(
    records: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    *,
    alternatives: Sequence[str] | None = None,
    tol: float = TOL_SIMPLEX,
) -> Dataset:
    """Validate raw ``(menu_id, values, probs)`` records into a Dataset.

    All records must share one menu id.  Per-record failures are aggregated
    into a single ``RecordValidationError`` carrying 1-based record indices.
    Duplicate value vectors with differing probabilities are kept (cycle sums
    remain well defined) but trigger a ``DuplicateValuesWarning``, since such
    data cannot come from a single-valued choice map.
    """
    records = list(records)
    if not records:
        raise EmptyDatasetError("no records supplied")
    menu_ids = {r[0] for r in records}
    if len(menu_ids) != 1:
        raise MixedMenusError(f"records span menus {sorted(menu_ids)!r}")

    size = len(records[0][1])
    if alternatives is None:
        alternatives = tuple(f"a{k + 1}" for k in range(size))
    menu = Menu(records[0][0], tuple(alternatives))

    obs: list[Observation] = []
    failures: list[tuple[int, Exception]] = []
    for k, (_, values, probs) in enumerate(records):
        try:
            v = ValueVector(np.asarray(values, dtype=float))
            if len(v) != menu.size:
                raise LengthMismatchError(
                    f"{len(v)} values against a menu of size {menu.size}"
                )
            p = validate_simplex(probs, tol)
            if len(p) != menu.size:
                raise LengthMismatchError(
                    f"{len(p)} probabilities against a menu of size {menu.size}"
                )
            obs.append(Observation(v, p))
        except Exception as exc:  # aggregated below with record indices
            failures.append((k + 1, exc))
    if failures:
        raise RecordValidationError(failures)

    seen: dict[bytes, tuple[int, bytes]] = {}
    for k, o in enumerate(obs):
        key = o.values.entries.tobytes()
        pkey = o.probs.entries.tobytes()
        if key in seen and seen[key][1] != pkey:
            warnings.warn(
                f"observations {seen[key][0] + 1} and {k + 1} share a value vector "
                "but differ in probabilities",
                DuplicateValuesWarning,
                stacklevel=2,
            )
        seen.setdefault(key, (k, pkey))

    return Dataset(menu, tuple(obs))


def make_dataset(
    menu_id: str,
    values_rows: Sequence[Sequence[float]],
    probs_rows: Sequence[Sequence[float]],
    *,
    alternatives: Sequence[str] | None = None,
    tol: float = TOL_SIMPLEX,
) -> Dataset:
    """Convenience constructor from parallel rows of values and probabilities."""
    if len(values_rows) != len(probs_rows):
        raise LengthMismatchError(
            f"{len(values_rows)} value rows vs {len(probs_rows)} probability rows"
        )
    records = [(menu_id, v, p) for v, p in zip(values_rows, probs_rows)]
    return validate_dataset(records, alternatives=alternatives, tol=tol)
