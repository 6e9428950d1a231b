"""Finite possibility spaces, induced maxitive measures and sup-moments.

Everything here lives on a finite sample space, so every supremum is a
maximum and every quantity is computed exactly up to floating point
rounding of the products and differences involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "MaxitiveError",
    "SpaceMismatchError",
    "DistributionError",
    "DomainError",
    "SampleSpace",
    "PossibilityDistribution",
    "Variable",
    "Event",
    "VariableSequence",
    "Deviation",
    "induced_measure",
    "expectation_sup",
    "variance_sup",
    "max_aggregate",
    "normalized_deviation",
    "max_expectation_identity",
    "chebyshev_check",
    "max_diff_bound",
    "expectation_sup_rows",
    "variance_sup_rows",
    "measure_rows",
]


class MaxitiveError(ValueError):
    """Base class for all errors raised by this package."""


class SpaceMismatchError(MaxitiveError):
    """Objects defined on different sample spaces were combined."""


class DistributionError(MaxitiveError):
    """A possibility distribution violates its invariants."""


class DomainError(MaxitiveError):
    """An argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class SampleSpace:
    """A finite, ordered set of outcome labels.

    The order is the canonical indexing used by every function on the
    space; ties in argmax searches resolve to the earliest outcome.
    """

    outcomes: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        outcomes = tuple(str(o) for o in self.outcomes)
        if not outcomes:
            raise MaxitiveError("sample space must contain at least one outcome")
        if len(set(outcomes)) != len(outcomes):
            raise MaxitiveError(f"duplicate outcome labels in {outcomes!r}")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "_index", {o: i for i, o in enumerate(outcomes)})

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def __contains__(self, label) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise MaxitiveError(f"unknown outcome {label!r}") from None


def _check_same(*spaces: SampleSpace) -> SampleSpace:
    first = spaces[0]
    for other in spaces[1:]:
        if other != first:
            raise SpaceMismatchError(
                f"objects live on different sample spaces: {first.outcomes} vs {other.outcomes}"
            )
    return first


@dataclass(frozen=True)
class PossibilityDistribution:
    """Weights in [0, 1] on a finite space whose maximum is exactly 1."""

    space: SampleSpace
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(self.space):
            raise DistributionError(
                f"expected {len(self.space)} weights, got {len(weights)}"
            )
        for label, w in zip(self.space, weights):
            if not (0.0 <= w <= 1.0):
                raise DistributionError(f"weight of {label!r} is {w}, outside [0, 1]")
        if max(weights) != 1.0:
            raise DistributionError(
                f"maximum weight is {max(weights)!r}, a possibility distribution needs exactly 1"
            )
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_mapping(
        cls,
        space: SampleSpace,
        weights: Mapping[str, float],
        renormalize: bool = False,
    ) -> "PossibilityDistribution":
        """Build from ``{label: weight}``; every outcome must be present.

        With ``renormalize`` the weights are divided by their maximum
        before validation.
        """
        missing = [o for o in space if o not in weights]
        if missing:
            raise DistributionError(f"no weight given for outcomes {missing}")
        extra = [k for k in weights if k not in space]
        if extra:
            raise DistributionError(f"weights given for unknown outcomes {extra}")
        values = [float(weights[o]) for o in space]
        if renormalize:
            top = max(values)
            if not top > 0.0 or not math.isfinite(top):
                raise DistributionError("cannot renormalize: maximum weight must be positive and finite")
            values = [v / top for v in values]
        return cls(space, tuple(values))

    def weight(self, label: str) -> float:
        return self.weights[self.space.index(label)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.space.outcomes, self.weights))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def support(self) -> tuple[str, ...]:
        """Outcomes with strictly positive weight."""
        return tuple(o for o, w in zip(self.space, self.weights) if w > 0.0)


@dataclass(frozen=True)
class Variable:
    """A finite real-valued function on a sample space."""

    space: SampleSpace
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != len(self.space):
            raise MaxitiveError(f"expected {len(self.space)} values, got {len(values)}")
        for label, v in zip(self.space, values):
            if not math.isfinite(v):
                raise MaxitiveError(f"value at {label!r} is not finite: {v}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, space: SampleSpace, values: Mapping[str, float]) -> "Variable":
        missing = [o for o in space if o not in values]
        if missing:
            raise MaxitiveError(f"variable is undefined at {missing}")
        return cls(space, tuple(values[o] for o in space))

    @classmethod
    def constant(cls, space: SampleSpace, c: float) -> "Variable":
        return cls(space, (c,) * len(space))

    def __getitem__(self, label: str) -> float:
        return self.values[self.space.index(label)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.space.outcomes, self.values))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Event:
    """A subset of a sample space."""

    space: SampleSpace
    members: frozenset[str]

    def __post_init__(self):
        members = frozenset(str(m) for m in self.members)
        unknown = sorted(m for m in members if m not in self.space)
        if unknown:
            raise MaxitiveError(f"event members {unknown} are not outcomes of the space")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, space: SampleSpace, labels: Iterable[str] = ()) -> "Event":
        return cls(space, frozenset(labels))

    @classmethod
    def from_mask(cls, space: SampleSpace, mask: Sequence[bool]) -> "Event":
        return cls(space, frozenset(o for o, hit in zip(space, mask) if hit))

    @classmethod
    def full(cls, space: SampleSpace) -> "Event":
        return cls(space, frozenset(space.outcomes))

    def ordered(self) -> tuple[str, ...]:
        """Members in canonical order."""
        return tuple(o for o in self.space if o in self.members)

    @property
    def mask(self) -> np.ndarray:
        return np.array([o in self.members for o in self.space], dtype=bool)

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: "Event") -> "Event":
        _check_same(self.space, other.space)
        return Event(self.space, self.members | other.members)

    def __and__(self, other: "Event") -> "Event":
        _check_same(self.space, other.space)
        return Event(self.space, self.members & other.members)

    def complement(self) -> "Event":
        return Event(self.space, frozenset(self.space.outcomes) - self.members)

    def issubset(self, other: "Event") -> bool:
        _check_same(self.space, other.space)
        return self.members <= other.members


@dataclass(frozen=True, eq=False)
class VariableSequence:
    """An indexed family X_1, X_2, ... of variables on one space.

    ``matrix(N)`` returns an ``(N, |space|)`` array whose row ``k-1`` holds
    ``X_k``.  ``limits`` optionally carries the exact pointwise limit of
    each outcome's trajectory (``None`` for an outcome that has no finite
    limit) and ``slopes`` the exact limit of ``X_k / k``; both are only set
    for closed-form generators.
    """

    space: SampleSpace
    rows: Callable[[int], np.ndarray]
    limits: tuple[float | None, ...] | None = None
    slopes: tuple[float, ...] | None = None
    max_index: int | None = None
    name: str = "X"

    def matrix(self, horizon: int) -> np.ndarray:
        if horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {horizon}")
        if self.max_index is not None and horizon > self.max_index:
            raise DomainError(
                f"sequence {self.name} is only defined up to k={self.max_index}, asked for {horizon}"
            )
        out = np.asarray(self.rows(horizon), dtype=float)
        if out.shape != (horizon, len(self.space)):
            raise MaxitiveError(f"generator returned shape {out.shape}, expected {(horizon, len(self.space))}")
        return out

    def variable(self, k: int) -> Variable:
        if k < 1:
            raise DomainError(f"index must be >= 1, got {k}")
        return Variable(self.space, tuple(self.matrix(k)[k - 1]))

    def variables(self, n: int) -> list[Variable]:
        m = self.matrix(n)
        return [Variable(self.space, tuple(row)) for row in m]


# ---------------------------------------------------------------------------
# scalar operations on single variables / events


def induced_measure(dist: PossibilityDistribution, ev: Event) -> float:
    """P(A) = max of the weights over A; the empty event has measure 0."""
    _check_same(dist.space, ev.space)
    best = 0.0
    for label, w in zip(dist.space, dist.weights):
        if label in ev.members and w > best:
            best = w
    return best


def expectation_sup(x: Variable, dist: PossibilityDistribution) -> float:
    """Sup-expectation: max over outcomes of value times weight.

    Taken literally, with no special handling of negative values.
    """
    _check_same(x.space, dist.space)
    return max(v * w for v, w in zip(x.values, dist.weights))


def variance_sup(x: Variable, dist: PossibilityDistribution) -> float:
    e = expectation_sup(x, dist)
    return max((v - e) ** 2 * w for v, w in zip(x.values, dist.weights))


def _prefix(xs: Sequence[Variable], n: int) -> list[Variable]:
    if not xs:
        raise DomainError("need at least one variable")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 1 <= n <= len(xs):
        raise DomainError(f"n must be an integer in [1, {len(xs)}], got {n!r}")
    _check_same(*(x.space for x in xs))
    return list(xs[:n])


def max_aggregate(xs: Sequence[Variable], n: int) -> Variable:
    """Pointwise maximum M_n of the first ``n`` variables."""
    head = _prefix(xs, n)
    return Variable(head[0].space, tuple(max(col) for col in zip(*(x.values for x in head))))


@dataclass(frozen=True)
class Deviation:
    """Running max M_n, its average A_n = M_n/n and Y_n = (M_n - E_sup(M_n))/n."""

    n: int
    running_max: Variable
    average: Variable
    deviation: Variable
    expectation: float


def normalized_deviation(
    xs: Sequence[Variable], dist: PossibilityDistribution, n: int
) -> Deviation:
    m = max_aggregate(xs, n)
    _check_same(m.space, dist.space)
    e = expectation_sup(m, dist)
    return Deviation(
        n=n,
        running_max=m,
        average=Variable(m.space, tuple(v / n for v in m.values)),
        deviation=Variable(m.space, tuple((v - e) / n for v in m.values)),
        expectation=e,
    )


def max_expectation_identity(
    xs: Sequence[Variable], dist: PossibilityDistribution, n: int
) -> tuple[float, float]:
    """Return (E_sup(M_n), max_k E_sup(X_k)); the two coincide."""
    head = _prefix(xs, n)
    lhs = expectation_sup(max_aggregate(head, n), dist)
    rhs = max(expectation_sup(x, dist) for x in head)
    return lhs, rhs


def chebyshev_check(x: Variable, dist: PossibilityDistribution, r: float) -> tuple[float, float]:
    """Return (P(|X - E_sup X| >= r), Var_sup(X) / r**2)."""
    if not r > 0 or not math.isfinite(r):
        raise DomainError(f"r must be a positive finite number, got {r!r}")
    _check_same(x.space, dist.space)
    e = expectation_sup(x, dist)
    far = Event.of(x.space, (o for o, v in zip(x.space, x.values) if abs(v - e) >= r))
    return induced_measure(dist, far), variance_sup(x, dist) / r**2


def max_diff_bound(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Return (|max a - max b|, max |a_i - b_i|); the first never exceeds the second."""
    if len(a) != len(b):
        raise DomainError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise DomainError("empty sequences")
    return abs(max(a) - max(b)), max(abs(x - y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# row-wise versions over (N, |space|) value matrices


def expectation_sup_rows(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.max(values * weights, axis=1)


def variance_sup_rows(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    e = expectation_sup_rows(values, weights)
    return np.max((values - e[:, None]) ** 2 * weights, axis=1)


def measure_rows(masks: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Induced measure of each row's event, given as a boolean mask matrix."""
    return np.max(np.where(masks, weights, 0.0), axis=1)
