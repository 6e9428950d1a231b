"""Convergence in possibility measure, almost-everywhere convergence and
the finite-horizon Borel-Cantelli machinery.

Limits over n are only ever assessed on a finite horizon ``1..N``.  Verdicts
are three-valued: ``holds`` and ``fails`` are only reported when the data
(or, for closed-form generators, the exact per-outcome limits) support
them; everything else is ``undecided``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DomainError,
    Event,
    MaxitiveError,
    PossibilityDistribution,
    SampleSpace,
    Variable,
    VariableSequence,
    _check_same,
    measure_rows,
)

__all__ = [
    "DEFAULT_EPS_GRID",
    "DECAY_TOL",
    "CAUCHY_TOL",
    "TAIL_FRACTION",
    "EventTrajectory",
    "Witness",
    "ConvergenceVerdict",
    "BorelCantelliReport",
    "ImplicationReport",
    "deviation_event",
    "deviation_trajectory",
    "measure_trajectory",
    "tail_sup",
    "tail_sups",
    "limsup_event",
    "limsup_masks",
    "borel_cantelli_check",
    "converges_in_measure",
    "converges_ae",
    "in_measure_implies_ae",
    "tail_start",
]

DEFAULT_EPS_GRID = (0.1, 0.05, 0.01)
DECAY_TOL = 1e-9
CAUCHY_TOL = 1e-6
TAIL_FRACTION = 0.1
LIMIT_TOL = 1e-9

HOLDS, FAILS, UNDECIDED = "holds", "fails", "undecided"


def tail_start(horizon: int, fraction: float = TAIL_FRACTION) -> int:
    """1-based index where the tail window ``[start, horizon]`` begins."""
    width = max(1, math.ceil(horizon * fraction))
    return horizon - width + 1


@dataclass(frozen=True, eq=False)
class EventTrajectory:
    """Events B_1..B_N on one space, stored as an ``(N, |space|)`` mask."""

    space: SampleSpace
    masks: np.ndarray

    def __post_init__(self):
        masks = np.array(self.masks, dtype=bool)
        if masks.ndim != 2 or masks.shape[0] < 1 or masks.shape[1] != len(self.space):
            raise MaxitiveError(
                f"event trajectory needs shape (N>=1, {len(self.space)}), got {masks.shape}"
            )
        masks.setflags(write=False)
        object.__setattr__(self, "masks", masks)

    @classmethod
    def from_events(cls, events: Sequence[Event]) -> "EventTrajectory":
        if not events:
            raise MaxitiveError("event trajectory needs at least one event")
        space = _check_same(*(e.space for e in events))
        return cls(space, np.stack([e.mask for e in events]))

    @property
    def horizon(self) -> int:
        return self.masks.shape[0]

    def event(self, n: int) -> Event:
        if not 1 <= n <= self.horizon:
            raise DomainError(f"n must lie in [1, {self.horizon}], got {n}")
        return Event.from_mask(self.space, self.masks[n - 1])

    @property
    def events(self) -> list[Event]:
        return [Event.from_mask(self.space, row) for row in self.masks]


@dataclass(frozen=True)
class Witness:
    outcome: str
    n: int
    value: float


@dataclass(frozen=True)
class ConvergenceVerdict:
    kind: str  # "in-measure" | "almost-everywhere"
    decided: str  # "holds" | "fails" | "undecided"
    horizon: int
    eps_grid: tuple[float, ...] = ()
    witness: Witness | None = None
    method: str = "horizon"  # or "analytic"
    settle: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.witness is not None) != (self.decided == FAILS):
            raise MaxitiveError("a witness is present exactly when the verdict is 'fails'")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "decided": self.decided,
            "method": self.method,
            "horizon": self.horizon,
            "eps_grid": list(self.eps_grid),
            "witness": None
            if self.witness is None
            else {"outcome": self.witness.outcome, "n": self.witness.n, "value": self.witness.value},
            "settle": {repr(k): v for k, v in self.settle.items()},
            "notes": list(self.notes),
        }


def _as_limit(x_limit, space: SampleSpace) -> np.ndarray:
    if isinstance(x_limit, Variable):
        _check_same(x_limit.space, space)
        return x_limit.array
    return np.full(len(space), float(x_limit))


def _check_eps(eps: float) -> float:
    if not eps > 0 or not math.isfinite(eps):
        raise DomainError(f"epsilon must be a positive finite number, got {eps!r}")
    return float(eps)


def _check_grid(eps_grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(_check_eps(e) for e in eps_grid)
    if not grid:
        raise DomainError("epsilon grid must not be empty")
    return grid


# ---------------------------------------------------------------------------
# events and measure trajectories


def deviation_event(y: Variable, x_limit: Variable | float, eps: float) -> Event:
    """B(eps) = {w : |y(w) - x(w)| >= eps}."""
    eps = _check_eps(eps)
    target = _as_limit(x_limit, y.space)
    return Event.from_mask(y.space, np.abs(y.array - target) >= eps)


def deviation_trajectory(
    seq: VariableSequence, x_limit: Variable | float, eps: float, horizon: int
) -> EventTrajectory:
    """B_n(eps) for n = 1..horizon."""
    eps = _check_eps(eps)
    values = seq.matrix(horizon)
    return EventTrajectory(seq.space, np.abs(values - _as_limit(x_limit, seq.space)) >= eps)


def measure_trajectory(traj: EventTrajectory, dist: PossibilityDistribution) -> np.ndarray:
    """P(B_n) for every n in the horizon."""
    _check_same(traj.space, dist.space)
    return measure_rows(traj.masks, dist.array)


def tail_sups(values: Sequence[float]) -> np.ndarray:
    """A_m = max{values[n] : m <= n <= N} for every m (non-increasing in m)."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("need a non-empty one-dimensional trajectory")
    return np.maximum.accumulate(v[::-1])[::-1]


def tail_sup(values: Sequence[float], m: int) -> float:
    """Sup of the trajectory over the window ``[m, N]`` (1-based)."""
    n = len(values)
    if not 1 <= m <= n:
        raise DomainError(f"m must lie in [1, {n}], got {m}")
    return float(np.max(np.asarray(values[m - 1 :], dtype=float)))


def limsup_masks(traj: EventTrajectory) -> np.ndarray:
    """Row ``m-1`` is the mask of the union of B_n over n in [m, N]."""
    return np.logical_or.accumulate(traj.masks[::-1], axis=0)[::-1]


def limsup_event(traj: EventTrajectory, m: int) -> Event:
    """Outcomes lying in some B_n with m <= n <= N.

    This truncates the limsup set at the horizon and therefore
    over-approximates the set of outcomes that lie in infinitely many B_n.
    """
    if not 1 <= m <= traj.horizon:
        raise DomainError(f"window start must lie in [1, {traj.horizon}], got {m}")
    return Event.from_mask(traj.space, traj.masks[m - 1 :].any(axis=0))


@dataclass(frozen=True, eq=False)
class BorelCantelliReport:
    horizon: int
    measures: np.ndarray
    tail_sups: np.ndarray
    limsup_measures: np.ndarray
    inequality_holds: bool
    decided: str  # "holds" when the tail sup reaches 0 inside the horizon
    vanishes_at: int | None

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "inequality_holds": self.inequality_holds,
            "decided": self.decided,
            "vanishes_at": self.vanishes_at,
        }


def borel_cantelli_check(
    traj: EventTrajectory, dist: PossibilityDistribution, decay_tol: float = DECAY_TOL
) -> BorelCantelliReport:
    """Check P(limsup_{n>=m} B_n) <= sup_{n>=m} P(B_n) for every window start m.

    The verdict is ``holds`` (the limsup event has measure 0) when the tail
    sup drops to ``decay_tol`` or below inside the horizon, ``undecided``
    when it plateaus above.
    """
    if traj.horizon < 2:
        raise DomainError("Borel-Cantelli check needs a horizon of at least 2")
    measures = measure_trajectory(traj, dist)
    sups = tail_sups(measures)
    limsup = measure_rows(limsup_masks(traj), dist.array)
    ok = bool(np.all(limsup <= sups))
    below = np.flatnonzero(sups <= decay_tol)
    vanishes_at = int(below[0]) + 1 if below.size else None
    return BorelCantelliReport(
        horizon=traj.horizon,
        measures=measures,
        tail_sups=sups,
        limsup_measures=limsup,
        inequality_holds=ok,
        decided=HOLDS if vanishes_at is not None else UNDECIDED,
        vanishes_at=vanishes_at,
    )


# ---------------------------------------------------------------------------
# verdicts


def _settle_index(trajectory: np.ndarray, tol: float) -> int | None:
    """First n such that the trajectory stays <= tol on [n, N]."""
    above = np.flatnonzero(trajectory > tol)
    if above.size == 0:
        return 1
    last = int(above[-1]) + 1
    return last + 1 if last < trajectory.size else None


def _analytic_offender(seq, dist, target) -> int | None:
    for i, (lim, w) in enumerate(zip(seq.limits, dist.weights)):
        if w > 0.0 and (lim is None or abs(lim - target[i]) > LIMIT_TOL):
            return i
    return None


def _settled_wrong(values, target, dist, start, cauchy_tol) -> int | None:
    """Index of the first weighted outcome that has settled at a wrong value."""
    tail = values[start - 1 :]
    osc = tail.max(axis=0) - tail.min(axis=0)
    off = np.abs(values[-1] - target)
    for i, w in enumerate(dist.weights):
        if w > 0.0 and osc[i] <= cauchy_tol and off[i] > cauchy_tol:
            return i
    return None


def converges_in_measure(
    seq: VariableSequence,
    dist: PossibilityDistribution,
    x_limit: Variable | float,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    horizon: int = 1000,
    decay_tol: float = DECAY_TOL,
    cauchy_tol: float = CAUCHY_TOL,
    tail_fraction: float = TAIL_FRACTION,
) -> ConvergenceVerdict:
    """Does X_n -> X in possibility measure?

    With exact per-outcome limits (closed-form generators) the verdict is
    exact: on a finite space the measure of B_n(eps) vanishes for every
    eps exactly when every outcome of positive weight converges.  Otherwise
    the measure trajectories are read on the tail window of the horizon:

    * ``fails`` if a weighted outcome deviates by at least some grid eps over
      the whole tail without decaying monotonically, or has settled (oscillation within
      ``cauchy_tol``) at a value off the limit;
    * ``holds`` if every grid trajectory stays within ``decay_tol`` over the
      tail window;
    * ``undecided`` otherwise.
    """
    grid = _check_grid(eps_grid)
    _check_same(seq.space, dist.space)
    values = seq.matrix(horizon)
    target = _as_limit(x_limit, seq.space)
    dev = np.abs(values - target)
    w = dist.array
    start = tail_start(horizon, tail_fraction)
    settle = {}
    tails_ok = True
    for eps in grid:
        traj = measure_rows(dev >= eps, w)
        settle[eps] = _settle_index(traj, decay_tol)
        if np.any(traj[start - 1 :] > decay_tol):
            tails_ok = False

    def verdict(decided, offender=None, method="horizon", notes=()):
        witness = None
        if offender is not None:
            witness = Witness(seq.space.outcomes[offender], horizon, float(dev[-1, offender]))
        return ConvergenceVerdict("in-measure", decided, horizon, grid, witness, method, settle, tuple(notes))

    if seq.limits is not None:
        offender = _analytic_offender(seq, dist, target)
        if offender is not None:
            return verdict(FAILS, offender, "analytic")
        notes = () if tails_ok else ("horizon tail has not yet settled below decay_tol",)
        return verdict(HOLDS, method="analytic", notes=notes)

    offender = _settled_wrong(values, target, dist, start, cauchy_tol)
    if offender is None:
        tail = dev[start - 1 :]
        decaying = np.all(np.diff(tail, axis=0) <= 0, axis=0) & (tail[-1] < tail[0])
        for eps in grid:
            persistent = np.all(tail >= eps, axis=0) & ~decaying
            hits = [i for i in np.flatnonzero(persistent) if dist.weights[i] > 0.0]
            if hits:
                offender = hits[0]
                break
    if offender is not None:
        return verdict(FAILS, offender)
    return verdict(HOLDS if tails_ok else UNDECIDED)


def converges_ae(
    seq: VariableSequence,
    dist: PossibilityDistribution,
    x_limit: Variable | float,
    horizon: int = 1000,
    cauchy_tol: float = CAUCHY_TOL,
    tail_fraction: float = TAIL_FRACTION,
) -> ConvergenceVerdict:
    """Does X_n -> X almost everywhere with respect to the possibility measure?

    On a finite space the non-convergence set has measure 0 exactly when
    every outcome of positive weight converges.  Closed-form sequences use
    their exact limits; other sequences use a Cauchy-window test on the
    tail window (``holds`` if every weighted outcome stays within
    ``cauchy_tol`` of the limit, ``fails`` if one has settled elsewhere).
    """
    if horizon < 2:
        raise DomainError("almost-everywhere check needs a horizon of at least 2")
    _check_same(seq.space, dist.space)
    values = seq.matrix(horizon)
    target = _as_limit(x_limit, seq.space)
    dev = np.abs(values - target)

    def verdict(decided, offender=None, method="horizon"):
        witness = None
        if offender is not None:
            witness = Witness(seq.space.outcomes[offender], horizon, float(dev[-1, offender]))
        return ConvergenceVerdict("almost-everywhere", decided, horizon, (), witness, method)

    if seq.limits is not None:
        offender = _analytic_offender(seq, dist, target)
        return verdict(HOLDS if offender is None else FAILS, offender, "analytic")

    start = tail_start(horizon, tail_fraction)
    offender = _settled_wrong(values, target, dist, start, cauchy_tol)
    if offender is not None:
        return verdict(FAILS, offender)
    near = dev[start - 1 :].max(axis=0) <= cauchy_tol
    if all(near[i] for i, w in enumerate(dist.weights) if w > 0.0):
        return verdict(HOLDS)
    return verdict(UNDECIDED)


@dataclass(frozen=True)
class ImplicationReport:
    in_measure: ConvergenceVerdict
    ae: ConvergenceVerdict

    @property
    def violated(self) -> bool:
        """In-measure convergence decided but a.e. convergence refuted."""
        return self.in_measure.decided == HOLDS and self.ae.decided == FAILS


def in_measure_implies_ae(
    seq: VariableSequence,
    dist: PossibilityDistribution,
    x_limit: Variable | float,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    horizon: int = 1000,
    decay_tol: float = DECAY_TOL,
    cauchy_tol: float = CAUCHY_TOL,
) -> ImplicationReport:
    return ImplicationReport(
        converges_in_measure(seq, dist, x_limit, eps_grid, horizon, decay_tol, cauchy_tol),
        converges_ae(seq, dist, x_limit, horizon, cauchy_tol),
    )
