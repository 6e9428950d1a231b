"""Possibilistic strong laws of large numbers for running maxima.

For a sequence X_1, X_2, ... let M_n be the pointwise running maximum,
A_n = M_n / n and Y_n = (M_n - E_sup(M_n)) / n.  The checkers below test the
variance-growth hypotheses on a finite horizon and ``run_lln`` verifies the
resulting Chebyshev decay of P(|Y_n| >= eps) together with the convergence
verdicts for Y_n -> 0.

Scenario arguments are duck-typed: anything with a ``distribution``
attribute and a ``sequence()`` method (see :class:`maxitive.scenario.Scenario`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .convergence import (
    DEFAULT_EPS_GRID,
    ConvergenceVerdict,
    converges_ae,
    converges_in_measure,
    tail_start,
)
from .core import (
    DomainError,
    MaxitiveError,
    PossibilityDistribution,
    VariableSequence,
    expectation_sup_rows,
    measure_rows,
    variance_sup_rows,
)

__all__ = [
    "PsiFunction",
    "psi_eval",
    "HorizonMoments",
    "horizon_moments",
    "deviation_sequence",
    "average_sequence",
    "HypothesisReport",
    "check_thm33",
    "check_thm34",
    "check_thm35",
    "MuRemark",
    "check_linear_expectation_remark",
    "LLNReport",
    "run_lln",
]

DEFAULT_HORIZON = 1000
STABILIZE_TOL = 1e-6
MARGIN_TOL = 1e-9
BOUND_TOL = 1e-12
YES, NO, UNDECIDED = "yes", "no", "undecided"


@dataclass(frozen=True)
class PsiFunction:
    """Rate function Psi(n) > 0.

    ``power``: scale * n**delta; ``log-power``: scale * ln(n+1)**delta;
    ``table``: explicit values Psi(1), Psi(2), ...
    """

    family: str
    delta: float = 1.0
    scale: float = 1.0
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in ("power", "log-power", "table"):
            raise DomainError(f"unknown Psi family {self.family!r}")
        if self.family == "table":
            if not self.table:
                raise DomainError("table Psi needs a non-empty table")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        elif not self.scale > 0:
            raise DomainError(f"Psi scale must be positive, got {self.scale}")

    def values(self, horizon: int) -> np.ndarray:
        """Psi(1..horizon); raises if the table is short or any value is not positive."""
        if horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {horizon}")
        n = np.arange(1, horizon + 1, dtype=float)
        if self.family == "power":
            out = self.scale * n**self.delta
        elif self.family == "log-power":
            out = self.scale * np.log(n + 1.0) ** self.delta
        else:
            if len(self.table) < horizon:
                raise DomainError(
                    f"Psi table has {len(self.table)} entries, horizon needs {horizon}"
                )
            out = np.asarray(self.table[:horizon], dtype=float)
        bad = np.flatnonzero(~(out > 0) | ~np.isfinite(out))
        if bad.size:
            raise DomainError(f"invalid Psi: Psi({bad[0] + 1}) = {out[bad[0]]} is not positive and finite")
        return out

    def __call__(self, n: int) -> float:
        return float(self.values(n)[n - 1])

    def to_document(self) -> dict:
        if self.family == "table":
            return {"family": "table", "table": list(self.table)}
        return {"family": self.family, "delta": self.delta, "scale": self.scale}


def psi_eval(psi: PsiFunction, n: int) -> float:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return psi(n)


def _grows(psi_values: np.ndarray) -> bool | None:
    """Eventual growth on the horizon: the tail window sits above the first half."""
    n = psi_values.size
    if n < 10:
        return None
    start = tail_start(n)
    return bool(psi_values[start - 1 :].min() > psi_values[: n // 2].max())


# ---------------------------------------------------------------------------
# horizon moments


@dataclass(frozen=True, eq=False)
class HorizonMoments:
    """Row ``n-1`` of every array refers to index n."""

    weights: np.ndarray
    values: np.ndarray  # X_k
    expectations: np.ndarray  # E_sup(X_k)
    variances: np.ndarray  # Var_sup(X_k)
    running_variance: np.ndarray  # max_{k<=n} Var_sup(X_k)
    running_max: np.ndarray  # M_n
    max_expectation: np.ndarray  # E_sup(M_n)
    average: np.ndarray  # A_n
    average_variance: np.ndarray  # Var_sup(A_n)
    deviation: np.ndarray  # Y_n

    @property
    def horizon(self) -> int:
        return self.values.shape[0]


def _running(values: np.ndarray, weights: np.ndarray):
    n = np.arange(1, values.shape[0] + 1, dtype=float)[:, None]
    m = np.maximum.accumulate(values, axis=0)
    em = expectation_sup_rows(m, weights)
    return m, em, m / n, (m - em[:, None]) / n


def horizon_moments(seq: VariableSequence, dist: PossibilityDistribution, horizon: int) -> HorizonMoments:
    if seq.space != dist.space:
        raise MaxitiveError("sequence and distribution live on different spaces")
    w = dist.array
    x = seq.matrix(horizon)
    var = variance_sup_rows(x, w)
    m, em, a, y = _running(x, w)
    return HorizonMoments(
        weights=w,
        values=x,
        expectations=expectation_sup_rows(x, w),
        variances=var,
        running_variance=np.maximum.accumulate(var),
        running_max=m,
        max_expectation=em,
        average=a,
        average_variance=variance_sup_rows(a, w),
        deviation=y,
    )


def deviation_sequence(seq: VariableSequence, dist: PossibilityDistribution) -> VariableSequence:
    """Y_n = (M_n - E_sup(M_n)) / n as a sequence.

    For closed-form generators with slopes s = lim X_k/k, M_n/n tends to
    max(s, 0) at each outcome and E_sup(M_n)/n to the weighted max of that,
    which gives exact limits for Y_n.
    """
    w = dist.array
    limits = None
    if seq.slopes is not None:
        pos = [max(s, 0.0) for s in seq.slopes]
        centre = max(p * wi for p, wi in zip(pos, dist.weights))
        limits = tuple(p - centre for p in pos)
    return VariableSequence(
        seq.space,
        lambda horizon: _running(seq.matrix(horizon), w)[3],
        limits=limits,
        max_index=seq.max_index,
        name=f"Y[{seq.name}]",
    )


def average_sequence(seq: VariableSequence) -> VariableSequence:
    """A_n = M_n / n as a sequence (exact limits max(s, 0) when slopes are known)."""
    limits = None
    if seq.slopes is not None:
        limits = tuple(max(s, 0.0) for s in seq.slopes)

    def rows(horizon):
        n = np.arange(1, horizon + 1, dtype=float)[:, None]
        return np.maximum.accumulate(seq.matrix(horizon), axis=0) / n

    return VariableSequence(seq.space, rows, limits=limits, max_index=seq.max_index, name=f"A[{seq.name}]")


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    theorem: str
    horizon: int
    satisfied: str  # "yes" | "no" | "undecided"
    C: float
    margins: np.ndarray
    notes: tuple[str, ...] = ()
    supplied_C: bool = False
    first_violation: int | None = None
    partial_sum: float | None = None
    per_k: dict | None = None

    def __post_init__(self):
        if self.satisfied == YES and self.first_violation is not None:
            raise MaxitiveError("a satisfied hypothesis cannot carry a violation")

    def as_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "horizon": self.horizon,
            "satisfied": self.satisfied,
            "C": self.C,
            "supplied_C": self.supplied_C,
            "min_margin": float(self.margins.min()),
            "first_violation": self.first_violation,
            "notes": list(self.notes),
        }
        if self.partial_sum is not None:
            out["partial_sum"] = self.partial_sum
        if self.per_k is not None:
            out["per_k"] = self.per_k
        return out


def _horizon(scenario, horizon):
    return int(horizon or getattr(scenario, "horizon", None) or DEFAULT_HORIZON)


def _moments(scenario, horizon) -> HorizonMoments:
    return horizon_moments(scenario.sequence(), scenario.distribution, horizon)


def _stabilized(running: np.ndarray) -> bool | None:
    """Relative increment of a running sup across the tail window below STABILIZE_TOL."""
    n = running.size
    top = running[-1]
    if top == 0.0:
        return True
    start = tail_start(n)
    if start < 2:
        return None
    return bool((top - running[start - 2]) / top < STABILIZE_TOL)


def _strict(bound: np.ndarray, running_var: np.ndarray):
    margins = bound - running_var
    bad = np.flatnonzero(margins < -MARGIN_TOL * np.maximum(1.0, np.abs(bound)))
    return margins, (int(bad[0]) + 1 if bad.size else None)


def _check_delta(delta: float) -> float:
    if delta is None or not 0.0 < delta < 2.0:
        raise DomainError(f"delta must lie in (0, 2), got {delta!r}")
    return float(delta)


def check_thm33(
    scenario,
    psi: PsiFunction,
    C: float | None = None,
    horizon: int | None = None,
    per_k: bool = False,
) -> HypothesisReport:
    """max_{k<=n} Var_sup(X_k) <= C n^2 / Psi(n) for every n on the horizon.

    Without ``C`` the smallest constant consistent with the horizon is
    inferred and the hypothesis is accepted when that running sup has
    stabilized.  With ``per_k`` the sufficient per-index condition
    Var_sup(X_k) <= C k^2 / Psi(k) with n^2/Psi(n) non-decreasing is
    evaluated as well.
    """
    N = _horizon(scenario, horizon)
    hm = _moments(scenario, N)
    psi_v = psi.values(N)
    n = np.arange(1, N + 1, dtype=float)
    ratio = n**2 / psi_v
    needed = hm.running_variance / ratio
    notes = []
    grows = _grows(psi_v)
    if grows is None:
        notes.append("horizon too short to judge growth of Psi")
    elif not grows:
        notes.append("Psi does not grow on the horizon")

    first_violation = None
    if C is not None:
        if C < 0:
            raise DomainError(f"C must be >= 0, got {C}")
        margins, first_violation = _strict(C * ratio, hm.running_variance)
        if first_violation is not None:
            status = NO
            notes.append(f"bound violated first at n={first_violation}")
        elif grows is False:
            status = NO
        else:
            status = YES if grows else UNDECIDED
        constant = float(C)
    else:
        constant = float(needed.max())
        margins = constant * ratio - hm.running_variance
        stable = _stabilized(np.maximum.accumulate(needed))
        if grows is False:
            status = NO
        elif stable and grows:
            status = YES
        else:
            status = UNDECIDED
            if stable is False:
                notes.append("required constant still growing across the tail window")

    extra = None
    if per_k:
        k_const = float(C) if C is not None else float((hm.variances / ratio).max())
        monotone = bool(np.all(np.diff(ratio) >= 0))
        per_k_ok = bool(np.all(hm.variances <= k_const * ratio * (1 + MARGIN_TOL) + MARGIN_TOL))
        extra = {"C": k_const, "ratio_non_decreasing": monotone, "per_k_bound_holds": per_k_ok,
                 "implies_hypothesis": monotone and per_k_ok}

    return HypothesisReport(
        theorem="3.3",
        horizon=N,
        satisfied=status,
        C=constant,
        margins=margins,
        notes=tuple(notes),
        supplied_C=C is not None,
        first_violation=first_violation,
        per_k=extra,
    )


def check_thm34(
    scenario, delta: float, horizon: int | None = None, C: float | None = None
) -> HypothesisReport:
    """sup_n n^-delta max_{k<=n} Var_sup(X_k) = C < infinity, 0 < delta < 2."""
    delta = _check_delta(delta)
    N = _horizon(scenario, horizon)
    hm = _moments(scenario, N)
    n_delta = np.arange(1, N + 1, dtype=float) ** delta
    scaled = hm.running_variance / n_delta
    running = np.maximum.accumulate(scaled)
    notes = []
    first_violation = None
    if C is not None:
        if C < 0:
            raise DomainError(f"C must be >= 0, got {C}")
        margins, first_violation = _strict(C * n_delta, hm.running_variance)
        status = YES if first_violation is None else NO
        if first_violation is not None:
            notes.append(f"bound violated first at n={first_violation}")
        constant = float(C)
    else:
        constant = float(running[-1])
        margins = constant * n_delta - hm.running_variance
        stable = _stabilized(running)
        status = YES if stable else UNDECIDED
        if stable is False:
            notes.append("running sup still growing across the tail window")
        elif stable is None:
            notes.append("horizon too short to judge stabilization")
    return HypothesisReport(
        theorem="3.4",
        horizon=N,
        satisfied=status,
        C=constant,
        margins=margins,
        notes=tuple(notes),
        supplied_C=C is not None,
        first_violation=first_violation,
    )


def _tail_exponent(terms: np.ndarray) -> float | None:
    """Decay exponent p of the upper envelope of the terms, fitted on k in [sqrt(N), N]."""
    n = terms.size
    envelope = np.maximum.accumulate(terms[::-1])[::-1]
    lo = max(1, math.ceil(math.sqrt(n)))
    k = np.arange(lo, n + 1, dtype=float)
    e = envelope[lo - 1 :]
    keep = e > 0
    if keep.sum() < 3:
        return None
    slope = np.polyfit(np.log(k[keep]), np.log(e[keep]), 1)[0]
    return float(-slope)


def check_thm35(scenario, delta: float, horizon: int | None = None) -> HypothesisReport:
    """sum_k Var_sup(X_k) / k^delta < infinity, 0 < delta < 2.

    Accepted when the largest term in the tail window is below
    ``STABILIZE_TOL`` relative to the partial sum and the envelope of the
    terms decays faster than 1/k.  The partial sum is a lower bound for the
    series; the reported C is max_k Var_sup(X_k)/k^delta on the horizon.
    """
    delta = _check_delta(delta)
    N = _horizon(scenario, horizon)
    hm = _moments(scenario, N)
    terms = hm.variances / np.arange(1, N + 1, dtype=float) ** delta
    partial = math.fsum(terms)
    constant = float(terms.max())
    notes = []
    start = tail_start(N)
    tail_max = float(terms[start - 1 :].max())
    if partial == 0.0:
        status = YES
    elif tail_max == 0.0:
        status = YES
        notes.append("terms vanish on the tail window")
    else:
        p = _tail_exponent(terms)
        small = tail_max / partial < STABILIZE_TOL
        if p is None:
            status = UNDECIDED
            notes.append("too few positive terms to estimate decay")
        else:
            notes.append(f"term envelope decays like k^-{p:.4g}")
            if p <= 1.0:
                notes.append("divergent trend: partial sums keep growing")
            status = YES if (small and p > 1.0) else UNDECIDED
            if p > 1.0 and not small:
                notes.append("tail increments not yet below tolerance")
    return HypothesisReport(
        theorem="3.5",
        horizon=N,
        satisfied=status,
        C=constant,
        margins=constant - terms,
        notes=tuple(notes),
        partial_sum=partial,
    )


class MuRemark(NamedTuple):
    mu: float
    satisfied: bool
    nonnegative: bool
    proportional: bool


def check_linear_expectation_remark(scenario, horizon: int | None = None) -> MuRemark:
    """X_k >= 0 and E_sup(X_k) = k mu on the horizon, with mu = E_sup(X_1)."""
    N = _horizon(scenario, horizon)
    hm = _moments(scenario, N)
    mu = float(hm.expectations[0])
    k = np.arange(1, N + 1, dtype=float)
    nonneg = bool(np.all(hm.values >= 0))
    gap = np.abs(hm.expectations - k * mu)
    proportional = bool(np.all(gap <= MARGIN_TOL * np.maximum(1.0, k * abs(mu))))
    return MuRemark(mu, nonneg and proportional, nonneg, proportional)


# ---------------------------------------------------------------------------
# end-to-end run


@dataclass(frozen=True, eq=False)
class LLNReport:
    theorem: str
    horizon: int
    hypothesis: HypothesisReport
    forced: bool
    C: float
    eps_grid: tuple[float, ...]
    rate: np.ndarray  # Psi(n) or n^(2-delta)
    deviations: dict  # label -> Y_n trajectory, weighted outcomes only
    measured: dict  # eps -> P(|Y_n| >= eps)
    bound: dict  # eps -> C / (rate(n) eps^2)
    violations: int
    average_variance: np.ndarray
    contraction_ok: bool
    rate_bound_ok: bool
    in_measure: ConvergenceVerdict
    ae: ConvergenceVerdict
    remark: MuRemark
    mu_verdict: ConvergenceVerdict | None = None
    mu_gap: dict = field(default_factory=dict)

    @property
    def hypothesis_ok(self) -> bool:
        return self.hypothesis.satisfied == YES or self.forced

    @property
    def verdicts(self) -> list[ConvergenceVerdict]:
        return [v for v in (self.in_measure, self.ae, self.mu_verdict) if v is not None]

    @property
    def ok(self) -> bool:
        return (
            self.hypothesis_ok
            and self.violations == 0
            and all(v.decided != "fails" for v in self.verdicts)
        )


def run_lln(
    scenario,
    theorem: str | None = None,
    *,
    psi: PsiFunction | None = None,
    delta: float | None = None,
    C: float | None = None,
    horizon: int | None = None,
    eps_grid: Sequence[float] | None = None,
    force: bool = False,
    per_k: bool = False,
) -> LLNReport:
    """Verify one of the three strong laws end to end on the horizon.

    Missing parameters fall back to ``scenario.lln``.  The run always
    completes; ``forced`` records that an unsatisfied hypothesis was
    overridden and ``ok`` summarises the outcome.
    """
    params = getattr(scenario, "lln", None)
    theorem = str(theorem or getattr(params, "theorem", None) or "")
    psi = psi or getattr(params, "psi", None)
    delta = delta if delta is not None else getattr(params, "delta", None)
    C = C if C is not None else getattr(params, "C", None)
    eps_grid = tuple(eps_grid or getattr(scenario, "eps_grid", None) or DEFAULT_EPS_GRID)
    N = _horizon(scenario, horizon)
    dist = scenario.distribution
    seq = scenario.sequence()
    n = np.arange(1, N + 1, dtype=float)

    if theorem == "3.3":
        if psi is None:
            raise DomainError("theorem 3.3 needs a Psi function")
        hyp = check_thm33(scenario, psi, C, N, per_k=per_k)
        rate = psi.values(N)
    elif theorem in ("3.4", "3.5"):
        delta = _check_delta(delta)
        hyp = check_thm34(scenario, delta, N, C) if theorem == "3.4" else check_thm35(scenario, delta, N)
        rate = n ** (2.0 - delta)
    else:
        raise DomainError(f"theorem must be one of 3.3, 3.4, 3.5, got {theorem!r}")
    constant = hyp.C

    hm = horizon_moments(seq, dist, N)
    w = hm.weights
    measured, bound = {}, {}
    violations = 0
    for eps in eps_grid:
        if not eps > 0:
            raise DomainError(f"epsilon must be positive, got {eps}")
        measured[eps] = measure_rows(np.abs(hm.deviation) >= eps, w)
        bound[eps] = constant / (rate * eps**2)
        violations += int(np.sum(measured[eps] > bound[eps] + BOUND_TOL))

    contraction = hm.running_variance / n**2
    contraction_ok = bool(np.all(hm.average_variance <= contraction + MARGIN_TOL))
    rate_bound = constant / rate
    rate_bound_ok = bool(np.all(hm.average_variance <= rate_bound + MARGIN_TOL * np.maximum(1.0, rate_bound)))

    ys = deviation_sequence(seq, dist)
    in_measure = converges_in_measure(ys, dist, 0.0, eps_grid, N)
    ae = converges_ae(ys, dist, 0.0, N)

    remark = check_linear_expectation_remark(scenario, N)
    mu_verdict = None
    mu_gap = {}
    if remark.satisfied:
        mu_verdict = converges_ae(average_sequence(seq), dist, remark.mu, N)
        last = hm.running_max[-1]
        mu_gap = {
            o: float(abs(last[i] - N * remark.mu) / N)
            for i, o in enumerate(seq.space)
            if dist.weights[i] > 0.0
        }

    return LLNReport(
        theorem=theorem,
        horizon=N,
        hypothesis=hyp,
        forced=bool(force and hyp.satisfied != YES),
        C=constant,
        eps_grid=eps_grid,
        rate=rate,
        deviations={o: hm.deviation[:, i] for i, o in enumerate(seq.space) if dist.weights[i] > 0.0},
        measured=measured,
        bound=bound,
        violations=violations,
        average_variance=hm.average_variance,
        contraction_ok=contraction_ok,
        rate_bound_ok=rate_bound_ok,
        in_measure=in_measure,
        ae=ae,
        remark=remark,
        mu_verdict=mu_verdict,
        mu_gap=mu_gap,
    )
