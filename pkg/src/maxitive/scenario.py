"""Scenario documents: sample space, distribution, sequence generator and run parameters.

A scenario is a YAML (or JSON) document::

    space:
      outcomes: [a, b]
    distribution:
      weights: {a: 1, b: 0.5}
      renormalize: false          # optional, divide weights by their max
    generator:
      family: affine-basis        # or: explicit, seeded-uniform
      coefficients:               # X_k = alpha*k + beta*sqrt(k) + gamma*ln(k+1) + eta
        a: {alpha: 1}
        b: {alpha: 1, beta: -1}
    lln:                          # optional
      theorem: "3.3"
      psi: {family: power, delta: 1, scale: 1}
      C: 0.5
    run:                          # optional
      horizon: 1000
      eps_grid: [0.05]

``explicit`` generators take ``table: [[...], ...]`` (row k-1 holds X_k in
outcome order).  ``seeded-uniform`` generators take ``seed``, ``base`` and
``amp`` (label maps) and produce ``X_k = base + amp * u(seed, k, i)``; see
:func:`uniform_noise` for the mixing recipe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Mapping, Union

import numpy as np
import yaml

from .core import (
    MaxitiveError,
    PossibilityDistribution,
    SampleSpace,
    Variable,
    VariableSequence,
)
from .lln import PsiFunction

__all__ = [
    "ScenarioError",
    "AffineGenerator",
    "ExplicitGenerator",
    "SeededUniformGenerator",
    "GeneratorSpec",
    "LLNParams",
    "Scenario",
    "generate_variable",
    "parse_scenario",
    "load_scenario",
    "dump_scenario",
    "splitmix64",
    "uniform_noise",
]

MASK64 = (1 << 64) - 1
THEOREMS = ("3.3", "3.4", "3.5")


class ScenarioError(MaxitiveError):
    """Schema or validation failure; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# deterministic noise


def splitmix64(x: int) -> int:
    """One SplitMix64 step (Steele, Lea & Flood) on a 64-bit unsigned integer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def uniform_noise(seed: int, k: int, i: int) -> float:
    """Deterministic value in [-1, 1) for draw ``k`` at outcome index ``i``.

    ``h = sm(sm(sm(seed) ^ k) ^ i)`` with ``sm`` = :func:`splitmix64`, then
    the top 53 bits of ``h`` are scaled to [0, 1) and mapped affinely onto
    [-1, 1).  ``k`` is 1-based and ``i`` is the 0-based canonical index.
    """
    h = splitmix64(splitmix64(splitmix64(seed & MASK64) ^ k) ^ i)
    return (h >> 11) * 2.0**-53 * 2.0 - 1.0


def _splitmix64_array(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _noise_matrix(seed: int, horizon: int, width: int) -> np.ndarray:
    ks = np.arange(1, horizon + 1, dtype=np.uint64)[:, None]
    idx = np.arange(width, dtype=np.uint64)[None, :]
    with np.errstate(over="ignore"):
        s = _splitmix64_array(np.array([seed & MASK64], dtype=np.uint64))[0]
        h = _splitmix64_array(_splitmix64_array(s ^ ks) ^ idx)
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53 * 2.0 - 1.0


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class AffineGenerator:
    """X_k(w) = alpha(w) k + beta(w) sqrt(k) + gamma(w) ln(k+1) + eta(w)."""

    family: ClassVar[str] = "affine-basis"
    space: SampleSpace
    coefficients: tuple[tuple[float, float, float, float], ...]

    def rows(self, horizon: int) -> np.ndarray:
        k = np.arange(1, horizon + 1, dtype=float)[:, None]
        c = np.asarray(self.coefficients, dtype=float)
        alpha, beta, gamma, eta = c[:, 0], c[:, 1], c[:, 2], c[:, 3]
        return alpha * k + beta * np.sqrt(k) + gamma * np.log(k + 1.0) + eta

    def limits(self) -> tuple[float | None, ...]:
        # distinct growth rates: only the constant term can survive
        return tuple(
            eta if (alpha, beta, gamma) == (0.0, 0.0, 0.0) else None
            for alpha, beta, gamma, eta in self.coefficients
        )

    def slopes(self) -> tuple[float, ...]:
        """lim X_k / k per outcome."""
        return tuple(c[0] for c in self.coefficients)


@dataclass(frozen=True)
class ExplicitGenerator:
    family: ClassVar[str] = "explicit"
    space: SampleSpace
    table: tuple[tuple[float, ...], ...]

    def rows(self, horizon: int) -> np.ndarray:
        return np.asarray(self.table[:horizon], dtype=float)


@dataclass(frozen=True)
class SeededUniformGenerator:
    family: ClassVar[str] = "seeded-uniform"
    space: SampleSpace
    seed: int
    base: tuple[float, ...]
    amp: tuple[float, ...]

    def rows(self, horizon: int) -> np.ndarray:
        u = _noise_matrix(self.seed, horizon, len(self.space))
        return np.asarray(self.base) + np.asarray(self.amp) * u

    def with_seed(self, seed: int) -> "SeededUniformGenerator":
        return SeededUniformGenerator(self.space, seed, self.base, self.amp)


GeneratorSpec = Union[AffineGenerator, ExplicitGenerator, SeededUniformGenerator]


def as_sequence(gen: GeneratorSpec) -> VariableSequence:
    if isinstance(gen, AffineGenerator):
        return VariableSequence(gen.space, gen.rows, limits=gen.limits(), slopes=gen.slopes())
    if isinstance(gen, ExplicitGenerator):
        return VariableSequence(gen.space, gen.rows, max_index=len(gen.table))
    return VariableSequence(gen.space, gen.rows)


def generate_variable(gen: GeneratorSpec, k: int) -> Variable:
    """X_k for a generator; identical inputs always give identical values."""
    return as_sequence(gen).variable(k)


# ---------------------------------------------------------------------------
# scenario


@dataclass(frozen=True)
class LLNParams:
    theorem: str | None = None
    psi: PsiFunction | None = None
    delta: float | None = None
    C: float | None = None


@dataclass(frozen=True)
class Scenario:
    distribution: PossibilityDistribution
    generator: GeneratorSpec
    lln: LLNParams = field(default_factory=LLNParams)
    horizon: int | None = None
    eps_grid: tuple[float, ...] | None = None
    name: str | None = None

    @property
    def space(self) -> SampleSpace:
        return self.distribution.space

    def sequence(self) -> VariableSequence:
        return as_sequence(self.generator)

    def variable(self, k: int) -> Variable:
        return generate_variable(self.generator, k)


# ---------------------------------------------------------------------------
# parsing


def _get(node: Mapping, key: str, path: str, required: bool = True, default: Any = None):
    if not isinstance(node, Mapping):
        raise ScenarioError(path, f"expected a mapping, got {type(node).__name__}")
    if key not in node:
        if required:
            raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
        return default
    return node[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ScenarioError(path, f"expected a finite number, got {value!r}")
    return out


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    return value


def _label_map(node: Any, space: SampleSpace, path: str, default: float | None = None) -> tuple[float, ...]:
    if not isinstance(node, Mapping):
        raise ScenarioError(path, "expected a mapping from outcome label to number")
    keys = {str(k): v for k, v in node.items()}
    for k in keys:
        if k not in space:
            raise ScenarioError(f"{path}.{k}", "not an outcome of the space")
    out = []
    for o in space:
        if o not in keys:
            if default is None:
                raise ScenarioError(f"{path}.{o}", "missing value for outcome")
            out.append(default)
        else:
            out.append(_number(keys[o], f"{path}.{o}"))
    return tuple(out)


def _parse_space(doc: Mapping) -> SampleSpace:
    outcomes = _get(_get(doc, "space", ""), "outcomes", "space")
    if not isinstance(outcomes, list) or not outcomes:
        raise ScenarioError("space.outcomes", "expected a non-empty list of labels")
    labels = [str(o) for o in outcomes]
    if len(set(labels)) != len(labels):
        raise ScenarioError("space.outcomes", "labels must be unique")
    return SampleSpace(tuple(labels))


def _parse_distribution(doc: Mapping, space: SampleSpace) -> PossibilityDistribution:
    node = _get(doc, "distribution", "")
    weights = _label_map(_get(node, "weights", "distribution"), space, "distribution.weights")
    renormalize = _get(node, "renormalize", "distribution", required=False, default=False)
    if not isinstance(renormalize, bool):
        raise ScenarioError("distribution.renormalize", "expected true or false")
    for o, w in zip(space, weights):
        if not 0.0 <= w <= 1.0:
            raise ScenarioError(f"distribution.weights.{o}", f"weight {w} outside [0, 1]")
    top = max(weights)
    if renormalize:
        if top <= 0.0:
            raise ScenarioError("distribution.weights", "cannot renormalize all-zero weights")
        weights = tuple(w / top for w in weights)
    elif top != 1.0:
        raise ScenarioError(
            "distribution.weights",
            f"maximum weight is {top}, must be exactly 1 (set renormalize: true to rescale)",
        )
    return PossibilityDistribution(space, weights)


def _parse_generator(doc: Mapping, space: SampleSpace) -> GeneratorSpec:
    node = _get(doc, "generator", "")
    family = _get(node, "family", "generator")
    if family == "affine-basis":
        coeffs = _get(node, "coefficients", "generator")
        if not isinstance(coeffs, Mapping):
            raise ScenarioError("generator.coefficients", "expected a mapping from outcome label")
        coeffs = {str(k): v for k, v in coeffs.items()}
        rows = []
        for k in coeffs:
            if k not in space:
                raise ScenarioError(f"generator.coefficients.{k}", "not an outcome of the space")
        for o in space:
            path = f"generator.coefficients.{o}"
            entry = coeffs.get(o)
            if entry is None:
                raise ScenarioError(path, "missing coefficients for outcome")
            if not isinstance(entry, Mapping):
                raise ScenarioError(path, "expected a mapping with alpha/beta/gamma/eta")
            unknown = set(entry) - {"alpha", "beta", "gamma", "eta"}
            if unknown:
                raise ScenarioError(path, f"unknown coefficient(s) {sorted(unknown)}")
            rows.append(tuple(_number(entry.get(c, 0.0), f"{path}.{c}") for c in ("alpha", "beta", "gamma", "eta")))
        return AffineGenerator(space, tuple(rows))
    if family == "explicit":
        table = _get(node, "table", "generator")
        if not isinstance(table, list) or not table:
            raise ScenarioError("generator.table", "expected a non-empty list of rows")
        rows = []
        for i, row in enumerate(table):
            path = f"generator.table[{i}]"
            if not isinstance(row, list) or len(row) != len(space):
                raise ScenarioError(path, f"expected a row of {len(space)} numbers")
            rows.append(tuple(_number(v, f"{path}[{j}]") for j, v in enumerate(row)))
        return ExplicitGenerator(space, tuple(rows))
    if family == "seeded-uniform":
        seed = _integer(_get(node, "seed", "generator"), "generator.seed")
        if not 0 <= seed <= MASK64:
            raise ScenarioError("generator.seed", "must be an unsigned 64-bit integer")
        base = _label_map(_get(node, "base", "generator"), space, "generator.base")
        amp = _label_map(_get(node, "amp", "generator"), space, "generator.amp")
        for o, a in zip(space, amp):
            if a < 0:
                raise ScenarioError(f"generator.amp.{o}", "amplitude must be >= 0")
        return SeededUniformGenerator(space, seed, base, amp)
    raise ScenarioError("generator.family", f"unknown family {family!r}")


def _parse_psi(node: Any) -> PsiFunction:
    path = "lln.psi"
    family = _get(node, "family", path)
    if family == "table":
        values = _get(node, "table", path)
        if not isinstance(values, list) or not values:
            raise ScenarioError(f"{path}.table", "expected a non-empty list of positive numbers")
        table = tuple(_number(v, f"{path}.table[{i}]") for i, v in enumerate(values))
        if any(v <= 0 for v in table):
            raise ScenarioError(f"{path}.table", "all entries must be positive")
        return PsiFunction("table", table=table)
    if family not in ("power", "log-power"):
        raise ScenarioError(f"{path}.family", f"unknown family {family!r}")
    delta = _number(_get(node, "delta", path), f"{path}.delta")
    scale = _number(_get(node, "scale", path, required=False, default=1.0), f"{path}.scale")
    if scale <= 0:
        raise ScenarioError(f"{path}.scale", "must be positive")
    return PsiFunction(family, delta=delta, scale=scale)


def _parse_lln(doc: Mapping) -> LLNParams:
    node = doc.get("lln")
    if node is None:
        return LLNParams()
    if not isinstance(node, Mapping):
        raise ScenarioError("lln", "expected a mapping")
    theorem = node.get("theorem")
    if theorem is not None:
        theorem = str(theorem)
        if theorem not in THEOREMS:
            raise ScenarioError("lln.theorem", f"expected one of {THEOREMS}, got {theorem!r}")
    psi = _parse_psi(node["psi"]) if node.get("psi") is not None else None
    delta = _number(node["delta"], "lln.delta") if node.get("delta") is not None else None
    C = _number(node["C"], "lln.C") if node.get("C") is not None else None
    if C is not None and C < 0:
        raise ScenarioError("lln.C", "must be >= 0")
    return LLNParams(theorem=theorem, psi=psi, delta=delta, C=C)


def _parse_run(doc: Mapping) -> tuple[int | None, tuple[float, ...] | None]:
    node = doc.get("run")
    if node is None:
        return None, None
    if not isinstance(node, Mapping):
        raise ScenarioError("run", "expected a mapping")
    horizon = None
    if node.get("horizon") is not None:
        horizon = _integer(node["horizon"], "run.horizon")
        if horizon < 1:
            raise ScenarioError("run.horizon", "must be >= 1")
    eps = None
    if node.get("eps_grid") is not None:
        grid = node["eps_grid"]
        if not isinstance(grid, list) or not grid:
            raise ScenarioError("run.eps_grid", "expected a non-empty list of positive numbers")
        eps = tuple(_number(v, f"run.eps_grid[{i}]") for i, v in enumerate(grid))
        if any(e <= 0 for e in eps):
            raise ScenarioError("run.eps_grid", "all entries must be positive")
    return horizon, eps


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("", f"not a valid YAML/JSON document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ScenarioError("", "top level must be a mapping")
    space = _parse_space(doc)
    dist = _parse_distribution(doc, space)
    gen = _parse_generator(doc, space)
    horizon, eps = _parse_run(doc)
    name = doc.get("name")
    return Scenario(
        distribution=dist,
        generator=gen,
        lln=_parse_lln(doc),
        horizon=horizon,
        eps_grid=eps,
        name=str(name) if name is not None else None,
    )


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _num(v: float):
    return int(v) if float(v).is_integer() and abs(v) < 2**53 else float(v)


def to_document(scenario: Scenario) -> dict:
    """Plain-data form of a scenario, with weights already normalized."""
    space = scenario.space
    doc: dict[str, Any] = {}
    if scenario.name is not None:
        doc["name"] = scenario.name
    doc["space"] = {"outcomes": list(space.outcomes)}
    doc["distribution"] = {"weights": {o: _num(w) for o, w in zip(space, scenario.distribution.weights)}}
    gen = scenario.generator
    g: dict[str, Any] = {"family": gen.family}
    if isinstance(gen, AffineGenerator):
        g["coefficients"] = {
            o: {name: _num(v) for name, v in zip(("alpha", "beta", "gamma", "eta"), c) if v != 0.0}
            for o, c in zip(space, gen.coefficients)
        }
    elif isinstance(gen, ExplicitGenerator):
        g["table"] = [[_num(v) for v in row] for row in gen.table]
    else:
        g["seed"] = gen.seed
        g["base"] = {o: _num(v) for o, v in zip(space, gen.base)}
        g["amp"] = {o: _num(v) for o, v in zip(space, gen.amp)}
    doc["generator"] = g
    p = scenario.lln
    if p != LLNParams():
        lln: dict[str, Any] = {}
        if p.theorem is not None:
            lln["theorem"] = p.theorem
        if p.psi is not None:
            lln["psi"] = p.psi.to_document()
        if p.delta is not None:
            lln["delta"] = _num(p.delta)
        if p.C is not None:
            lln["C"] = _num(p.C)
        doc["lln"] = lln
    run: dict[str, Any] = {}
    if scenario.horizon is not None:
        run["horizon"] = scenario.horizon
    if scenario.eps_grid is not None:
        run["eps_grid"] = [_num(e) for e in scenario.eps_grid]
    if run:
        doc["run"] = run
    return doc


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(to_document(scenario), sort_keys=False, default_flow_style=None)
