import numpy as np
import pytest

from maxitive import Event, ScenarioError
from maxitive.core import DomainError
from maxitive.corpus import scenario_corpus
from maxitive.oracle import oracle_moments
from maxitive.scenario import (
    ExplicitGenerator,
    SeededUniformGenerator,
    dump_scenario,
    generate_variable,
    parse_scenario,
    splitmix64,
    uniform_noise,
)

BASE = """
space: {outcomes: [a, b]}
distribution: {weights: {a: 1, b: 0.5}}
generator:
  family: affine-basis
  coefficients: {a: {alpha: 1}, b: {alpha: 1, beta: -1}}
"""


def test_affine_generator_closed_form(s2):
    assert generate_variable(s2.generator, 4).values == (4.0, 2.0)
    x = s2.sequence().matrix(10000)
    k = np.arange(1, 10001)
    assert np.array_equal(x[:, 0], k)
    assert np.allclose(x[:, 1], k - np.sqrt(k), atol=1e-12, rtol=0)


def test_affine_limits_and_slopes(s2, constant):
    assert s2.sequence().limits == (None, None)
    assert s2.sequence().slopes == (1.0, 1.0)
    assert constant.sequence().limits == (3.0, 3.0, 3.0)


def test_explicit_rows_verbatim(s1):
    assert s1.variable(1).values == (2.0, 4.0, 8.0)
    assert s1.variable(2).values == (5.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        s1.variable(3)


def test_seeded_uniform_deterministic():
    doc = """
space: {outcomes: [x, y]}
distribution: {weights: {x: 1, y: 0.3}}
generator: {family: seeded-uniform, seed: 42, base: {x: 1, y: 0}, amp: {x: 0.5, y: 2}}
"""
    sc = parse_scenario(doc)
    assert sc.variable(7) == sc.variable(7)
    assert parse_scenario(doc).variable(7) == sc.variable(7)
    m = sc.sequence().matrix(50)
    assert np.all(np.abs(m[:, 0] - 1) <= 0.5)
    assert np.all(np.abs(m[:, 1]) <= 2)


def test_noise_vector_matches_scalar_recipe():
    gen = SeededUniformGenerator(parse_scenario(BASE).space, 123456789, (0.0, 0.0), (1.0, 1.0))
    m = gen.rows(64)
    for k in range(1, 65):
        for i in range(2):
            assert m[k - 1, i] == uniform_noise(123456789, k, i)
    us = [uniform_noise(7, k, 0) for k in range(1, 2001)]
    assert min(us) >= -1.0 and max(us) < 1.0
    assert abs(sum(us) / len(us)) < 0.1


def test_splitmix64_reference_values():
    # first outputs of the SplitMix64 stream seeded with 0
    state, out = 0, []
    for _ in range(3):
        out.append(splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    assert out == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_parse_s1(s1):
    assert s1.space.outcomes == ("a", "b", "c")
    assert s1.distribution.weights == (1.0, 0.5, 0.25)
    assert isinstance(s1.generator, ExplicitGenerator)


def test_renormalize_flag():
    doc = BASE.replace("{a: 1, b: 0.5}", "{a: 0.5, b: 0.25}, renormalize: true")
    assert parse_scenario(doc).distribution.weights == (1.0, 0.5)


SCHEMA_ERRORS = [
    (BASE.replace("{a: 1, b: 0.5}", "{a: 0.5, b: 0.5}"), "distribution.weights"),
    (BASE.replace("{a: 1, b: 0.5}", "{a: 1, b: 1.5}"), "distribution.weights.b"),
    (BASE.replace("{a: 1, b: 0.5}", "{a: 1}"), "distribution.weights.b"),
    (BASE.replace("beta: -1", "beta: x"), "generator.coefficients.b.beta"),
    (BASE.replace("beta: -1", "delta: 1"), "generator.coefficients.b"),
    (BASE.replace("affine-basis", "quadratic"), "generator.family"),
    (BASE.replace("[a, b]", "[a, a]"), "space.outcomes"),
    (BASE + "run: {horizon: 0}\n", "run.horizon"),
    (BASE + "run: {eps_grid: [0.1, -1]}\n", "run.eps_grid"),
    (BASE + "lln: {theorem: '3.7'}\n", "lln.theorem"),
    (BASE + "lln: {psi: {family: power}}\n", "lln.psi.delta"),
    ("space: {outcomes: []}", "space.outcomes"),
    ("- not a mapping", ""),
]


@pytest.mark.parametrize("doc, path", SCHEMA_ERRORS, ids=[p or "<root>" for _, p in SCHEMA_ERRORS])
def test_schema_errors_carry_field_path(doc, path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(doc)
    assert info.value.path == path


def test_explicit_table_must_be_rectangular():
    doc = """
space: {outcomes: [a, b]}
distribution: {weights: {a: 1, b: 1}}
generator: {family: explicit, table: [[1, 2], [3]]}
"""
    with pytest.raises(ScenarioError) as info:
        parse_scenario(doc)
    assert info.value.path == "generator.table[1]"


def test_negative_amplitude_rejected():
    doc = """
space: {outcomes: [a]}
distribution: {weights: {a: 1}}
generator: {family: seeded-uniform, seed: 1, base: {a: 0}, amp: {a: -1}}
"""
    with pytest.raises(ScenarioError):
        parse_scenario(doc)


def test_lln_section(s2):
    assert s2.lln.theorem == "3.3"
    assert s2.lln.psi.family == "power" and s2.lln.psi.delta == 1.0
    assert s2.horizon == 1000 and s2.eps_grid == (0.05,)


def test_theorem_accepts_number():
    assert parse_scenario(BASE + "lln: {theorem: 3.5, delta: 1.5}\n").lln.theorem == "3.5"


@pytest.mark.parametrize("name", ["s1", "s2", "s3", "constant"])
def test_round_trip(request, name):
    sc = request.getfixturevalue(name)
    again = parse_scenario(dump_scenario(sc))
    assert again == sc
    assert dump_scenario(again) == dump_scenario(sc)


def test_round_trip_corpus():
    for sc in scenario_corpus(11, 30, horizon=20):
        assert parse_scenario(dump_scenario(sc)) == sc


def test_round_trip_normalizes_once():
    doc = BASE.replace("{a: 1, b: 0.5}", "{a: 0.5, b: 0.25}, renormalize: true")
    sc = parse_scenario(doc)
    assert "renormalize" not in dump_scenario(sc)
    assert parse_scenario(dump_scenario(sc)) == sc


def test_identical_documents_identical_scenarios():
    assert parse_scenario(BASE) == parse_scenario(BASE)


def test_oracle_examples(s1):
    assert oracle_moments(s1, k=1) == (2.0, 9.0, None)
    assert oracle_moments(s1, event=Event.of(s1.space, "bc"))[2] == 0.5
    single = parse_scenario(
        """
space: {outcomes: [w]}
distribution: {weights: {w: 1}}
generator: {family: explicit, table: [[2.5]]}
"""
    )
    assert oracle_moments(single, k=1, event=["w"]) == (2.5, 0.0, 1.0)
