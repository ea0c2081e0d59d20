import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvaluations import generators as gen
from cvaluations import harness as hn
from cvaluations import lattice as lat
from cvaluations.domains import make_box_grid, make_sphere_grid, rotation_matrix, sample_on_grid, sample_on_sphere
from cvaluations.valuation import ValuationFunctional, evaluate

LIN = ValuationFunctional(gen.quadruple(gen.power(1, e=1, p=1)))


def test_reports_are_deterministic():
    a = hn.run_valuation_law(None, 50, seed=7)
    b = hn.run_valuation_law(None, 50, seed=7)
    assert a.to_dict() == b.to_dict()
    assert a.to_dict()["pass"] is True and "passed" not in a.to_dict()


def test_zero_trials_is_vacuous():
    r = hn.run_valuation_law(None, 0, seed=1)
    assert r.passed and r.trials == 0 and r.max_deviation == 0.0


def test_equal_pair_has_zero_defect(rng):
    for _ in range(20):
        phi = ValuationFunctional(gen.random_quadruple(rng))
        f = hn.random_function(rng, hn.random_partition(rng))
        assert hn.valuation_defect(phi, f, f) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_valuation_law_any_seed(seed):
    assert hn.run_valuation_law(None, 3, seed).max_deviation <= hn.EXACT_TOL


def test_oracle_single_cell():
    phi = ValuationFunctional(gen.quadruple(gen.power(2, p=2), gen.sine(1, 1, p=2), gen.power(1, e=1, p=2)))
    part = lat.make_partition([0.7])
    f, g = lat.from_parts(part, [1.0], [2.0]), lat.from_parts(part, [-1.0], [3.0])
    r = hn.run_oracle_equivalence(phi, f, g)
    assert r.passed and r.details["labels"] == ["G"]


def test_oracle_four_labels():
    part = lat.make_partition([0.5, 1.0, 1.5, 2.0])
    f = lat.from_parts(part, [0, 0, 1, 1], [0, 1, 0, 1])
    g = lat.from_parts(part, [0.5, 0.5, 0.5, 0.5], [0.5, 0.5, 0.5, 0.5])
    assert "".join(lat.four_set_partition(f, g)) == "EFGH"
    phi = ValuationFunctional(gen.quadruple(gen.power(3, s=1, p=3), gen.power(1, e=1, p=3),
                                            gen.sine(2, 0.5, p=3), gen.power(2, p=3)))
    r = hn.run_oracle_equivalence(phi, f, g)
    assert r.passed and r.details["bitwise_equal"]
    total, partials = hn.four_set_reconstruction(phi, f, g, "join")
    assert total == evaluate(phi, lat.join(f, g))
    # on E the join takes both parts from g
    assert partials["E"] == evaluate(phi, lat.characteristic(part, [0], 0.5 + 0.5j))


def test_oracle_ties_and_identical_inputs(rng):
    phi = ValuationFunctional(gen.random_quadruple(rng))
    f = hn.random_function(rng, hn.random_partition(rng, 5, 5))
    assert set(lat.four_set_partition(f, f)) == {"E"}
    assert hn.oracle_check(phi, f, f)[0]


def test_oracle_trials_bitwise():
    r = hn.run_oracle_trials(None, 200, seed=3)
    assert r.passed and r.details["bitwise_mismatches"] == 0


def test_characteristic_runner():
    assert hn.run_characteristic(None, 200, seed=4).passed
    assert hn.run_characteristic(None, 100, seed=4, refine=True).passed


@pytest.mark.parametrize("runner", [hn.run_re_im_split, hn.run_imaginary_rotation, hn.run_component_split])
def test_decomposition_runners(runner):
    r = runner(None, 200, seed=5)
    assert r.passed, r
    phi = ValuationFunctional(gen.quadruple(gen.affine_const(1.0)))
    with pytest.raises(hn.InvalidScenarioError):
        runner(phi, 1, seed=0)


def test_times_i_lattice_runner():
    r = hn.run_times_i_lattice(300, seed=6)
    assert r.passed and r.max_deviation == 0.0
    assert r.details["complex_input_counterexamples"] > 0


def test_times_i_complex_counterexample():
    part = lat.make_partition([1.0])
    f, g = lat.from_parts(part, [0.0], [1.0]), lat.from_parts(part, [1.0], [0.0])
    lhs = lat.times_i(lat.join(f, g))
    rhs = lat.join(lat.times_i(f), lat.times_i(g))
    assert lhs.values[0] == -1 + 1j and rhs.values[0] == 0 + 1j


def test_refinement_runner():
    assert hn.run_refinement_invariance(None, 200, seed=8).passed


def test_continuity_harmonic_to_zero():
    part = lat.make_partition([0.5, 1.0])
    f = lat.constant(part, 0)
    r = hn.run_continuity(LIN, f, hn.harmonic_rule(f, [1]), steps=30)
    np.testing.assert_allclose(r.curve, [1.0 / k for k in range(1, 31)], rtol=1e-15)
    assert not r.passed  # 1/30 is far above 1e-8


def test_continuity_dyadic(rng):
    phi = ValuationFunctional(gen.quadruple(gen.power(2, p=2), gen.sine(1, 1, p=2)))
    f = hn.random_function(rng, hn.random_partition(rng, 6, 6))
    r = hn.run_continuity(phi, f, hn.dyadic_rule(f, [0, 2]), steps=30)
    assert r.passed and r.max_deviation <= 1e-8
    assert all(b <= a for a, b in zip(r.curve[4:], r.curve[5:]))


def test_continuity_single_step_is_exact(rng):
    f = hn.random_function(rng, hn.random_partition(rng, 3, 3))
    r = hn.run_continuity(LIN, f, lambda k: f, steps=1)
    assert r.passed and r.curve == [0.0]


def test_continuity_rejects_divergent_sequence(rng):
    f = hn.random_function(rng, hn.random_partition(rng, 3, 3))
    with pytest.raises(hn.InvalidScenarioError):
        hn.run_continuity(LIN, f, lambda k: lat.characteristic(f.partition, [0], k) + f, steps=5)


def test_growth_p2_witness():
    r = hn.run_necessity_growth(2.0)
    assert r.passed and r.details["diverged"]
    assert r.witness[9] == pytest.approx(10.0, rel=1e-14)
    assert r.details["lp_norms"][9] ** 2 == pytest.approx(0.1, rel=1e-14)
    assert r.trials == hn.default_steps(2.0) == 200


def test_growth_p1():
    r = hn.run_necessity_growth(1.0, steps=50)
    np.testing.assert_allclose(r.witness, np.arange(1, 51), rtol=1e-13)
    assert r.passed


def test_growth_control_arm():
    h = gen.power(2, p=2)
    r = hn.run_necessity_growth(2.0, generator=h, expect="bounded")
    k = np.arange(1, r.trials + 1)
    np.testing.assert_allclose(r.witness, 1 / k, rtol=1e-13)
    assert r.passed and not r.details["diverged"]
    # a compliant generator fails the "diverge" expectation
    assert not hn.run_necessity_growth(2.0, generator=h).passed


def test_growth_rejects_bad_input():
    with pytest.raises(hn.InvalidScenarioError):
        hn.run_necessity_growth(0.5)
    with pytest.raises(hn.InvalidScenarioError):
        hn.run_necessity_growth(2.0, expect="maybe")


@pytest.mark.parametrize("h, diverges", [
    (gen.affine_const(0.5), True),
    (gen.piecewise_linear([(-1, 0), (0, 0.5), (1, 1)], p=1), True),
    (gen.power(2, p=2), False),
    (gen.sine(1, 3, p=1), False),
    (gen.zero(2), False),
])
def test_delta_infinite(h, diverges):
    r = hn.run_necessity_delta_infinite(h)
    assert r.passed and r.witness == [diverges] * 4
    wrong = "finite" if diverges else "diverge"
    assert not hn.run_necessity_delta_infinite(h, expect=wrong).passed


def test_translation_invariance_report():
    phi = ValuationFunctional(gen.quadruple(gen.power(2, p=2), None, None, gen.power(2, s=0.5, p=2)), "grid")
    g = make_box_grid(2, [(-2, 2), (-2, 2)], 32)
    f = sample_on_grid(g, lambda x, y: np.exp(-4 * (x * x + y * y)), buffer=6)
    r = hn.run_invariance(phi, "translation", g.cell_size * [3, -2], f)
    assert r.passed and r.max_deviation == 0.0 and r.tolerance == hn.EXACT_TOL
    r = hn.run_invariance(phi, "translation", g.cell_size * [0.5, 0], f)
    assert r.tolerance == hn.RESAMPLED_TOL and r.details["resampled"]


def test_rotation_invariance_report():
    phi = ValuationFunctional(gen.quadruple(gen.power(2, p=2)), "sphere")
    sq = make_sphere_grid(3, 8)
    f = sample_on_sphere(sq, lambda u: u[:, 0] + 2 * u[:, 2])
    r = hn.run_invariance(phi, "rotation", rotation_matrix(math.pi, [0, 0, 1]), f)
    assert r.passed and r.max_deviation <= hn.EXACT_TOL and not r.details["resampled"]
    with pytest.raises(hn.InvalidScenarioError):
        hn.run_invariance(phi, "reflection", None, f)
