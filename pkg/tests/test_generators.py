import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvaluations import generators as gen


def test_power_examples():
    assert gen.power(2, p=2)(-3.0) == 9.0
    assert gen.power(3, e=1, p=3)(-2.0) == -8.0
    assert gen.power(0.5, s=2, p=1)(4.0) == 4.0


def test_piecewise_linear_interpolates_and_extrapolates():
    h = gen.piecewise_linear([(-1, -1), (0, 0), (2, 4)])
    assert h(1.0) == 2.0
    assert h(-2.0) == -2.0   # slope 1 continued left
    assert h(3.0) == 6.0     # slope 2 continued right
    with pytest.raises(gen.GeneratorError):
        gen.piecewise_linear([(0, 0), (0, 1)])


def test_polynomial_and_sine():
    h = gen.polynomial([0, 1, 0.5], p=2)
    assert h(2.0) == 4.0
    assert gen.sine(2, 5)(0.0) == 0.0
    assert gen.sine(2, 5)(np.pi / 10) == pytest.approx(2.0)


def test_vectorized():
    h = gen.power(2, p=2)
    np.testing.assert_array_equal(h(np.array([-1.0, 0.0, 3.0])), [1.0, 0.0, 9.0])


@pytest.mark.parametrize("h, expected", [
    (gen.power(1.7, s=-3, p=2), True),
    (gen.affine_const(1.0), False),
    (gen.sine(2, 5), True),
    (gen.piecewise_linear([(-1, 2), (1, 0)]), False),
    (gen.polynomial([0.0, 1.0]), True),
    (gen.polynomial([0.1, 1.0]), False),
])
def test_check_zero(h, expected):
    assert gen.check_zero(h) is expected
    assert h.claims_zero_at_zero is expected


def test_claims_zero_enforced():
    with pytest.raises(gen.GeneratorError):
        gen.Generator("affine_const", {"c": 1.0}, gen.Envelope(1.0), claims_zero_at_zero=True)


def test_validate_envelope_examples():
    samples = np.arange(-10, 11, dtype=float)
    rep = gen.validate_envelope(gen.power(2, p=2, gamma=1, delta=0), samples)
    assert rep.consistent and rep.status == "consistent"

    cube = gen.make_generator("power", {"s": 1, "q": 3, "e": 1}, 2, gamma=1.0, delta=0.0)
    rep = gen.validate_envelope(cube, [2.0])
    assert not rep.consistent
    assert rep.worst_point == 2.0 and rep.worst_violation == 4.0  # |8| - 4
    assert gen.validate_envelope(cube, samples).worst_point in (-10.0, 10.0)

    assert gen.validate_envelope(gen.zero(3), samples).consistent
    with pytest.raises(gen.GeneratorError):
        gen.validate_envelope(gen.zero(), [])


def test_fit_envelope():
    assert gen.fit_envelope("power", {"q": 3}, 2) is None
    with pytest.raises(gen.GeneratorError):
        gen.power(3, p=2)
    env = gen.power(2, s=-1.5, p=2).envelope
    assert (env.gamma, env.delta) == (1.5, 0.0)
    assert gen.sine(2, 3, p=1).envelope.delta == 0.0
    assert gen.sine(2, 3, p=2).envelope.delta == 2.0


ALL = [
    gen.power(2, p=2), gen.power(1.5, s=-2, e=1, p=2), gen.power(0.7, s=1.3, p=2),
    gen.polynomial([0, 1, 0.5], p=2), gen.polynomial([0.3, -1, 0.25], p=2),
    gen.sine(2, 5, p=2), gen.sine(-1, 0.5, p=1), gen.affine_const(-1.5, p=2),
    gen.piecewise_linear([(-3, 1), (0, 0), (1, 2), (4, -1)], p=2),
]


@pytest.mark.parametrize("h", ALL, ids=lambda h: h.family)
def test_fitted_envelopes_hold(h):
    a = np.linspace(-50, 50, 20001)
    assert gen.validate_envelope(h, a).consistent


@pytest.mark.parametrize("h", ALL, ids=lambda h: h.family)
def test_continuity_scan(h):
    # successive differences at step 1e-6 on [-10, 10] stay tiny (no jumps)
    worst = 0.0
    for lo in np.arange(-10, 10, 1.0):
        a = lo + np.arange(1_000_001) * 1e-6
        worst = max(worst, float(np.max(np.abs(np.diff(h(a))))))
    assert worst < 1e-3


@pytest.mark.parametrize("h", ALL, ids=lambda h: h.family)
def test_reflected(h):
    a = np.linspace(-7, 7, 1001)
    np.testing.assert_allclose(h.reflected()(a), h(-a), rtol=1e-15, atol=1e-15)


@given(st.sampled_from(ALL), st.floats(0, 10), st.floats(0, 10),
       st.lists(st.floats(-100, 100), min_size=1, max_size=20))
def test_envelope_monotone(h, dg, dd, samples):
    before = gen.validate_envelope(h, samples).consistent
    env = h.envelope
    bigger = h.with_envelope(gen.Envelope(env.p, env.gamma + dg, env.delta + dd))
    if before:
        assert gen.validate_envelope(bigger, samples).consistent


def test_quadruple_shared_p():
    with pytest.raises(gen.GeneratorError):
        gen.GeneratorQuadruple(gen.power(2, p=2), gen.zero(1), gen.zero(2), gen.zero(2))
    q = gen.quadruple(gen.power(2, p=2))
    assert q.p == 2 and q.all_zero_at_zero and not q.has_delta


def test_literal_round_trip():
    for h in ALL:
        lit = h.to_literal()
        again = gen.make_generator(lit["family"], lit["params"], lit["p"], lit["gamma"], lit["delta"])
        assert again == h


def test_random_generators_are_valid(rng):
    for _ in range(200):
        q = gen.random_quadruple(rng)
        assert q.all_zero_at_zero
        for h in q:
            assert gen.validate_envelope(h, np.linspace(-20, 20, 401)).consistent
