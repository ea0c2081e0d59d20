import warnings

import numpy as np
import pytest

from cvaluations import generators as gen
from cvaluations import lattice as lat
from cvaluations.domains import make_sphere_grid, sample_on_sphere
from cvaluations.valuation import (BackendMismatchError, Divergence, ValuationFunctional,
                                   decompose_re_im, evaluate, evaluate_on_characteristic,
                                   rotate_to_imaginary)
from conftest import one_cell

# h1(a) = a, h2(a) = a^2, h3 = 0, h4(a) = a
HAND = ValuationFunctional(gen.quadruple(gen.power(1, e=1, p=2), gen.power(2, p=2),
                                         None, gen.power(1, e=1, p=2)))


def test_zero_generators_give_zero(rng):
    phi = ValuationFunctional(gen.quadruple(p=2))
    part = lat.make_partition([0.3, 0.7, 2.0])
    assert evaluate(phi, lat.from_parts(part, rng.normal(size=3), rng.normal(size=3))) == 0


def test_hand_case():
    # Re: h1(2)*0.5 = 1.0 ; Im: (h2(2) + h4(3))*0.5 = 3.5
    f = one_cell(2 + 3j, m=0.5)
    assert evaluate(HAND, f) == 1.0 + 3.5j
    assert evaluate_on_characteristic(HAND, 2 + 3j, 0.5) == 1.0 + 3.5j


def test_characteristic_edge_cases():
    assert evaluate_on_characteristic(HAND, 0, 3.0) == 0
    assert evaluate_on_characteristic(HAND, 2 + 3j, 0.0) == 0
    with pytest.raises(ValueError):
        evaluate_on_characteristic(HAND, 1, -1.0)


def test_characteristic_inside_larger_partition():
    part = lat.make_partition([0.25, 0.5, 1.25])
    f = lat.characteristic(part, [1], 2 + 3j)
    assert evaluate(HAND, f) == evaluate_on_characteristic(HAND, 2 + 3j, 0.5)


def test_divergence_on_infinite_measure():
    phi = ValuationFunctional(gen.quadruple(gen.affine_const(1.0)))
    out = evaluate(phi, one_cell(0, infinite=True))
    assert isinstance(out, Divergence) and out.slots == ("h1",)
    # the same functional is finite on a finite space
    assert evaluate(phi, one_cell(0, m=2.0)) == 2.0
    fine = ValuationFunctional(gen.quadruple(gen.power(2, p=2)))
    assert evaluate(fine, one_cell(3, m=0.5, infinite=True)) == 4.5


def test_backend_mismatch():
    sq = make_sphere_grid(3, 4)
    f = sample_on_sphere(sq, lambda u: u[:, 2])
    with pytest.raises(BackendMismatchError):
        evaluate(HAND, f)
    with pytest.raises(BackendMismatchError):
        evaluate(HAND.on("sphere"), one_cell(1))


def test_phi_of_zero_is_zero(rng):
    for _ in range(50):
        phi = ValuationFunctional(gen.random_quadruple(rng))
        part = lat.make_partition(rng.uniform(0.1, 3, 5).tolist(), infinite_total=True)
        assert evaluate(phi, lat.constant(part, 0)) == 0


def test_decompose_re_im():
    phi = ValuationFunctional(gen.quadruple(gen.power(1, e=1, p=1)))
    phi1, phi2 = decompose_re_im(phi)
    f = one_cell(1.0)
    assert evaluate(phi1, f) == 1.0
    assert evaluate(phi2, f) == 0.0


def test_decompose_matches_re_im_everywhere(rng):
    for _ in range(100):
        phi = ValuationFunctional(gen.random_quadruple(rng))
        part = lat.make_partition(rng.uniform(0.1, 2, 7).tolist())
        f = lat.from_parts(part, rng.uniform(-5, 5, 7), rng.uniform(-5, 5, 7))
        v = evaluate(phi, f)
        phi1, phi2 = decompose_re_im(phi)
        assert evaluate(phi1, f) == v.real and evaluate(phi2, f) == v.imag


def test_rotate_to_imaginary_examples():
    phi = ValuationFunctional(gen.quadruple(None, None, gen.power(1, e=1, p=1), None))
    assert evaluate(rotate_to_imaginary(phi), one_cell(1.0)) == 1.0
    assert evaluate(rotate_to_imaginary(phi), one_cell(0.0)) == 0.0
    phi = ValuationFunctional(gen.quadruple(None, None, None, gen.power(2, p=2)))
    assert evaluate(rotate_to_imaginary(phi), one_cell(2.0, m=0.25)) == 1.0j


def test_rotate_to_imaginary_on_complex(rng):
    for _ in range(100):
        phi = ValuationFunctional(gen.random_quadruple(rng))
        part = lat.make_partition(rng.uniform(0.1, 2, 6).tolist())
        f = lat.from_parts(part, rng.uniform(-5, 5, 6), rng.uniform(-5, 5, 6))
        a, b = evaluate(rotate_to_imaginary(phi), f), evaluate(phi, lat.times_i(f))
        assert abs(a - b) <= 1e-12 * (abs(a) + abs(b) + 1e-300)


def test_rotate_to_imaginary_reports_offset():
    phi = ValuationFunctional(gen.quadruple(gen.affine_const(0.5), None, gen.power(1, e=1, p=1)))
    with pytest.warns(UserWarning, match="constant"):
        rot = rotate_to_imaginary(phi)
    assert rot.notes
    # reduced form int h3(f) misses h1(0) * mu(X) = 0.5 * 2
    f = one_cell(3.0, m=2.0)
    assert evaluate(rot, f) == evaluate(phi, lat.times_i(f)) == 6.0 + 1.0


def test_no_warning_when_zero_at_zero():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rotate_to_imaginary(HAND)


def test_real_restriction():
    # h3 = h4 = 0 and real f: Phi is the integral of h1(f) + i h2(f)
    h1, h2 = gen.power(2, p=2), gen.sine(1, 2, p=2)
    phi = ValuationFunctional(gen.quadruple(h1, h2))
    part = lat.make_partition([0.5, 1.5])
    f = lat.from_parts(part, [1.0, -2.0])
    expect = complex(0.5 * h1(1.0) + 1.5 * h1(-2.0), 0.5 * h2(1.0) + 1.5 * h2(-2.0))
    assert evaluate(phi, f) == pytest.approx(expect, rel=1e-15)


def test_deterministic_bitwise(rng):
    phi = ValuationFunctional(gen.random_quadruple(rng))
    part = lat.make_partition(rng.uniform(0.1, 2, 40).tolist())
    f = lat.from_parts(part, rng.uniform(-5, 5, 40), rng.uniform(-5, 5, 40))
    assert all(evaluate(phi, f) == evaluate(phi, f) for _ in range(5))
