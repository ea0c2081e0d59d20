"""Complex valuations built from a generator quadruple.

For a quadruple ``(h1, h2, h3, h4)`` the functional is

    Phi(f) = int (h1(Re f) + h3(Im f)) dmu  +  i int (h2(Re f) + h4(Im f)) dmu

integrated exactly over a partition, or by cell/node weights on a box grid
or a sphere quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .generators import GeneratorQuadruple, check_zero, zero
from .lattice import accumulate

BACKENDS = ("simple", "grid", "sphere")


class BackendMismatchError(TypeError):
    pass


@dataclass(frozen=True)
class Divergence:
    """Result of an integral that is infinite (not an error)."""

    reason: str
    slots: tuple[str, ...] = ()

    def __repr__(self):
        return f"Divergence({self.reason!r}, slots={self.slots})"


Value = Union[complex, Divergence]


@dataclass(frozen=True)
class ValuationFunctional:
    quadruple: GeneratorQuadruple
    backend: str = "simple"
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")

    def __call__(self, f) -> Value:
        return evaluate(self, f)

    def on(self, backend: str) -> ValuationFunctional:
        return ValuationFunctional(self.quadruple, backend, self.notes)


def integrand_terms(quad: GeneratorQuadruple, re, im, weights):
    """Per-cell contributions to the real and imaginary integrals.

    Returned as two arrays of length ``2 * ncells``: the ``h1``/``h2`` terms
    followed by the ``h3``/``h4`` terms, in cell order.
    """
    h1, h2, h3, h4 = quad
    re_terms = np.concatenate([h1(re) * weights, h3(im) * weights])
    im_terms = np.concatenate([h2(re) * weights, h4(im) * weights])
    return re_terms, im_terms


def _divergent_slots(quad: GeneratorQuadruple) -> tuple[str, ...]:
    return tuple(f"h{k}" for k, h in enumerate(quad, 1) if not check_zero(h))


def evaluate(phi: ValuationFunctional, f) -> Value:
    backend = getattr(f, "backend", None)
    if backend != phi.backend:
        raise BackendMismatchError(f"functional bound to {phi.backend!r} cannot evaluate a {backend!r} function")
    if f.infinite_total:
        slots = _divergent_slots(phi.quadruple)
        if slots:
            return Divergence("h(0) != 0 integrated over infinite measure", slots)
    re_terms, im_terms = integrand_terms(phi.quadruple, np.asarray(f.re), np.asarray(f.im), f.weights)
    return complex(accumulate(re_terms), accumulate(im_terms))


def evaluate_on_characteristic(phi: ValuationFunctional, c: complex, measure_e: float) -> complex:
    """Closed form of ``Phi(c * chi_E)`` for a set of measure ``measure_e``."""
    if measure_e < 0:
        raise ValueError("measure must be >= 0")
    h1, h2, h3, h4 = phi.quadruple
    a, b = complex(c).real, complex(c).imag
    return complex((h1(a) + h3(b)) * measure_e, (h2(a) + h4(b)) * measure_e)


def decompose_re_im(phi: ValuationFunctional):
    """Split into the real-valued functionals ``Re Phi`` and ``Im Phi``.

    Both are returned as valuation functionals whose imaginary part is
    identically zero, so ``Phi(f) = Phi1(f) + i Phi2(f)`` for every ``f``.
    """
    h1, h2, h3, h4 = phi.quadruple
    z = zero(phi.quadruple.p)
    phi1 = ValuationFunctional(GeneratorQuadruple(h1, z, h3, z), phi.backend)
    phi2 = ValuationFunctional(GeneratorQuadruple(h2, z, h4, z), phi.backend)
    return phi1, phi2


def rotate_to_imaginary(phi: ValuationFunctional) -> ValuationFunctional:
    """The functional ``f -> Phi(i f)``.

    Since ``i f = -Im f + i Re f``, this is the quadruple
    ``(h3, h4, h1(-.), h2(-.))``; it agrees with ``Phi(i f)`` for complex ``f``
    as well. On real ``f`` it reduces to ``int h3(f) + i int h4(f)`` only when
    ``h1(0) = h2(0) = 0``; otherwise a warning reports the constant per unit
    measure that the reduced form misses.
    """
    h1, h2, h3, h4 = phi.quadruple
    notes = ()
    if not (check_zero(h1) and check_zero(h2)):
        offset = complex(h1(0.0), h2(0.0))
        msg = f"reduced form misses constant {offset} per unit measure (h1(0), h2(0) != 0)"
        warnings.warn(msg, stacklevel=2)
        notes = (msg,)
    return ValuationFunctional(GeneratorQuadruple(h3, h4, h1.reflected(), h2.reflected()), phi.backend, notes)
