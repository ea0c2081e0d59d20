"""Seeded scenario runners that check valuation identities numerically.

Every runner returns a :class:`PropertyReport`. Random draws come from
``numpy.random.default_rng(seed)`` only, so ``(scenario, seed)`` fixes the
report bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import generators as gen
from . import lattice as lat
from .domains import rotate, translate
from .valuation import (Divergence, ValuationFunctional, decompose_re_im, evaluate,
                        evaluate_on_characteristic, integrand_terms, rotate_to_imaginary)

KINDS = (
    "valuation_law",
    "oracle_equivalence",
    "characteristic_formula",
    "re_im_split",
    "imaginary_rotation",
    "component_split",
    "times_i_lattice",
    "translation_invariance",
    "rotation_invariance",
    "continuity",
    "refinement_invariance",
    "necessity_growth",
    "necessity_delta_infinite",
)

EXACT_TOL = 1e-12
RESAMPLED_TOL = 1e-3


class ScenarioError(RuntimeError):
    pass


class InvalidScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    id: str
    kind: str
    seed: int = 0
    trials: int = 200
    tolerance: float | None = None
    params: dict = field(default_factory=dict)


@dataclass
class PropertyReport:
    scenario_id: str
    kind: str
    trials: int
    max_deviation: float
    tolerance: float
    passed: bool
    witness: list = field(default_factory=list)
    curve: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


# -- random inputs -------------------------------------------------------------

def random_partition(rng, min_cells: int = 1, max_cells: int = 64, infinite: bool = False):
    n = int(rng.integers(min_cells, max_cells + 1))
    return lat.make_partition(rng.uniform(0.01, 2.0, n).tolist(), infinite)


def random_function(rng, partition, value_range: float = 5.0, real: bool = False):
    n = len(partition)
    re = rng.uniform(-value_range, value_range, n)
    im = np.zeros(n) if real else rng.uniform(-value_range, value_range, n)
    return lat.from_parts(partition, re, im)


def _value(phi, f) -> complex:
    v = evaluate(phi, f)
    if isinstance(v, Divergence):
        raise ScenarioError(f"functional diverged: {v}")
    return v


def _rel(lhs: complex, rhs: complex, scale: float) -> float:
    diff = abs(lhs - rhs)
    return diff / scale if scale > 0 else diff


def valuation_defect(phi, f, g) -> float:
    """Relative defect of ``Phi(f v g) + Phi(f ^ g) = Phi(f) + Phi(g)``."""
    vals = [_value(phi, h) for h in (lat.join(f, g), lat.meet(f, g), f, g)]
    return _rel(vals[0] + vals[1], vals[2] + vals[3], sum(map(abs, vals)))


# -- four-set oracle ------------------------------------------------------------

_JOIN_PICK = {"E": ("g", "g"), "F": ("g", "f"), "G": ("f", "g"), "H": ("f", "f")}
_MEET_PICK = {"E": ("f", "f"), "F": ("f", "g"), "G": ("g", "f"), "H": ("g", "g")}


def four_set_reconstruction(phi: ValuationFunctional, f, g, which: str = "join"):
    """Rebuild ``Phi(f v g)`` (or ``Phi(f ^ g)``) from the E/F/G/H labels.

    On each labelled set the integrand takes its real-part argument and its
    imaginary-part argument from ``f`` or ``g`` according to the label, with
    no use of max/min. Returns ``(total, partials)``: ``total`` sums all cell
    terms with the engine's accumulator, ``partials`` maps each label to its
    own partial integral.
    """
    labels = lat.four_set_partition(f, g)
    pick = _JOIN_PICK if which == "join" else _MEET_PICK
    src = {"f": f, "g": g}
    re = np.empty(len(labels))
    im = np.empty(len(labels))
    for lab, (r_from, i_from) in pick.items():
        m = labels == lab
        re[m] = src[r_from].re[m]
        im[m] = src[i_from].im[m]
    w = f.weights
    re_terms, im_terms = integrand_terms(phi.quadruple, re, im, w)
    total = complex(lat.accumulate(re_terms), lat.accumulate(im_terms))
    partials = {}
    both = np.concatenate([labels, labels])
    for lab in lat.LABELS:
        m = both == lab
        partials[lab] = complex(lat.accumulate(re_terms[m]), lat.accumulate(im_terms[m]))
    return total, partials


def oracle_check(phi, f, g) -> tuple[bool, float]:
    """Bitwise comparison with direct evaluation, plus the grouped-sum defect."""
    bitwise = True
    worst = 0.0
    for which, op in (("join", lat.join), ("meet", lat.meet)):
        direct = _value(phi, op(f, g))
        total, partials = four_set_reconstruction(phi, f, g, which)
        bitwise &= (direct.real == total.real) and (direct.imag == total.imag)
        grouped = sum(partials.values())
        worst = max(worst, _rel(grouped, direct, abs(direct) + sum(map(abs, partials.values()))))
    return bitwise, worst


def run_oracle_equivalence(phi, f, g, scenario_id: str = "oracle_equivalence",
                           tolerance: float = EXACT_TOL) -> PropertyReport:
    bitwise, grouped = oracle_check(phi, f, g)
    labels = lat.four_set_partition(f, g)
    return PropertyReport(scenario_id, "oracle_equivalence", 1, 0.0 if bitwise else math.inf,
                          tolerance, bitwise and grouped <= tolerance,
                          details={"bitwise_equal": bitwise, "grouped_sum_deviation": grouped,
                                   "labels": labels.tolist()})


def run_oracle_trials(phi, trials: int, seed: int, scenario_id: str = "oracle_equivalence",
                      tolerance: float = EXACT_TOL, **draw) -> PropertyReport:
    rng = np.random.default_rng(seed)
    mismatches, worst_grouped = 0, 0.0
    for _ in range(trials):
        phi_t, f, g = _draw_pair(rng, phi, **draw)
        bitwise, grouped = oracle_check(phi_t, f, g)
        mismatches += not bitwise
        worst_grouped = max(worst_grouped, grouped)
    return PropertyReport(scenario_id, "oracle_equivalence", trials, float(mismatches), 0.0,
                          mismatches == 0 and worst_grouped <= tolerance,
                          details={"bitwise_mismatches": mismatches,
                                   "grouped_sum_deviation": worst_grouped})


# -- valuation law and friends ---------------------------------------------------

def _draw_pair(rng, phi=None, partition=None, min_cells=1, max_cells=64, value_range=5.0,
               refine=False, real=False, transform=None, p=None):
    phi_t = phi if phi is not None else ValuationFunctional(gen.random_quadruple(rng, p))
    if transform is not None:
        phi_t = transform(phi_t)
    part = partition if partition is not None else random_partition(rng, min_cells, max_cells)
    f = random_function(rng, part, value_range, real)
    g = random_function(rng, part, value_range, real)
    if refine:
        fine, parent = lat.refine(part, rng)
        f, g = lat.lift(f, fine, parent), lat.lift(g, fine, parent)
    return phi_t, f, g


def run_valuation_law(phi: ValuationFunctional | None, trials: int, seed: int,
                      scenario_id: str = "valuation_law", tolerance: float = EXACT_TOL,
                      oracle_every: int = 10, **draw) -> PropertyReport:
    """Check the valuation law on random pairs of simple functions.

    With ``phi=None`` each trial draws a fresh built-in quadruple. Every
    ``oracle_every``-th trial is also cross-checked against the four-set
    reconstruction.
    """
    rng = np.random.default_rng(seed)
    worst, mismatches, checked = 0.0, 0, 0
    for t in range(trials):
        phi_t, f, g = _draw_pair(rng, phi, **draw)
        worst = max(worst, valuation_defect(phi_t, f, g))
        if oracle_every and t % oracle_every == 0:
            checked += 1
            mismatches += not oracle_check(phi_t, f, g)[0]
    return PropertyReport(scenario_id, "valuation_law", trials, worst, tolerance,
                          worst <= tolerance and mismatches == 0,
                          details={"oracle_checked": checked, "oracle_mismatches": mismatches})


def run_characteristic(phi: ValuationFunctional | None, trials: int, seed: int,
                       scenario_id: str = "characteristic_formula", tolerance: float = EXACT_TOL,
                       value_range: float = 5.0, refine: bool = False) -> PropertyReport:
    """Closed form ``Phi(c chi_E)`` against direct evaluation.

    E is one cell of a random partition; the other cells carry 0.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        phi_t = phi if phi is not None else ValuationFunctional(gen.random_quadruple(rng))
        c = complex(*rng.uniform(-value_range, value_range, 2))
        part = random_partition(rng, 1, 8)
        cell = int(rng.integers(len(part)))
        f = lat.characteristic(part, [cell], c)
        m = float(part.measures[cell])
        if refine:
            fine, parent = lat.refine(part, rng)
            f = lat.lift(f, fine, parent)
        closed = evaluate_on_characteristic(phi_t, c, m)
        direct = _value(phi_t, f)
        worst = max(worst, _rel(direct, closed, abs(closed)))
    return PropertyReport(scenario_id, "characteristic_formula", trials, worst, tolerance, worst <= tolerance)


def _require_zero(phi):
    if phi is not None and not phi.quadruple.all_zero_at_zero:
        raise InvalidScenarioError("this check needs h_k(0) = 0 for all four generators")


def run_re_im_split(phi, trials, seed, scenario_id="re_im_split", tolerance=EXACT_TOL,
                    refine=False, **draw) -> PropertyReport:
    """``Phi(f) = Phi(Re f) + Phi(i Im f)`` on random complex ``f``."""
    _require_zero(phi)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        phi_t, f, _g = _draw_pair(rng, phi, refine=refine, **draw)
        a = _value(phi_t, f)
        b = _value(phi_t, lat.re_part(f))
        c = _value(phi_t, lat.times_i(lat.im_part(f)))
        worst = max(worst, _rel(a, b + c, abs(a) + abs(b) + abs(c)))
    return PropertyReport(scenario_id, "re_im_split", trials, worst, tolerance, worst <= tolerance)


def run_imaginary_rotation(phi, trials, seed, scenario_id="imaginary_rotation",
                           tolerance=EXACT_TOL, refine=False, **draw) -> PropertyReport:
    """``f -> Phi(i f)`` matches its materialized quadruple and is a valuation on real functions."""
    _require_zero(phi)
    rng = np.random.default_rng(seed)
    worst_id, worst_law = 0.0, 0.0
    for _ in range(trials):
        phi_t, f, g = _draw_pair(rng, phi, refine=refine, real=True, **draw)
        rot = rotate_to_imaginary(phi_t)
        a, b = _value(rot, f), _value(phi_t, lat.times_i(f))
        worst_id = max(worst_id, _rel(a, b, abs(a) + abs(b)))
        worst_law = max(worst_law, valuation_defect(rot, f, g))
    worst = max(worst_id, worst_law)
    return PropertyReport(scenario_id, "imaginary_rotation", trials, worst, tolerance, worst <= tolerance,
                          details={"identity_deviation": worst_id, "valuation_law_deviation": worst_law})


def run_component_split(phi, trials, seed, scenario_id="component_split",
                        tolerance=EXACT_TOL, refine=False, **draw) -> PropertyReport:
    """``Phi = Phi1 + i Phi2`` on real functions, with both parts real valuations."""
    _require_zero(phi)
    rng = np.random.default_rng(seed)
    worst_id, worst_law, imag_leak = 0.0, 0.0, 0.0
    for _ in range(trials):
        phi_t, f, g = _draw_pair(rng, phi, refine=refine, real=True, **draw)
        phi1, phi2 = decompose_re_im(phi_t)
        a, v1, v2 = _value(phi_t, f), _value(phi1, f), _value(phi2, f)
        imag_leak = max(imag_leak, abs(v1.imag), abs(v2.imag))
        worst_id = max(worst_id, _rel(a, complex(v1.real, v2.real), abs(a) + abs(v1) + abs(v2)))
        worst_law = max(worst_law, valuation_defect(phi1, f, g), valuation_defect(phi2, f, g))
    worst = max(worst_id, worst_law, imag_leak)
    return PropertyReport(scenario_id, "component_split", trials, worst, tolerance, worst <= tolerance,
                          details={"identity_deviation": worst_id, "valuation_law_deviation": worst_law,
                                   "imaginary_leak": imag_leak})


def _max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(a.values - b.values))) if len(a.values) else 0.0


def run_times_i_lattice(trials, seed, scenario_id="times_i_lattice", tolerance=0.0,
                        refine=False, **draw) -> PropertyReport:
    """``i(f v g) = if v ig`` and ``i(f ^ g) = if ^ ig`` for real ``f, g``.

    The same identities are also tried on complex inputs, where they fail in
    general; the count of complex counterexamples is recorded for reference.
    """
    rng = np.random.default_rng(seed)
    worst, complex_failures = 0.0, 0
    for _ in range(trials):
        _, f, g = _draw_pair(rng, ValuationFunctional(gen.quadruple()), refine=refine, real=True, **draw)
        ti = lat.times_i
        worst = max(worst,
                    _max_abs_diff(ti(lat.join(f, g)), lat.join(ti(f), ti(g))),
                    _max_abs_diff(ti(lat.meet(f, g)), lat.meet(ti(f), ti(g))))
        cf, cg = random_function(rng, f.partition), random_function(rng, f.partition)
        complex_failures += _max_abs_diff(ti(lat.join(cf, cg)), lat.join(ti(cf), ti(cg))) > 0
    return PropertyReport(scenario_id, "times_i_lattice", trials, worst, tolerance, worst <= tolerance,
                          details={"complex_input_counterexamples": complex_failures})


def run_refinement_invariance(phi, trials, seed, scenario_id="refinement_invariance",
                              tolerance=EXACT_TOL, **draw) -> PropertyReport:
    """Splitting cells leaves ``Phi`` and the L^p norm unchanged."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        phi_t, f, _g = _draw_pair(rng, phi, **draw)
        fine, parent = lat.refine(f.partition, rng)
        ff = lat.lift(f, fine, parent)
        a, b = _value(phi_t, f), _value(phi_t, ff)
        p = phi_t.quadruple.p
        na, nb = lat.lp_norm(f, p), lat.lp_norm(ff, p)
        worst = max(worst, _rel(a, b, abs(a)), _rel(na, nb, na))
    return PropertyReport(scenario_id, "refinement_invariance", trials, worst, tolerance, worst <= tolerance)


# -- continuity ------------------------------------------------------------------

def dyadic_rule(f, cells) -> Callable[[int], lat.SimpleFunction]:
    """``k -> f + 2^-k chi_E`` with E the union of ``cells``."""
    bump = lat.characteristic(f.partition, cells)
    return lambda k: lat.SimpleFunction(f.partition, f.values + 2.0 ** -k * bump.values)


def harmonic_rule(f, cells) -> Callable[[int], lat.SimpleFunction]:
    """``k -> f + (1/k) chi_E``."""
    bump = lat.characteristic(f.partition, cells)
    return lambda k: lat.SimpleFunction(f.partition, f.values + bump.values / k)


def run_continuity(phi, f, rule, steps: int, scenario_id: str = "continuity",
                   tolerance: float = 1e-8, p: float | None = None) -> PropertyReport:
    """Track ``|Phi(f_k) - Phi(f)|`` along a sequence ``f_k -> f`` in L^p.

    The sequence is rejected unless its L^p distances to ``f`` are
    nonincreasing and end below where they started.
    """
    p = phi.quadruple.p if p is None else p
    target = _value(phi, f)
    curve, dists = [], []
    for k in range(1, steps + 1):
        fk = rule(k)
        dists.append(lat.lp_norm(fk - f, p))
        curve.append(abs(_value(phi, fk) - target))
    shrinking = all(b <= a * (1 + 1e-12) for a, b in zip(dists, dists[1:]))
    if not shrinking or (dists[0] > 0 and not dists[-1] < dists[0]):
        raise InvalidScenarioError(f"sequence does not converge in L^{p}: distances {dists[:5]}...")
    return PropertyReport(scenario_id, "continuity", steps, curve[-1], tolerance, curve[-1] <= tolerance,
                          curve=curve, details={"lp_distances": dists})


# -- necessity -----------------------------------------------------------------

def default_steps(p: float) -> int:
    # enough steps for the L^p norm to fall by 10x: ||f_k||_p = k^(-1/p)
    return max(200, math.ceil(10 ** p) + 1)


def run_necessity_growth(p: float, steps: int | None = None, generator: gen.Generator | None = None,
                         expect: str = "diverge", scenario_id: str = "necessity_growth") -> PropertyReport:
    """Norm-shrinking sequence on which a too-fast generator blows up.

    ``f_k = a_k chi_{E_k}`` with ``a_k = k`` (``k^2`` when p = 1) and
    ``mu(E_k) = a_k^-p / k``, so ``||f_k||_p^p = 1/k``. With ``h(a) = |a|^(2p)``
    the values ``Phi(f_k) = a_k^p / k`` grow without bound. Divergence is
    witnessed when the last value exceeds 10x the first, is still not below
    the midpoint value, and the norm has dropped below a tenth of its start.
    """
    if not p >= 1:
        raise InvalidScenarioError("p must be >= 1")
    if expect not in ("diverge", "bounded"):
        raise InvalidScenarioError("expect must be 'diverge' or 'bounded'")
    steps = default_steps(p) if steps is None else int(steps)
    h = generator if generator is not None else gen.make_generator(
        "power", {"s": 1.0, "q": 2 * p}, p, gamma=1.0, delta=0.0)
    phi = ValuationFunctional(gen.quadruple(h.with_envelope(gen.Envelope(p, h.envelope.gamma, h.envelope.delta))))
    values, norms = [], []
    for k in range(1, steps + 1):
        a = float(k * k if p == 1 else k)
        part = lat.make_partition([a ** -p / k], infinite_total=True)
        fk = lat.constant(part, a)
        values.append(abs(_value(phi, fk)))
        norms.append(lat.lp_norm(fk, p))
    first, mid, last = values[0], values[math.ceil(steps / 2) - 1], values[-1]
    grows = last > 10 * first and last >= mid
    shrinks = norms[-1] < norms[0] / 10
    diverged = bool(grows and shrinks)
    ratio = last / first if first > 0 else (math.inf if last > 0 else 0.0)
    passed = diverged if expect == "diverge" else not diverged
    return PropertyReport(scenario_id, "necessity_growth", steps, ratio, 10.0, passed,
                          witness=values, details={"lp_norms": norms, "diverged": diverged,
                                                   "expect": expect, "generator": h.to_literal()})


def run_necessity_delta_infinite(generator: gen.Generator, expect: str | None = None,
                                 scenario_id: str = "necessity_delta_infinite") -> PropertyReport:
    """Evaluate with ``generator`` in each slot on an infinite-measure space.

    Divergence must be reported exactly when ``h(0) != 0`` (or as ``expect``
    dictates, if given).
    """
    want = (not gen.check_zero(generator)) if expect is None else expect == "diverge"
    part = lat.make_partition([1.0], infinite_total=True)
    f = lat.constant(part, 1 + 1j)
    z = gen.zero(generator.p)
    outcomes = []
    for slot in range(4):
        slots = [z, z, z, z]
        slots[slot] = generator
        v = evaluate(ValuationFunctional(gen.GeneratorQuadruple(*slots)), f)
        outcomes.append(isinstance(v, Divergence))
    passed = all(o == want for o in outcomes)
    return PropertyReport(scenario_id, "necessity_delta_infinite", 4, float(sum(o != want for o in outcomes)),
                          0.0, passed, witness=outcomes,
                          details={"h_at_zero": generator(0.0), "expected_divergence": want})


# -- invariance ------------------------------------------------------------------

def run_invariance(phi, action: str, arg, f, tolerance: float | None = None,
                   scenario_id: str | None = None) -> PropertyReport:
    """``|Phi(action f) - Phi(f)|`` for a translation vector or rotation matrix."""
    if action == "translation":
        g = translate(f, arg)
    elif action == "rotation":
        g = rotate(f, arg)
    else:
        raise InvalidScenarioError(f"unknown action {action!r}")
    kind = f"{action}_invariance"
    tol = tolerance if tolerance is not None else (RESAMPLED_TOL if g.resampled else EXACT_TOL)
    dev = abs(_value(phi, g) - _value(phi, f))
    return PropertyReport(scenario_id or kind, kind, 1, dev, tol, dev <= tol,
                          details={"resampled": g.resampled})
