"""Generator functions h: R -> R with growth envelopes.

Generators come from a closed set of families so they can be written to and
read from configs:

``power``            ``s * sign(a)**e * |a|**q``   (q > 0, e in {0, 1})
``polynomial``       ``sum_k c[k] * a**k``
``sine``             ``s * sin(w * a)``
``affine_const``     ``c``
``piecewise_linear`` linear interpolation through sorted breakpoints,
                     extrapolated linearly past both ends

Each generator carries an envelope ``(p, gamma, delta)`` asserting
``|h(a)| <= gamma * |a|**p + delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

FAMILIES = ("power", "polynomial", "sine", "affine_const", "piecewise_linear")


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class Envelope:
    p: float
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.p >= 1:
            raise GeneratorError(f"envelope exponent p must be >= 1, got {self.p}")
        if self.gamma < 0 or self.delta < 0:
            raise GeneratorError("envelope constants gamma, delta must be >= 0")

    def bound(self, a):
        return self.gamma * np.abs(a) ** self.p + self.delta


def _normalize(family: str, params: Mapping[str, Any]) -> tuple:
    """Validate family parameters and return them as a hashable tuple."""
    try:
        if family == "power":
            s, q, e = float(params.get("s", 1.0)), float(params["q"]), int(params.get("e", 0))
            if q <= 0 or e not in (0, 1):
                raise GeneratorError("power needs q > 0 and e in {0, 1}")
            return (("s", s), ("q", q), ("e", e))
        if family == "polynomial":
            coeffs = tuple(float(c) for c in params["coeffs"])
            if not coeffs:
                raise GeneratorError("polynomial needs at least one coefficient")
            return (("coeffs", coeffs),)
        if family == "sine":
            return (("s", float(params.get("s", 1.0))), ("w", float(params.get("w", 1.0))))
        if family == "affine_const":
            return (("c", float(params["c"])),)
        if family == "piecewise_linear":
            pts = tuple((float(x), float(y)) for x, y in params["points"])
            xs = [x for x, _ in pts]
            if len(pts) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise GeneratorError("piecewise_linear needs >= 2 strictly increasing breakpoints")
            return (("points", pts),)
    except KeyError as exc:
        raise GeneratorError(f"{family}: missing parameter {exc}") from None
    raise GeneratorError(f"unknown generator family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class Generator:
    family: str
    params: tuple
    envelope: Envelope = field(default_factory=lambda: Envelope(1.0))
    claims_zero_at_zero: bool = True

    def __post_init__(self):
        object.__setattr__(self, "params", _normalize(self.family, dict(self.params)))
        if self.claims_zero_at_zero and self(0.0) != 0.0:
            raise GeneratorError(f"{self.family} generator claims h(0) = 0 but h(0) = {self(0.0)}")

    @property
    def kw(self) -> dict:
        return dict(self.params)

    @property
    def p(self) -> float:
        return self.envelope.p

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        kw = self.kw
        fam = self.family
        if fam == "power":
            out = kw["s"] * np.abs(a) ** kw["q"]
            if kw["e"] == 1:
                out = np.sign(a) * out
        elif fam == "polynomial":
            out = np.zeros_like(a)
            for c in reversed(kw["coeffs"]):
                out = out * a + c
        elif fam == "sine":
            out = kw["s"] * np.sin(kw["w"] * a)
        elif fam == "affine_const":
            out = np.full_like(a, kw["c"])
        else:
            out = _pwl(kw["points"], a)
        return out if out.ndim else float(out)

    def reflected(self) -> Generator:
        """The generator ``a -> h(-a)``, within the same family."""
        kw = self.kw
        fam = self.family
        if fam == "power":
            params = {**kw, "s": kw["s"] * (-1) ** kw["e"]}
        elif fam == "polynomial":
            params = {"coeffs": [c if k % 2 == 0 else -c for k, c in enumerate(kw["coeffs"])]}
        elif fam == "sine":
            params = {**kw, "s": -kw["s"]}
        elif fam == "affine_const":
            params = kw
        else:
            params = {"points": [(-x, y) for x, y in reversed(kw["points"])]}
        return Generator(fam, params, self.envelope, self.claims_zero_at_zero)

    def with_envelope(self, envelope: Envelope) -> Generator:
        return Generator(self.family, self.params, envelope, self.claims_zero_at_zero)

    def to_literal(self) -> dict:
        kw = self.kw
        if self.family == "polynomial":
            kw = {"coeffs": list(kw["coeffs"])}
        elif self.family == "piecewise_linear":
            kw = {"points": [list(pt) for pt in kw["points"]]}
        return {"family": self.family, "params": kw, "p": self.envelope.p,
                "gamma": self.envelope.gamma, "delta": self.envelope.delta}


def _pwl(points, a):
    xs = np.array([x for x, _ in points])
    ys = np.array([y for _, y in points])
    # segment index, clipped so the end segments extrapolate
    j = np.clip(np.searchsorted(xs, a, side="right") - 1, 0, len(xs) - 2)
    x0, x1, y0, y1 = xs[j], xs[j + 1], ys[j], ys[j + 1]
    return y0 + (y1 - y0) * ((a - x0) / (x1 - x0))


def fit_envelope(family: str, params: Mapping[str, Any], p: float) -> Envelope | None:
    """A valid ``(gamma, delta)`` for the family at exponent ``p``.

    Returns None when no envelope of order ``p`` exists (e.g. ``|a|**q`` with
    ``q > p``). ``delta`` is 0 whenever the family allows it.
    """
    kw = dict(_normalize(family, params))
    if family == "power":
        s, q = abs(kw["s"]), kw["q"]
        if q > p:
            return None
        # |a|^q <= |a|^p + 1 for q <= p
        return Envelope(p, s, 0.0 if q == p else s)
    if family == "polynomial":
        coeffs = kw["coeffs"]
        if len(coeffs) - 1 > p and any(coeffs[int(np.floor(p)) + 1:]):
            return None
        gamma = sum(abs(c) for k, c in enumerate(coeffs) if k >= 1)
        delta = sum(abs(c) for k, c in enumerate(coeffs) if k != p)
        return Envelope(p, gamma, delta)
    if family == "sine":
        s, w = abs(kw["s"]), abs(kw["w"])
        if p == 1:
            return Envelope(p, s * w, 0.0)
        return Envelope(p, 0.0, s)
    if family == "affine_const":
        return Envelope(p, 0.0, abs(kw["c"]))
    pts = kw["points"]
    slopes = [abs((y1 - y0) / (x1 - x0)) for (x0, y0), (x1, y1) in zip(pts, pts[1:])]
    lip, h0 = max(slopes), abs(float(_pwl(pts, np.float64(0.0))))
    if p == 1:
        return Envelope(p, lip, h0)
    return Envelope(p, lip, lip + h0)


def make_generator(family: str, params: Mapping[str, Any], p: float = 1.0,
                   gamma: float | None = None, delta: float | None = None) -> Generator:
    """Build a generator; missing envelope constants are fitted automatically."""
    norm = _normalize(family, params)
    if gamma is None or delta is None:
        fit = fit_envelope(family, dict(norm), p)
        if fit is None:
            raise GeneratorError(
                f"{family} {dict(norm)} grows faster than |a|^{p}; give gamma and delta explicitly")
        gamma = fit.gamma if gamma is None else gamma
        delta = fit.delta if delta is None else delta
    probe = Generator(family, norm, Envelope(p, gamma, delta), claims_zero_at_zero=False)
    return Generator(family, norm, probe.envelope, claims_zero_at_zero=check_zero(probe))


def power(q: float, s: float = 1.0, e: int = 0, p: float | None = None, **env) -> Generator:
    return make_generator("power", {"s": s, "q": q, "e": e}, p if p is not None else max(q, 1.0), **env)


def polynomial(coeffs, p: float = 1.0, **env) -> Generator:
    return make_generator("polynomial", {"coeffs": list(coeffs)}, p, **env)


def sine(s: float = 1.0, w: float = 1.0, p: float = 1.0, **env) -> Generator:
    return make_generator("sine", {"s": s, "w": w}, p, **env)


def affine_const(c: float, p: float = 1.0, **env) -> Generator:
    return make_generator("affine_const", {"c": c}, p, **env)


def piecewise_linear(points, p: float = 1.0, **env) -> Generator:
    return make_generator("piecewise_linear", {"points": [tuple(pt) for pt in points]}, p, **env)


def zero(p: float = 1.0) -> Generator:
    return power(1.0, s=0.0, p=p)


def eval_generator(h: Generator, a):
    return h(a)


def check_zero(h: Generator) -> bool:
    return h(0.0) == 0.0


@dataclass(frozen=True)
class EnvelopeReport:
    consistent: bool
    worst_point: float | None
    worst_violation: float

    @property
    def status(self) -> str:
        # sampling can only falsify an envelope
        return "consistent" if self.consistent else "violated"


def validate_envelope(h: Generator, sample_points, rel_slack: float = 1e-12) -> EnvelopeReport:
    a = np.asarray(sample_points, dtype=float).ravel()
    if a.size == 0:
        raise GeneratorError("validate_envelope needs at least one sample point")
    mag, bound = np.abs(h(a)), h.envelope.bound(a)
    excess = mag - bound
    k = int(np.argmax(excess))
    # ignore excess at rounding level when the bound is attained with equality
    if excess[k] > rel_slack * (mag[k] + bound[k]):
        return EnvelopeReport(False, float(a[k]), float(excess[k]))
    return EnvelopeReport(True, None, 0.0)


@dataclass(frozen=True)
class GeneratorQuadruple:
    h1: Generator
    h2: Generator
    h3: Generator
    h4: Generator

    def __post_init__(self):
        ps = {h.p for h in self}
        if len(ps) != 1:
            raise GeneratorError(f"all four generators must share p, got {sorted(ps)}")

    def __iter__(self):
        return iter((self.h1, self.h2, self.h3, self.h4))

    @property
    def p(self) -> float:
        return self.h1.p

    @property
    def all_zero_at_zero(self) -> bool:
        return all(check_zero(h) for h in self)

    @property
    def has_delta(self) -> bool:
        return any(h.envelope.delta > 0 for h in self)


def quadruple(h1=None, h2=None, h3=None, h4=None, p: float | None = None) -> GeneratorQuadruple:
    """Quadruple with unspecified slots set to the zero generator at the shared p."""
    given = [h for h in (h1, h2, h3, h4) if h is not None]
    if p is None:
        p = given[0].p if given else 1.0
    return GeneratorQuadruple(*(h if h is not None else zero(p) for h in (h1, h2, h3, h4)))


def random_generator(rng: np.random.Generator, p: float = 2.0, zero_at_zero: bool = True) -> Generator:
    """Draw a built-in generator with a valid envelope of order ``p``."""
    fams = ["power", "polynomial", "sine", "piecewise_linear"]
    if not zero_at_zero:
        fams.append("affine_const")
    fam = fams[int(rng.integers(len(fams)))]
    if fam == "power":
        q = float(rng.uniform(0.5, p))
        return power(q, s=float(rng.uniform(-2, 2)), e=int(rng.integers(2)), p=p)
    if fam == "polynomial":
        deg = int(np.floor(p))
        coeffs = [0.0] + rng.uniform(-1.5, 1.5, deg).tolist()
        if not zero_at_zero:
            coeffs[0] = float(rng.uniform(-1, 1))
        return polynomial(coeffs, p=p)
    if fam == "sine":
        return sine(float(rng.uniform(-2, 2)), float(rng.uniform(-3, 3)), p=p)
    if fam == "affine_const":
        return affine_const(float(rng.uniform(-2, 2)), p=p)
    xs = np.sort(rng.uniform(-6, 6, 4))
    ys = rng.uniform(-3, 3, 4)
    pts = sorted(set(map(float, xs)) | {0.0})
    yv = np.interp(pts, xs, ys).tolist()
    if zero_at_zero:
        yv[pts.index(0.0)] = 0.0
    return piecewise_linear(list(zip(pts, yv)), p=p)


def random_quadruple(rng: np.random.Generator, p: float | None = None,
                     zero_at_zero: bool = True) -> GeneratorQuadruple:
    if p is None:
        p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    return GeneratorQuadruple(*(random_generator(rng, p, zero_at_zero) for _ in range(4)))
