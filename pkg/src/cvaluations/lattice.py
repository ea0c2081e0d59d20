"""Measured partitions, complex simple functions and the complex lattice.

A :class:`MeasuredPartition` is a finite family of disjoint cells with positive
measures. Setting ``infinite_total`` models a space of infinite total measure:
an implicit remainder cell of infinite measure is attached on which every
function takes the value 0.

Complex functions are ordered componentwise, so join and meet act on the real
and imaginary parts independently::

    f v g = max(Re f, Re g) + i max(Im f, Im g)
    f ^ g = min(Re f, Re g) + i min(Im f, Im g)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_ids = itertools.count()


class InvalidMeasureError(ValueError):
    pass


class IncompatibleDomainError(ValueError):
    pass


class InvalidExponentError(ValueError):
    pass


def accumulate(terms: Iterable[float]) -> float:
    """Error-free accumulation of ``terms``, correctly rounded.

    Backed by :func:`math.fsum` (Shewchuk's exact partial sums), so the result
    does not depend on the order of the terms.
    """
    return math.fsum(terms)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MeasuredPartition:
    cell_ids: tuple[int, ...]
    measures: np.ndarray
    infinite_total: bool = False

    def __post_init__(self):
        m = np.asarray(self.measures, dtype=float)
        if m.ndim != 1 or m.size == 0:
            raise InvalidMeasureError("a partition needs at least one cell")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise InvalidMeasureError(f"cell measures must be finite and > 0, got {m.tolist()}")
        if len(self.cell_ids) != m.size or len(set(self.cell_ids)) != m.size:
            raise InvalidMeasureError("cell ids must be unique, one per cell")
        object.__setattr__(self, "measures", _frozen(m.copy()))

    def __len__(self) -> int:
        return self.measures.size

    @property
    def total_measure(self) -> float:
        """Measure of the listed cells; the remainder (if any) is not included."""
        return accumulate(self.measures)

    def __repr__(self):
        tail = ", infinite_total=True" if self.infinite_total else ""
        return f"MeasuredPartition({self.measures.tolist()}{tail})"


def make_partition(measures: Sequence[float], infinite_total: bool = False) -> MeasuredPartition:
    measures = list(measures)
    ids = tuple(next(_ids) for _ in measures)
    return MeasuredPartition(ids, np.asarray(measures, dtype=float), bool(infinite_total))


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """One complex value per cell of ``partition``.

    Values are kept as a read-only ``complex128`` array; the real and
    imaginary parts are exact doubles.
    """

    partition: MeasuredPartition
    values: np.ndarray = field(repr=False)

    backend = "simple"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (len(self.partition),):
            raise IncompatibleDomainError(
                f"expected {len(self.partition)} values, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v.copy()))

    @property
    def re(self) -> np.ndarray:
        return self.values.real

    @property
    def im(self) -> np.ndarray:
        return self.values.imag

    @property
    def weights(self) -> np.ndarray:
        return self.partition.measures

    @property
    def infinite_total(self) -> bool:
        return self.partition.infinite_total

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def __add__(self, other: SimpleFunction) -> SimpleFunction:
        _check_same(self, other)
        return SimpleFunction(self.partition, self.values + other.values)

    def __neg__(self) -> SimpleFunction:
        return SimpleFunction(self.partition, -self.values)

    def __sub__(self, other: SimpleFunction) -> SimpleFunction:
        _check_same(self, other)
        return SimpleFunction(self.partition, self.values - other.values)

    def equals(self, other: SimpleFunction) -> bool:
        return self.partition is other.partition and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"SimpleFunction({self.values.tolist()})"


def from_parts(partition: MeasuredPartition, re, im=None) -> SimpleFunction:
    re = np.asarray(re, dtype=float)
    im = np.zeros_like(re) if im is None else np.asarray(im, dtype=float)
    v = np.empty(re.shape, dtype=complex)
    v.real, v.imag = re, im
    return SimpleFunction(partition, v)


def constant(partition: MeasuredPartition, c: complex) -> SimpleFunction:
    return SimpleFunction(partition, np.full(len(partition), complex(c)))


def characteristic(partition: MeasuredPartition, cells, c: complex = 1.0) -> SimpleFunction:
    """``c`` times the indicator of the union of ``cells`` (indices)."""
    v = np.zeros(len(partition), dtype=complex)
    v[np.asarray(cells, dtype=int)] = complex(c)
    return SimpleFunction(partition, v)


def _check_same(f: SimpleFunction, g: SimpleFunction):
    if f.partition is not g.partition:
        raise IncompatibleDomainError("functions live on different partitions")


def join(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    _check_same(f, g)
    return from_parts(f.partition, np.maximum(f.re, g.re), np.maximum(f.im, g.im))


def meet(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    _check_same(f, g)
    return from_parts(f.partition, np.minimum(f.re, g.re), np.minimum(f.im, g.im))


def re_part(f: SimpleFunction) -> SimpleFunction:
    return from_parts(f.partition, f.re)


def im_part(f: SimpleFunction) -> SimpleFunction:
    return from_parts(f.partition, f.im)


def times_i(f: SimpleFunction) -> SimpleFunction:
    # (re, im) -> (-im, re); built from parts to avoid complex multiply rounding
    return from_parts(f.partition, -f.im, f.re)


def lp_norm(f: SimpleFunction, p: float) -> float:
    if not p >= 1:
        raise InvalidExponentError(f"p must be >= 1, got {p}")
    mod = np.hypot(f.re, f.im)
    return accumulate(mod ** p * f.partition.measures) ** (1.0 / p)


LABELS = ("E", "F", "G", "H")


def four_set_partition(f: SimpleFunction, g: SimpleFunction) -> np.ndarray:
    """Label each cell by how ``f`` compares with ``g`` componentwise.

    ==== ================================
    E    Re f <= Re g and Im f <= Im g
    F    Re f <= Re g and Im f >  Im g
    G    Re f >  Re g and Im f <= Im g
    H    Re f >  Re g and Im f >  Im g
    ==== ================================

    Ties fall on the ``<=`` side. Returns an array of single-letter labels.
    """
    _check_same(f, g)
    re_gt = f.re > g.re
    im_gt = f.im > g.im
    idx = 2 * re_gt.astype(int) + im_gt.astype(int)
    return np.asarray(LABELS)[idx]


def refine(partition: MeasuredPartition, rng: np.random.Generator,
           min_parts: int = 2, max_parts: int = 4):
    """Split every cell into ``min_parts..max_parts`` random subcells.

    Returns ``(fine, parent)`` where ``parent[j]`` is the index of the coarse
    cell containing fine cell ``j``. Use :func:`lift` to carry functions over.
    """
    m = partition.measures
    ks = rng.integers(min_parts, max_parts + 1, size=m.size)
    parent = np.repeat(np.arange(m.size), ks)
    starts = np.concatenate([[0], np.cumsum(ks)[:-1]])
    last = starts + ks - 1
    # normalized exponentials are a flat Dirichlet draw per cell
    e = rng.exponential(size=parent.size)
    sub = m[parent] * (e / np.add.reduceat(e, starts)[parent])
    sub[last] = 0.0
    sub[last] = m - np.add.reduceat(sub, starts)
    for i in np.flatnonzero(sub[last] <= 0):
        sub[starts[i]:last[i] + 1] = m[i] / ks[i]
    fine = make_partition(sub.tolist(), partition.infinite_total)
    return fine, parent


def lift(f: SimpleFunction, fine: MeasuredPartition, parent: np.ndarray) -> SimpleFunction:
    return SimpleFunction(fine, f.values[parent])
