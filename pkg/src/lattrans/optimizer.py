"""Exhaustive search for optimal lattice transformations.

Every transformation between the lattices generated by F and G has the
form H = G mu F^-1 with mu a determinant-one integer matrix.  The search
minimises the strain distance of H to the identity over mu.  A finite,
certified search radius comes from the stretch-ratio bound: writing
s = |r| and m0 for any achievable distance (by default the distance of
G F^-1 itself),

    r > 0:  |mu|_cols**s  <= (|F|_cols**s / nu_min(G)**s) * (m0 + 1)
    r < 0:  |mu^-1|_cols**s <= (|G|_cols**s / nu_min(F)**s) * (m0 + 1)

where |.|_cols is the column-max norm.  Any integer matrix outside the
entry box [-k, k] has a column of squared norm at least (k+1)**2 + 1
(a column (k+1, 0, 0) would force the determinant to be divisible by
k+1), so the smallest k whose exclusion threshold exceeds the bound
certifies the search.  Negative exponents bound the inverse instead, so
those searches enumerate the box and invert exactly.

Candidate evaluation is pure and partitioned into blocks; the fold that
merges block results is associative and merged in block order, so
reports are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import BudgetExceeded, NotRightHanded, SingularMatrix
from .lattice import cubic_point_group
from .matrix3 import SymMatrix3, as_matrix3, det, frobenius, inverse, norms, singular_values, spd_power
from .metrics import StrainMetric, distance_to_identity, distance_to_identity_many, tie_tolerance
from .unimodular import (
    DEFAULT_GUARD,
    MATERIALIZE_MAX_K,
    _box_triples,
    _row_block,
    integer_inverse_batch,
    materialize_slk,
)

#: Two transformations share an equivalence class when their Cauchy-Green
#: tensors agree to this relative tolerance (looser than the distance tie
#: tolerance because stretches compound rounding through the square root).
CLASS_REL_TOL = 1e-6

#: Integrality tolerance when conjugating correspondences by point-group
#: rotations.
ORBIT_INT_TOL = 1e-6

#: Level histograms keep at most this many distinct distance levels.
MAX_LEVELS = 64

_SLAB = 1 << 16


@dataclass(frozen=True)
class SearchBound:
    """Certified finite search radius for one problem.

    ``side`` is "direct" when the entry box bounds mu itself (r > 0) and
    "inverse" when it bounds mu^-1 (r < 0).  ``raw_bound`` is the right
    side of the bound above, constraining the column-max norm to the
    power s.
    """

    k: int
    m0: float
    raw_bound: float
    side: str


class Minimizer(NamedTuple):
    mu: np.ndarray
    h: np.ndarray


@dataclass
class StretchClass:
    """One equivalence class of minimizers modulo rotation."""

    stretch: SymMatrix3
    principal_stretches: tuple
    members: list[int]


@dataclass
class OptimalityReport:
    parent: np.ndarray
    product: np.ndarray
    metric: StrainMetric
    bound: SearchBound
    k_used: int
    certified: bool
    minimizers: list[Minimizer]
    classes: list[StretchClass]
    m_min: float
    m_second: float | None
    gap: float | None
    tie_unresolved: bool
    candidates: int = 0


@dataclass
class _Fold:
    """Associative partial result of scanning candidate blocks."""

    m_min: float = math.inf
    mus: np.ndarray = field(default_factory=lambda: np.empty((0, 3, 3), dtype=np.int64))
    hs: np.ndarray = field(default_factory=lambda: np.empty((0, 3, 3)))
    ds: np.ndarray = field(default_factory=lambda: np.empty(0))
    m_second: float = math.inf
    count: int = 0
    levels: list | None = None


def _merge_levels(a: list, b: list) -> list:
    pairs = sorted(a + b)
    out = []
    for value, count in pairs:
        if out and value - out[-1][0] <= tie_tolerance(out[-1][0]):
            out[-1][1] += count
        else:
            out.append([value, count])
    return [tuple(p) for p in out[:MAX_LEVELS]]


def _block_levels(d: np.ndarray) -> list:
    ds = np.sort(d)
    if ds.size == 0:
        return []
    gap = np.diff(ds) > tie_tolerance(ds[:-1])
    starts = np.r_[0, np.nonzero(gap)[0] + 1]
    counts = np.diff(np.r_[starts, ds.size])
    return [(float(ds[i]), int(c)) for i, c in zip(starts[:MAX_LEVELS], counts[:MAX_LEVELS])]


def _fold_block(mus: np.ndarray, hs: np.ndarray, d: np.ndarray, want_levels: bool) -> _Fold:
    m_min = float(d.min())
    band = m_min + tie_tolerance(m_min)
    keep = d <= band
    above = d[~keep]
    return _Fold(
        m_min=m_min,
        mus=mus[keep],
        hs=hs[keep],
        ds=d[keep],
        m_second=float(above.min()) if above.size else math.inf,
        count=int(d.size),
        levels=_block_levels(d) if want_levels else None,
    )


def _merge(a: _Fold, b: _Fold) -> _Fold:
    if b.count == 0:
        return a
    if a.count == 0:
        return b
    m_min = min(a.m_min, b.m_min)
    band = m_min + tie_tolerance(m_min)
    mus = np.concatenate([a.mus, b.mus])
    hs = np.concatenate([a.hs, b.hs])
    ds = np.concatenate([a.ds, b.ds])
    keep = ds <= band
    dropped = ds[~keep]
    second = min(a.m_second, b.m_second)
    if dropped.size:
        second = min(second, float(dropped.min()))
    levels = None
    if a.levels is not None and b.levels is not None:
        levels = _merge_levels(a.levels, b.levels)
    return _Fold(
        m_min=m_min,
        mus=mus[keep],
        hs=hs[keep],
        ds=ds[keep],
        m_second=second,
        count=a.count + b.count,
        levels=levels,
    )


def _require_generator(m, name: str) -> np.ndarray:
    a = as_matrix3(m)
    d = det(a)
    if abs(d) <= 1e-12 * frobenius(a) ** 3:
        raise SingularMatrix(f"{name} generator is singular to working precision")
    if d < 0.0:
        raise NotRightHanded(f"{name} generator must have positive determinant")
    return a


def search_bound(f, g, metric: StrainMetric, incumbent: float | None = None) -> SearchBound:
    """Smallest certified entry-box radius containing every optimum.

    ``incumbent`` may supply a better (achievable) distance than the
    default m0 = distance of G F^-1 to the identity, shrinking the
    radius without losing any minimizer.
    """
    f = _require_generator(f, "parent")
    g = _require_generator(g, "product")
    s = abs(metric.r)
    m0 = distance_to_identity(g @ inverse(f), metric)
    m0_eff = m0 if incumbent is None else min(m0, incumbent)
    if metric.r > 0:
        num = norms(f).col_max
        den = singular_values(g).nu3
        side = "direct"
    else:
        num = norms(g).col_max
        den = singular_values(f).nu3
        side = "inverse"
    raw = (num / den) ** s * (m0_eff + 1.0)
    limit = raw ** (1.0 / s)
    k = 1
    while math.hypot(k + 1.0, 1.0) <= limit:
        k += 1
    return SearchBound(k=k, m0=m0, raw_bound=raw, side=side)


def _candidate_tasks(k: int, guard: int):
    """Block descriptors whose boundaries do not depend on worker count."""
    if k > guard:
        raise BudgetExceeded(f"search radius k={k} exceeds the practical guard {guard}")
    if k <= MATERIALIZE_MAX_K:
        cached = materialize_slk(k)
        return [("slab", cached[i : i + _SLAB]) for i in range(0, cached.shape[0], _SLAB)]
    return [("row", r1, k) for r1 in _box_triples(k)]


def _task_block(task) -> np.ndarray:
    if task[0] == "slab":
        return task[1]
    _, r1, k = task
    block, _ = _row_block(r1, k)
    return block


def _scan(f, g, metric: StrainMetric, k: int, side: str, workers: int, guard: int,
          want_levels: bool) -> _Fold:
    finv = inverse(f)
    tasks = _candidate_tasks(k, guard)

    def work(task) -> _Fold:
        nus = _task_block(task)
        if nus.shape[0] == 0:
            return _Fold(levels=[] if want_levels else None)
        mus = integer_inverse_batch(nus) if side == "inverse" else nus
        hs = (g @ mus.astype(float)) @ finv
        d = distance_to_identity_many(hs, metric)
        return _fold_block(mus, hs, d, want_levels)

    total = _Fold(levels=[] if want_levels else None)
    if workers <= 1:
        for task in tasks:
            total = _merge(total, work(task))
        return total
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(work, tasks):
            total = _merge(total, part)
    return total


def solve(f, g, metric: StrainMetric, *, k: int | None = None, workers: int = 1,
          guard: int = DEFAULT_GUARD, incumbent: float | None = None,
          hint_mus: Iterable | None = None) -> OptimalityReport:
    """Find every optimal lattice transformation from L(F) to L(G).

    The search radius comes from :func:`search_bound` unless ``k`` forces
    one; a forced radius smaller than the certified one is honoured but
    the report is marked uncertified.  ``hint_mus`` supplies candidate
    correspondences whose (exactly evaluated) distances shrink the bound;
    ``incumbent`` does the same with a caller-known achievable distance.
    """
    f = _require_generator(f, "parent")
    g = _require_generator(g, "product")
    finv = inverse(f)

    best_known = incumbent
    if hint_mus is not None:
        for mu in hint_mus:
            mu = np.asarray(mu, dtype=np.int64)
            d_hint = distance_to_identity(g @ mu.astype(float) @ finv, metric)
            best_known = d_hint if best_known is None else min(best_known, d_hint)

    bound = search_bound(f, g, metric, incumbent=best_known)
    k_used = bound.k if k is None else int(k)
    certified = k_used >= bound.k

    fold = _scan(f, g, metric, k_used, bound.side, workers, guard, want_levels=False)
    if fold.count == 0:
        raise RuntimeError("candidate enumeration produced no matrices")

    order = np.lexsort(tuple(fold.mus.reshape(-1, 9).T[::-1]))
    mus = fold.mus[order]
    hs = fold.hs[order]
    minimizers = [Minimizer(mu=mus[i].copy(), h=hs[i].copy()) for i in range(mus.shape[0])]

    classes = group_classes([m.h for m in minimizers])
    m_min = fold.m_min
    m_second = None if math.isinf(fold.m_second) else fold.m_second
    gap = None if m_second is None else m_second - m_min
    tie_unresolved = gap is not None and gap <= tie_tolerance(m_min)

    return OptimalityReport(
        parent=f,
        product=g,
        metric=metric,
        bound=bound,
        k_used=k_used,
        certified=certified,
        minimizers=minimizers,
        classes=classes,
        m_min=m_min,
        m_second=m_second,
        gap=gap,
        tie_unresolved=tie_unresolved,
        candidates=fold.count,
    )


def ranked_distances(f, g, metric: StrainMetric, k: int, *, workers: int = 1,
                     guard: int = DEFAULT_GUARD) -> list[tuple[float, int]]:
    """Distinct distance levels over the radius-k box, with multiplicities.

    Ascending; index 0 is the ground level, index 1 the first excited
    level.  Levels are grouped at the tie tolerance and capped at
    MAX_LEVELS.
    """
    f = _require_generator(f, "parent")
    g = _require_generator(g, "product")
    side = "direct" if metric.r > 0 else "inverse"
    fold = _scan(f, g, metric, k, side, workers, guard, want_levels=True)
    return list(fold.levels or [])


def group_classes(transformations, tol: float = CLASS_REL_TOL) -> list[StretchClass]:
    """Partition transformations into classes with equal stretch.

    Two transformations are equivalent (differ by a rotation) exactly
    when their Cauchy-Green tensors H^T H agree; the comparison is
    Frobenius with relative tolerance ``tol``.  Each class carries the
    symmetric stretch factor of its first member.
    """
    classes: list[StretchClass] = []
    grams: list[np.ndarray] = []
    for idx, h in enumerate(transformations):
        h = as_matrix3(h)
        gram = h.T @ h
        for ci, ref in enumerate(grams):
            if frobenius(gram - ref) <= tol * (1.0 + frobenius(ref)):
                classes[ci].members.append(idx)
                break
        else:
            stretch = spd_power(SymMatrix3.from_array(gram), 0.5)
            nu = singular_values(h)
            classes.append(
                StretchClass(stretch=stretch, principal_stretches=tuple(nu), members=[idx])
            )
            grams.append(gram)
    return classes


class OrbitResult(NamedTuple):
    mus: list
    dropped: int


def point_group_orbit(mu0, f, g, tol: float = ORBIT_INT_TOL) -> OrbitResult:
    """Correspondences generated from mu0 by cubic point-group actions.

    Conjugates mu0 by all pairs of cube rotations expressed in the two
    lattice bases: mu = (G^-1 P G) mu0 (F^-1 Q F).  Candidates that do
    not round to an integer matrix of determinant one (rotations outside
    a lattice's point group) are dropped and counted.
    """
    mu0 = np.asarray(mu0, dtype=float)
    f = _require_generator(f, "parent")
    g = _require_generator(g, "product")
    finv = inverse(f)
    ginv = inverse(g)
    group = cubic_point_group().astype(float)
    lefts = [ginv @ p @ g for p in group]
    rights = [finv @ q @ f for q in group]
    seen = {}
    dropped = 0
    for left in lefts:
        for right in rights:
            cand = left @ mu0 @ right
            rounded = np.rint(cand)
            if np.abs(cand - rounded).max() > tol:
                dropped += 1
                continue
            mu = rounded.astype(np.int64)
            d = int(round(det(mu)))
            if d != 1:
                dropped += 1
                continue
            seen[tuple(mu.ravel())] = mu
    mus = [seen[key] for key in sorted(seen)]
    return OrbitResult(mus=mus, dropped=dropped)
