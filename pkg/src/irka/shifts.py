"""Conjugation-closed shift sets and the distances used to monitor IRKA.

A :class:`ShiftSet` stores its real members and *one* member of every
complex-conjugate pair; the partner is materialized on demand.  Closure
under conjugation is therefore structural rather than a floating-point
coincidence.
"""

import json

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import EmptySet, ShiftCollision, SizeMismatch
from .linalg import PAIR_TOL, pair_conjugates

__all__ = [
    "SEP_TOL",
    "ShiftSet",
    "matching_distance",
    "matching_assignment",
    "hausdorff_distance",
    "reflect",
    "flip_unstable",
    "separate",
    "detect_cycle",
    "conj_symmetrize",
]

SEP_TOL = 1e-8
STAB_FLOOR = 1e-8


class ShiftSet:
    """Immutable conjugation-closed tuple of complex numbers.

    Parameters
    ----------
    reals : array_like of float
        Real members, in order.
    uppers : array_like of complex
        One member of each conjugate pair, with strictly positive imaginary
        part.

    The flat layout returned by :attr:`values` is
    ``[*reals, u1, conj(u1), u2, conj(u2), ...]``.
    """

    __slots__ = ("_reals", "_uppers", "_values")

    def __init__(self, reals=(), uppers=()):
        reals = np.array(reals, dtype=float).ravel()
        uppers = np.array(uppers, dtype=complex).ravel()
        if np.any(uppers.imag <= 0):
            raise ValueError("pair representatives need a positive imaginary part")
        if not (np.all(np.isfinite(reals)) and np.all(np.isfinite(uppers))):
            raise ValueError("shifts must be finite")
        values = np.empty(len(reals) + 2 * len(uppers), dtype=complex)
        values[: len(reals)] = reals
        values[len(reals) :: 2] = uppers
        values[len(reals) + 1 :: 2] = np.conj(uppers)
        for arr in (reals, uppers, values):
            arr.setflags(write=False)
        self._reals, self._uppers, self._values = reals, uppers, values

    @classmethod
    def from_values(cls, values, tol=PAIR_TOL):
        """Build from a flat list, running the conjugate pairing pass."""
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        if values.size == 0:
            return cls()
        reals, uppers, _ = pair_conjugates(values, tol)
        return cls(reals, uppers)

    @property
    def reals(self):
        return self._reals

    @property
    def uppers(self):
        return self._uppers

    @property
    def values(self):
        return self._values

    @property
    def n_real(self):
        return len(self._reals)

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def __getitem__(self, i):
        return self._values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._values, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, ShiftSet):
            return NotImplemented
        return np.array_equal(self._reals, other._reals) and np.array_equal(
            self._uppers, other._uppers
        )

    __hash__ = None

    def __neg__(self):
        return reflect(self)

    def __repr__(self):
        body = ", ".join(_fmt(z) for z in self._values)
        return f"ShiftSet([{body}])"

    def max_abs(self):
        return float(np.max(np.abs(self._values))) if len(self) else 0.0

    def conj_partner(self):
        """Index permutation ``p`` with ``values[p] == conj(values)``."""
        p = np.arange(len(self))
        k = self.n_real
        p[k::2] += 1
        p[k + 1 :: 2] -= 1
        return p

    def pair_slices(self):
        """Index groups: singletons for reals, two-element lists for pairs."""
        k = self.n_real
        groups = [[i] for i in range(k)]
        groups.extend([i, i + 1] for i in range(k, len(self), 2))
        return groups

    def is_distinct(self, sep_tol=SEP_TOL):
        v = self._values
        if len(v) < 2:
            return True
        gaps = np.abs(v[:, None] - v[None, :])
        np.fill_diagonal(gaps, np.inf)
        return bool(gaps.min() >= sep_tol * self.max_abs())

    def is_working(self, sep_tol=SEP_TOL):
        """Right half-plane, pairwise distinct, nonempty."""
        return len(self) > 0 and bool(np.all(self._values.real > 0)) and self.is_distinct(sep_tol)

    def to_json(self):
        return json.dumps([[float(z.real), float(z.imag)] for z in self._values])

    @classmethod
    def from_json(cls, text, tol=PAIR_TOL):
        data = json.loads(text) if isinstance(text, str) else text
        vals = [complex(re, im) for re, im in data]
        return cls.from_values(vals, tol)


def _fmt(z):
    if z.imag == 0:
        return repr(float(z.real))
    return repr(complex(z))


def conj_symmetrize(vec, shifts):
    """Force ``vec`` to follow the conjugation structure of ``shifts``.

    Entries at real shifts become real; for each pair the partner entry is
    replaced by the conjugate of the symmetrized representative.
    """
    vec = np.array(vec, dtype=complex)
    k = shifts.n_real
    vec[:k] = vec[:k].real
    rep = 0.5 * (vec[k::2] + np.conj(vec[k + 1 :: 2]))
    vec[k::2] = rep
    vec[k + 1 :: 2] = np.conj(rep)
    return vec


def _as_values(s):
    if isinstance(s, ShiftSet):
        return s.values
    return np.atleast_1d(np.asarray(s, dtype=complex))


def _perfect_matching_within(dist, thresh):
    adj = csr_matrix((dist <= thresh).astype(np.int8))
    match = maximum_bipartite_matching(adj, perm_type="column")
    return bool(np.all(match >= 0))


def _bottleneck(dist):
    cand = np.unique(dist)
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_within(dist, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cand[lo]


def matching_assignment(a, b):
    """Optimal bottleneck matching.

    Returns ``(d, perm)`` with ``max_i |a[perm[i]] - b[i]| == d`` minimal.
    """
    a, b = _as_values(a), _as_values(b)
    if len(a) != len(b):
        raise SizeMismatch(f"sets of size {len(a)} and {len(b)}")
    if len(a) == 0:
        return 0.0, np.array([], dtype=int)
    dist = np.abs(b[:, None] - a[None, :])
    d = _bottleneck(dist)
    adj = csr_matrix((dist <= d).astype(np.int8))
    perm = maximum_bipartite_matching(adj, perm_type="column")
    return float(d), perm


def matching_distance(a, b):
    """Bottleneck matching ``min_perm max_i |a_perm(i) - b_i|``.

    Exact: binary search over the sorted pairwise distances with a maximum
    bipartite matching as feasibility test.
    """
    a, b = _as_values(a), _as_values(b)
    if len(a) != len(b):
        raise SizeMismatch(f"sets of size {len(a)} and {len(b)}")
    if len(a) == 0:
        return 0.0
    return float(_bottleneck(np.abs(a[:, None] - b[None, :])))


def hausdorff_distance(a, b):
    a, b = _as_values(a), _as_values(b)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("Hausdorff distance needs nonempty sets")
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def reflect(s):
    """Entrywise negation; pairs stay pairs."""
    return ShiftSet(-s.reals, -np.conj(s.uppers))


def flip_unstable(candidate, stab_floor=STAB_FLOOR):
    """Mirror entries with ``Re <= 0`` into the right half-plane.

    Returns ``(shifts, flipped_count, flipped_mask)``; the mask is aligned
    with :attr:`ShiftSet.values`.  Entries with real part exactly zero are
    moved to ``stab_floor * max|s|``.
    """
    floor = stab_floor * max(candidate.max_abs(), np.finfo(float).tiny)
    reals = candidate.reals.copy()
    uppers = candidate.uppers.copy()
    mask = np.zeros(len(candidate), dtype=bool)
    k = len(reals)

    flip_r = reals <= 0
    reals[flip_r] = np.where(reals[flip_r] == 0, floor, -reals[flip_r])
    mask[:k] = flip_r

    flip_p = uppers.real <= 0
    re = np.where(uppers.real == 0, floor, -uppers.real)
    uppers = np.where(flip_p, re + 1j * uppers.imag, uppers)
    mask[k::2] = flip_p
    mask[k + 1 :: 2] = flip_p
    return ShiftSet(reals, uppers), int(mask.sum()), mask


def separate(s, sep_tol=SEP_TOL, max_rounds=20):
    """Deterministically pull apart entries closer than ``sep_tol * max|s|``.

    A colliding entry at position ``i`` (1-based) is scaled by
    ``1 + sep_tol * i``; a pair is scaled as a unit.  Pairs whose members
    nearly coincide are first split into two real entries.
    """
    if len(s) < 2 or s.is_distinct(sep_tol):
        return s
    scale = s.max_abs()
    reals = list(s.reals)
    uppers = []
    for u in s.uppers:
        if 2 * u.imag < sep_tol * scale:
            reals.extend([u.real, u.real])
        else:
            uppers.append(u)
    reals = np.array(reals, dtype=float)
    uppers = np.array(uppers, dtype=complex)
    for _ in range(max_rounds):
        cur = ShiftSet(reals, uppers)
        if cur.is_distinct(sep_tol):
            return cur
        v = cur.values
        k = len(reals)
        gaps = np.abs(v[:, None] - v[None, :])
        thresh = sep_tol * cur.max_abs()
        for j in range(1, len(v)):
            if np.any(gaps[j, :j] < thresh):
                if j < k:
                    reals[j] *= 1 + sep_tol * (j + 1)
                elif (j - k) % 2 == 0:
                    uppers[(j - k) // 2] *= 1 + sep_tol * (j + 1)
                # the lower partner of a pair moves with its representative
    cur = ShiftSet(reals, uppers)
    if not cur.is_distinct(sep_tol):
        raise ShiftCollision("could not separate colliding shifts")
    return cur


def detect_cycle(history, max_period, tol):
    """Look for a period-``p`` oscillation at the tail of ``history``.

    Returns ``(period, residual)`` for the smallest ``p`` in
    ``[2, max_period]`` such that the last ``max(3, p)`` comparable iterates
    each lie within ``tol * max|sigma_k|`` of the iterate ``p`` steps
    earlier, while consecutive iterates do *not* (that case is plain
    convergence).  Returns ``None`` otherwise.
    """
    if max_period < 2:
        raise ValueError("max_period must be at least 2")
    if len(history) < 2 * max_period:
        raise ValueError(f"need at least {2 * max_period} iterates, got {len(history)}")
    last = history[-1]
    if matching_distance(last, history[-2]) < tol * last.max_abs():
        return None
    for p in range(2, max_period + 1):
        span = max(3, p)
        if len(history) < span + p:
            break
        worst = 0.0
        for k in range(len(history) - span, len(history)):
            cur = history[k]
            worst = max(worst, matching_distance(cur, history[k - p]) / cur.max_abs())
        if worst < tol:
            return p, worst
    return None
