"""Primitive rational Krylov bases and the generalized companion reduced model.

With the primitive bases ``V[:, j] = (sigma_j I - A)^{-1} b`` and
``W[:, j] = (sigma_j I - A)^{-T} c`` the projected state matrix is the
rank-one update ``Sigma - q e^T`` of the diagonal of shifts, where
``q = (W^T V)^{-1} W^T b`` is the reduced input.  Its eigenvectors are the
columns of ``diag(q) @ C`` with ``C`` the Cauchy matrix ``1/(sigma_i - mu_j)``.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import PoleHit, RankCollapse, ShiftEigCollision
from .linalg import UNIT_ROUNDOFF, cond2, eig_dense, shifted_solve_pair
from .lti import eval_transfer, eval_transfer_deriv
from .shifts import SEP_TOL, ShiftSet, conj_symmetrize

__all__ = [
    "PrimitiveBases",
    "ReducedModel",
    "build_primitive_bases",
    "loewner_entry",
    "project_reduced",
    "companion_eig",
    "cauchy_matrix",
    "secular_eval",
    "secular_roots",
    "nodal_eval",
    "residues",
    "left_eigvector",
    "reduced_transfer_eval",
    "reduced_transfer_deriv",
    "NearCollisionWarning",
]

DEGENERATE_Q = 1e-14
RANK_COLLAPSE_COND = 1.0 / (1e3 * UNIT_ROUNDOFF)


class NearCollisionWarning(RuntimeWarning):
    """Two reduced poles nearly coincide; derivative products lose accuracy."""


def _values(s):
    return s.values if isinstance(s, ShiftSet) else np.atleast_1d(np.asarray(s, dtype=complex))


@dataclass(frozen=True, eq=False)
class PrimitiveBases:
    V: np.ndarray
    W: np.ndarray
    L: np.ndarray
    M: np.ndarray
    shifts: ShiftSet
    cond_L: float = np.nan


def build_primitive_bases(sys, shifts):
    """Primitive bases ``V``, ``W`` and the pair ``L = W^T V``, ``M = W^T A V``.

    ``L[i, j] = -[sigma_i, sigma_j]H``: the Loewner matrix up to sign.

    Columns for the lower member of a conjugate pair are exact conjugates of
    the upper column (``A``, ``b``, ``c`` are real).

    Raises
    ------
    SingularShift
        A shift is numerically an eigenvalue of ``A``.
    RankCollapse
        ``cond2(L)`` exceeds ``1 / (1e3 u)``.
    """
    sig = shifts.values
    n, r = sys.n, len(sig)
    V = np.empty((n, r), dtype=complex)
    W = np.empty((n, r), dtype=complex)
    k = shifts.n_real
    for j in range(k):
        V[:, j], W[:, j] = shifted_solve_pair(sys.A, sig[j], sys.b, sys.c)
    for j in range(k, r, 2):
        V[:, j], W[:, j] = shifted_solve_pair(sys.A, sig[j], sys.b, sys.c)
        V[:, j + 1], W[:, j + 1] = np.conj(V[:, j]), np.conj(W[:, j])
    L = W.T @ V
    M = W.T @ (sys.A @ V)
    cL = cond2(L)
    if not cL <= RANK_COLLAPSE_COND:
        raise RankCollapse(f"Loewner matrix is numerically singular (cond2 = {cL:.3e})")
    return PrimitiveBases(V, W, L, M, shifts, cL)


def loewner_entry(sys, si, sj, sep_tol=SEP_TOL):
    """Divided difference ``[si, sj]H``; ``H'(si)`` when the points coincide."""
    if abs(si - sj) >= sep_tol * max(abs(si), abs(sj)):
        return (eval_transfer(sys, si) - eval_transfer(sys, sj)) / (si - sj)
    return eval_transfer_deriv(sys, si)


def cauchy_matrix(sigma, mu):
    """``C[i, j] = 1 / (sigma_i - mu_j)``."""
    s, m = _values(sigma), _values(mu)
    return 1.0 / (s[:, None] - m[None, :])


def nodal_eval(sigma, z):
    """Nodal polynomial ``omega(z)`` and its derivatives ``omega'(sigma_i)``."""
    s = _values(sigma)
    w = complex(np.prod(z - s))
    diff = s[:, None] - s[None, :]
    np.fill_diagonal(diff, 1.0)
    return w, np.prod(diff, axis=1)


def secular_eval(sigma, q, z):
    """``omega(z) * (1 + sum_i q_i / (z - sigma_i))``, i.e. ``det(zI - (Sigma - q e^T))``."""
    s = _values(sigma)
    q = np.asarray(q, dtype=complex)
    gap = z - s
    if np.any(np.abs(gap) <= 4 * UNIT_ROUNDOFF * np.maximum(abs(z), np.abs(s))):
        raise PoleHit(f"z={z!r} coincides with a shift")
    w, _ = nodal_eval(s, z)
    return w * (1.0 + np.sum(q / gap))


def _secular_residual(s, q, z):
    """Backward-scaled ``|1 + sum q_i / (z - sigma_i)|`` for each entry of ``z``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / (z[:, None] - s[None, :])
        g = 1.0 + inv @ q
        scale = 1.0 + np.abs(inv) @ np.abs(q)
        res = np.abs(g) / scale
    return np.where(np.isfinite(res), res, 0.0)


def secular_roots(sigma, q, max_iter=60):
    """Eigenvalues of ``Sigma - q e^T`` refined on the secular equation.

    Dense QR eigenvalues only carry a backward error of order
    ``u * ||q||``, which is far too coarse when ``q`` is large.  They are
    used as starting points for simultaneous Aberth steps on
    ``omega(z) (1 + sum_i q_i / (z - sigma_i))``; a refined root replaces
    the dense one only if it has a smaller secular residual.  Shifts with
    numerically zero ``q_i`` are exact eigenvalues and drop out of the
    secular sum.
    """
    s = _values(sigma)
    q = np.asarray(q, dtype=complex)
    Ar = np.diag(s) - np.outer(q, np.ones(len(s)))
    z0, _ = eig_dense(Ar, real_similar=True)
    z0 = np.asarray(z0, dtype=complex)
    qmax = np.max(np.abs(q)) if len(q) else 0.0
    live = np.abs(q) > UNIT_ROUNDOFF * qmax
    sa, qa = s[live], q[live]
    if not len(sa):
        return z0

    z = z0.copy()
    active = np.ones(len(z), dtype=bool)
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / (z[:, None] - sa[None, :])
            g = 1.0 + inv @ qa
            dlog = inv.sum(axis=1) - (inv**2 @ qa) / g
            newton = 1.0 / dlog
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            step = newton / (1.0 - newton * np.sum(1.0 / diff, axis=1))
        step = np.where(np.isfinite(step) & active, step, 0.0)
        size = np.abs(step)
        z = z - step
        active &= size > 4 * UNIT_ROUNDOFF * np.abs(z)
        if not active.any():
            break

    better = _secular_residual(s, q, z) < _secular_residual(s, q, z0)
    # decide conjugate partners together so the set stays closed
    partner = np.argmin(np.abs(z0[:, None] - np.conj(z0)[None, :]), axis=1)
    better &= better[partner]
    return np.where(better, z, z0)


def _char_deriv(mu, ell):
    """``p_r'(mu_ell) = prod_{j != ell} (mu_ell - mu_j)``."""
    m = _values(mu)
    others = np.delete(m, ell)
    gaps = m[ell] - others
    if len(gaps) and np.min(np.abs(gaps)) < SEP_TOL * max(np.max(np.abs(m)), 1e-300):
        warnings.warn(
            f"reduced poles nearly collide at index {ell}", NearCollisionWarning, stacklevel=3
        )
    return complex(np.prod(gaps))


def _degenerate(q):
    q = np.asarray(q)
    qmax = np.max(np.abs(q)) if len(q) else 0.0
    return np.abs(q) < DEGENERATE_Q * qmax


def companion_eig(sigma, q, sep_tol=SEP_TOL):
    """Eigenvalues and analytic eigenvectors of ``Sigma - q e^T``.

    Returns ``(mu, X)`` where ``mu`` is a :class:`ShiftSet` (pairing pass
    applied) and ``X[:, l] = q / (sigma - mu_l)``.  For an index ``i`` with
    numerically zero ``q_i`` the shift ``sigma_i`` is itself an eigenvalue;
    the matching column is built from the limit formula instead.
    """
    s = _values(sigma)
    q = np.asarray(q, dtype=complex)
    mu = ShiftSet.from_values(secular_roots(s, q))
    m = mu.values

    X = np.empty((len(s), len(m)), dtype=complex)
    degen = _degenerate(q)
    gaps = s[:, None] - m[None, :]
    taken = set()
    for i in np.flatnonzero(degen):
        cand = [l for l in np.argsort(np.abs(gaps[i])) if l not in taken]
        taken.add(cand[0])
        x = np.zeros(len(s), dtype=complex)
        others = np.arange(len(s)) != i
        x[others] = q[others] / (s[others] - s[i])
        x[i] = 1.0 - np.sum(x[others])
        X[:, cand[0]] = x
    for l in range(len(m)):
        if l in taken:
            continue
        g = gaps[:, l]
        bad = np.abs(g) < sep_tol * np.abs(s)
        if np.any(bad & ~degen):
            raise ShiftEigCollision(f"reduced pole {m[l]!r} coincides with a shift")
        X[:, l] = q / g
    return mu, X


def _left_vectors(sigma, q, mu, X):
    """Left eigenvectors ``y_l = (Sigma - mu_l I)^{-T} e`` (``e_i`` at degenerate indices)."""
    s, m = _values(sigma), _values(mu)
    Y = 1.0 / (s[:, None] - m[None, :])
    degen = np.flatnonzero(_degenerate(q))
    for i in degen:
        l = int(np.argmin(np.abs(s[i] - m)))
        Y[:, l] = 0.0
        Y[i, l] = 1.0
    return Y


def _residues(sigma, q, c_r, mu, X):
    Y = _left_vectors(sigma, q, mu, X)
    num = (c_r @ X) * (Y.T @ q)
    den = np.einsum("il,il->l", Y, X)
    return num / den


@dataclass(frozen=True, eq=False)
class ReducedModel:
    """Reduced model in generalized companion form ``(Sigma - q e^T, q, c_r)``.

    ``mu`` holds the reduced poles, ``X = diag(q) C(sigma, mu)`` the right
    eigenvectors (columns aligned with ``mu.values``) and ``residues`` the
    pole residues of ``H_r``.
    """

    sigma: ShiftSet
    q: np.ndarray
    c_r: np.ndarray
    mu: ShiftSet
    X: np.ndarray
    residues: np.ndarray
    companion_residual: float = np.nan
    degenerate_q: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def r(self):
        return len(self.sigma)

    @property
    def A_r(self):
        s = self.sigma.values
        return np.diag(s) - np.outer(self.q, np.ones(len(s)))

    @property
    def b_r(self):
        return self.q

    def transfer(self, s):
        return reduced_transfer_eval(self, s)

    def transfer_deriv(self, s):
        return reduced_transfer_deriv(self, s)

    def cauchy(self):
        return cauchy_matrix(self.sigma, self.mu)


def model_from_data(sigma, q, c_r, **extra):
    """Assemble a :class:`ReducedModel` from ``(sigma, q, c_r)`` alone."""
    q = np.asarray(q, dtype=complex)
    c_r = np.asarray(c_r, dtype=complex)
    mu, X = companion_eig(sigma, q)
    res = _residues(sigma, q, c_r, mu, X)
    return ReducedModel(sigma, q, c_r, mu, X, res, degenerate_q=bool(np.any(_degenerate(q))), **extra)


def project_reduced(sys, bases):
    """Petrov-Galerkin projection with primitive bases.

    ``q = L^{-1} W^T b`` and ``c_r = V^T c``.  The mismatch between
    ``L^{-1} M`` and ``Sigma - q e^T`` is stored as ``companion_residual``.
    """
    L, M = bases.L, bases.M
    sigma = bases.shifts
    try:
        q = np.linalg.solve(L, bases.W.T @ sys.b)
        LinvM = np.linalg.solve(L, M)
    except np.linalg.LinAlgError as exc:
        raise RankCollapse(str(exc)) from exc
    q = conj_symmetrize(q, sigma)
    c_r = bases.V.T @ sys.c
    s = sigma.values
    comp = np.diag(s) - np.outer(q, np.ones(len(s)))
    resid = np.linalg.norm(LinvM - comp) / np.linalg.norm(LinvM)
    return model_from_data(sigma, q, c_r, companion_residual=float(resid), extras={"LinvM": LinvM})


def residues(model):
    """Pole residues ``phi_l = (c_r^T x_l)(y_l^T q)/(y_l^T x_l)``."""
    return _residues(model.sigma, model.q, model.c_r, model.mu, model.X)


def left_eigvector(model, ell):
    """Left eigenvector ``y`` of ``A_r`` for ``mu_ell`` and the scalar ``nu_ell``.

    ``y_i = 1 / (sigma_i - mu_ell)`` and
    ``nu_ell = phi_ell * p_r'(mu_ell) / omega(mu_ell)``, so that
    ``x_ell^T LL = nu_ell * y^T`` for the divided-difference matrix
    ``LL[i, j] = [sigma_i, sigma_j]H``.  With primitive bases
    ``W^T V = -LL``.
    """
    s = model.sigma.values
    m = model.mu.values[ell]
    gap = s - m
    if np.any(np.abs(gap) < SEP_TOL * np.abs(s)):
        raise ShiftEigCollision(f"reduced pole {m!r} coincides with a shift")
    y = 1.0 / gap
    w, _ = nodal_eval(s, m)
    nu = model.residues[ell] * _char_deriv(model.mu, ell) / w
    return y, complex(nu)


def _pole_gap(model, s):
    gap = s - model.mu.values
    if np.any(np.abs(gap) <= 4 * UNIT_ROUNDOFF * np.maximum(abs(s), np.abs(model.mu.values))):
        raise PoleHit(f"s={s!r} is a reduced pole")
    return gap


def reduced_transfer_eval(model, s, form="pole_residue"):
    """``H_r(s)``; ``form="companion"`` solves with ``sI - Sigma + q e^T`` instead."""
    if form == "companion":
        r = model.r
        return complex(model.c_r @ np.linalg.solve(s * np.eye(r) - model.A_r, model.q))
    gap = _pole_gap(model, s)
    return complex(np.sum(model.residues / gap))


def reduced_transfer_deriv(model, s, form="pole_residue"):
    if form == "companion":
        r = model.r
        R = s * np.eye(r) - model.A_r
        v = np.linalg.solve(R, model.q)
        w = np.linalg.solve(R.T, model.c_r)
        return complex(-(w @ v))
    gap = _pole_gap(model, s)
    return complex(-np.sum(model.residues / gap**2))
