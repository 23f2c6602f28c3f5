"""Dense matrix kernels.

All matrices are plain ``numpy.ndarray`` objects in numpy's default
(row-major) layout.  Nothing here keeps state; every function is a pure
function of its arguments.
"""

import warnings

import numpy as np
import scipy.linalg as spla

from .errors import NoConvergence, RankDeficient, SingularShift, UnstableMatrix

__all__ = [
    "UNIT_ROUNDOFF",
    "PAIR_TOL",
    "shifted_lu",
    "shifted_solve",
    "shifted_solve_pair",
    "eig_dense",
    "pair_conjugates",
    "cond2",
    "lyapunov_solve",
    "lyapunov_factor",
    "subspace_cos_angle",
]

UNIT_ROUNDOFF = np.finfo(float).eps / 2
PAIR_TOL = 1e-10


def shifted_lu(A, sigma):
    """LU factorization of ``sigma*I - A``.

    Raises
    ------
    SingularShift
        If a pivot is below ``n * eps * ||sigma*I - A||_1``.
    """
    A = np.asarray(A)
    n = A.shape[0]
    M = sigma * np.eye(n, dtype=np.result_type(A, sigma)) - A
    scale = np.linalg.norm(M, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        lu, piv = spla.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if scale == 0 or pivots.min() <= n * np.finfo(float).eps * scale:
        raise SingularShift(f"sigma={sigma!r} is numerically an eigenvalue of A")
    return lu, piv


def shifted_solve(A, sigma, rhs, transpose=False):
    """Solve ``(sigma*I - A) x = rhs`` (or the plain transposed system).

    ``transpose=True`` solves ``(sigma*I - A)^T x = rhs`` without
    conjugation, which is what the left primitive basis needs.
    """
    lu_piv = shifted_lu(A, sigma)
    return spla.lu_solve(lu_piv, np.asarray(rhs, dtype=complex), trans=1 if transpose else 0)


def shifted_solve_pair(A, sigma, b, c):
    """Return ``(v, w)`` with ``(sigma I - A) v = b`` and ``(sigma I - A)^T w = c``.

    One factorization serves both solves.
    """
    lu_piv = shifted_lu(A, sigma)
    v = spla.lu_solve(lu_piv, np.asarray(b, dtype=complex))
    w = spla.lu_solve(lu_piv, np.asarray(c, dtype=complex), trans=1)
    return v, w


def _pair_indices(values, tol):
    """Split indices into real ones and conjugate pairs ``(i_upper, i_lower)``."""
    values = np.asarray(values, dtype=complex)
    scale = tol * (1.0 + np.abs(values))
    real_idx = [i for i in range(len(values)) if abs(values[i].imag) < scale[i]]
    upper = [i for i in range(len(values)) if values[i].imag >= scale[i]]
    lower = [i for i in range(len(values)) if values[i].imag <= -scale[i]]

    pairs = []
    # greedy: repeatedly take the globally closest (upper, conj(lower)) couple
    while upper and lower:
        dist = np.abs(values[upper][:, None] - np.conj(values[lower])[None, :])
        iu, il = np.unravel_index(np.argmin(dist), dist.shape)
        pairs.append((upper.pop(iu), lower.pop(il)))
    # leftovers cannot be paired; they are snapped onto the real axis
    real_idx.extend(upper)
    real_idx.extend(lower)
    return real_idx, pairs


def pair_conjugates(values, tol=PAIR_TOL):
    """Conjugate pairing pass.

    Values with ``|Im| < tol*(1+|z|)`` become real; the rest are greedily
    matched into pairs which are then symmetrized.  Any value that finds no
    partner is also snapped to the real axis.

    Returns
    -------
    reals : (k,) float array, sorted ascending
    uppers : (m,) complex array, one member (``Im > 0``) of each pair, sorted
    order : list of index tuples mapping output positions back to the input
        (``values`` laid out as ``[*reals, u1, conj(u1), u2, conj(u2), ...]``)
    """
    values = np.asarray(values, dtype=complex)
    real_idx, pairs = _pair_indices(values, tol)
    reals = np.array([values[i].real for i in real_idx], dtype=float)
    uppers = np.array(
        [0.5 * (values[i] + np.conj(values[j])) for i, j in pairs], dtype=complex
    )
    r_order = np.argsort(reals, kind="stable")
    p_order = np.lexsort((uppers.imag, uppers.real)) if len(uppers) else np.array([], int)
    order = [real_idx[k] for k in r_order]
    for k in p_order:
        order.extend(pairs[k])
    return reals[r_order], uppers[p_order], order


def eig_dense(M, real_similar=False, pair_tol=PAIR_TOL):
    """Eigenvalues and right eigenvectors of a dense square matrix.

    With ``real_similar=True`` the matrix is known to be similar to a real
    matrix; the eigenvalues are then passed through :func:`pair_conjugates`
    so the returned spectrum is closed under conjugation bit-for-bit, and the
    eigenvector columns are permuted to follow.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError("eig_dense needs a nonempty square matrix")
    try:
        lam, X = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise NoConvergence("non-finite eigenvalues")
    if not real_similar:
        return lam, X
    reals, uppers, order = pair_conjugates(lam, pair_tol)
    values = np.concatenate(
        [reals.astype(complex), np.ravel(np.column_stack([uppers, np.conj(uppers)]))]
    )
    return values, X[:, order]


def cond2(M):
    """Spectral condition number ``s_max / s_min``.

    Returns ``inf`` once ``s_min <= 100 * u * s_max * max(rows, cols)``.
    """
    M = np.atleast_2d(np.asarray(M))
    s = spla.svdvals(M)
    smax, smin = s[0], s[-1]
    if smax == 0:
        raise ValueError("cond2 of the zero matrix is undefined")
    if smin <= 1e2 * UNIT_ROUNDOFF * smax * max(M.shape):
        return np.inf
    return float(smax / smin)


def lyapunov_solve(A, Q):
    """Solve ``A P + P A^T + Q = 0`` for stable real ``A``.

    Schur-based Bartels-Stewart solve (LAPACK ``trsyl`` through scipy);
    the result is symmetrized explicitly.
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    lam, _ = eig_dense(A)
    if np.max(lam.real) >= 0:
        raise UnstableMatrix("Lyapunov solve needs a stable A")
    P = spla.solve_continuous_lyapunov(A, -Q)
    return 0.5 * (P + P.T)


def lyapunov_factor(A, b, schur=None):
    """Factor ``P = Q U U^H Q^H`` of the solution of ``A P + P A^T + b b^T = 0``.

    Hammarling's recurrence on the complex Schur form ``A = Q S Q^H``; ``U``
    is upper triangular.  Norms such as ``sqrt(c^T P c) = ||U^H Q^H c||``
    computed from the factor keep full relative accuracy, whereas forming
    ``c^T P c`` loses half the digits to cancellation.  A precomputed complex
    Schur pair ``(S, Q)`` may be passed as ``schur``.
    """
    if schur is None:
        S, Q = spla.schur(np.asarray(A, dtype=float), output="complex")
    else:
        S, Q = schur
    lam = np.diag(S)
    if np.max(lam.real) >= 0:
        raise UnstableMatrix("Lyapunov factor needs a stable A")
    n = S.shape[0]
    rhs = Q.conj().T @ np.asarray(b, dtype=complex)
    U = np.zeros((n, n), dtype=complex)
    for k in range(n - 1, -1, -1):
        beta = rhs[k]
        alpha = np.sqrt(-2.0 * lam[k].real)
        tau = abs(beta) / alpha
        U[k, k] = tau
        if k == 0 or tau == 0:
            continue
        T = S[:k, :k] + np.conj(lam[k]) * np.eye(k)
        u = spla.solve_triangular(T, -(S[:k, k] * tau**2 + rhs[:k] * np.conj(beta)) / tau)
        U[:k, k] = u
        rhs[:k] = rhs[:k] - alpha * (beta / abs(beta)) * u
    return Q, U


def _orth(X):
    U, s, _ = spla.svd(X, full_matrices=False)
    if s[0] == 0 or s[-1] <= 1e2 * UNIT_ROUNDOFF * s[0] * max(X.shape):
        raise RankDeficient("basis is numerically rank deficient")
    return U


def subspace_cos_angle(V, W):
    """Cosine of the largest principal angle between ``Range(V)`` and ``Range(W)``."""
    V = np.asarray(V)
    W = np.asarray(W)
    if V.ndim == 1:
        V = V[:, None]
    if W.ndim == 1:
        W = W[:, None]
    Qv, Qw = _orth(V), _orth(W)
    s = spla.svdvals(Qv.conj().T @ Qw)
    return float(np.clip(s[-1], 0.0, 1.0))
