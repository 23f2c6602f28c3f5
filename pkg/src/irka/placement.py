"""Explicit single-input pole placement for ``Sigma - q e^T``.

For distinct shifts the feedback vector that moves the spectrum of
``diag(sigma)`` to a target set ``mu`` is unique:

    q_i = prod_j (sigma_i - mu_j) / prod_{j != i} (sigma_i - sigma_j)

Placing the poles at the mirrored shifts ``-sigma`` gives the vector
``f_i = 2 sigma_i prod_{j != i} (sigma_i + sigma_j) / (sigma_i - sigma_j)``.
"""

import numpy as np

from .errors import ShiftCollision
from .interpolation import nodal_eval, secular_eval, secular_roots
from .shifts import SEP_TOL, ShiftSet, conj_symmetrize, reflect

__all__ = [
    "placement_q",
    "feedback_vector",
    "companion_poles",
    "blended_update",
    "kv_equivalence_check",
]


def _values(s):
    return s.values if isinstance(s, ShiftSet) else np.atleast_1d(np.asarray(s, dtype=complex))


def _check_distinct(s, sep_tol):
    if len(s) < 2:
        return
    gaps = np.abs(s[:, None] - s[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < sep_tol * np.max(np.abs(s)):
        raise ShiftCollision("shifts are not pairwise distinct")


def placement_q(sigma, mu_target, sep_tol=SEP_TOL):
    """Feedback vector ``q`` with ``eig(diag(sigma) - q e^T) == mu_target``."""
    s = _values(sigma)
    m = _values(mu_target)
    if len(m) != len(s):
        raise ValueError("target must have as many entries as there are shifts")
    _check_distinct(s, sep_tol)
    _, dw = nodal_eval(s, 0.0)
    q = np.prod(s[:, None] - m[None, :], axis=1) / dw
    if isinstance(sigma, ShiftSet) and isinstance(mu_target, ShiftSet):
        q = conj_symmetrize(q, sigma)
    return q


def feedback_vector(sigma, sep_tol=SEP_TOL):
    """Feedback that places the spectrum of ``Sigma - f e^T`` exactly at ``-sigma``."""
    s = _values(sigma)
    _check_distinct(s, sep_tol)
    ratio = (s[:, None] + s[None, :]) / np.where(
        np.eye(len(s), dtype=bool), 1.0, s[:, None] - s[None, :]
    )
    np.fill_diagonal(ratio, 1.0)
    f = 2 * s * np.prod(ratio, axis=1)
    if isinstance(sigma, ShiftSet):
        f = conj_symmetrize(f, sigma)
    return f


def companion_poles(sigma, q):
    """Spectrum of ``diag(sigma) - q e^T`` as a :class:`ShiftSet`."""
    return ShiftSet.from_values(secular_roots(_values(sigma), q))


def blended_update(sigma, q, alpha, exclude=None):
    """Candidate shifts from the blended feedback ``alpha q + (1 - alpha) f``.

    ``exclude`` is a boolean mask (aligned with ``sigma.values``) of indices
    that keep ``q_i`` untouched, used to skip shifts produced by a
    stability flip.  Returns ``(candidate, info)``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    q = np.asarray(q, dtype=complex)
    if alpha == 1.0:
        f = None
        q_blend = q
    else:
        f = feedback_vector(sigma)
        a = np.full(len(q), float(alpha))
        if exclude is not None:
            a[np.asarray(exclude, dtype=bool)] = 1.0
        q_blend = a * q + (1.0 - a) * f
    candidate = reflect(companion_poles(sigma, q_blend))
    return candidate, {"alpha": float(alpha), "q_blend": q_blend, "f": f}


def kv_equivalence_check(sigma, q, alpha, z_samples):
    """Pointwise check of the blended characteristic-polynomial identity.

    The polynomial of ``Sigma - (alpha q + (1-alpha) f) e^T`` must equal
    ``alpha * det(zI - (Sigma - q e^T)) + (1-alpha) * prod_j (z + sigma_j)``.
    Each residual is scaled by the magnitude of the terms entering the
    secular sums; the maximum is returned.
    """
    s = _values(sigma)
    q = np.asarray(q, dtype=complex)
    f = feedback_vector(sigma)
    q_blend = alpha * q + (1.0 - alpha) * f
    worst = 0.0
    for z in np.atleast_1d(z_samples):
        lhs = secular_eval(s, q_blend, z)
        p_vanilla = secular_eval(s, q, z)
        p_reflected = complex(np.prod(z + s))
        rhs = alpha * p_vanilla + (1.0 - alpha) * p_reflected
        w = abs(nodal_eval(s, z)[0])
        terms = w * (1 + np.sum(np.abs(q_blend) / np.abs(z - s)))
        terms += alpha * w * (1 + np.sum(np.abs(q) / np.abs(z - s))) + (1 - alpha) * abs(p_reflected)
        worst = max(worst, abs(lhs - rhs) / terms)
    return float(worst)
