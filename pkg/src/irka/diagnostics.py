"""Perturbation bounds and backward-stability certificates.

When IRKA stops, the reduced poles ``mu`` only approximately mirror the
shifts.  Writing ``mu_k = -sigma_k + eps_k`` (optimal matching), the
computed reduced input ``q`` differs from the exact placement vector ``q*``
(poles exactly at ``-sigma``) by ``q_i = q*_i (1 - eta_i)`` with
``eta_i = 1 - prod_k (1 - eps_k / (sigma_i + sigma_k))``.  The certificate
turns that discrepancy into explicit perturbations ``db`` and ``dA`` of the
full model for which the stopped reduced model is an *exact* reduction.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
import scipy.linalg as spla

from .errors import (
    CertificateInvalid,
    DenominatorCollapse,
    RankDeficient,
    ShiftEigCollision,
    SizeMismatch,
    ZeroEigenvalue,
)
from .interpolation import cauchy_matrix
from .linalg import UNIT_ROUNDOFF, cond2, subspace_cos_angle
from .placement import companion_poles, feedback_vector
from .shifts import SEP_TOL, matching_assignment, matching_distance, reflect

__all__ = [
    "BackwardCertificate",
    "PerturbationBound",
    "epsilon_quantities",
    "backward_reduced_perturbation",
    "backward_system_perturbation",
    "eigenvalue_perturbation_bound",
    "condition_report",
    "certify",
]


def _log_products(terms):
    """``prod_k (1 + terms[i, k]) - 1`` row-wise, evaluated in log form.

    ``expm1(sum log1p(.))`` keeps small products accurate and lets huge ones
    overflow to ``inf`` instead of raising.
    """
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        s = np.sum(np.log1p(terms), axis=1)
        out = np.expm1(s)
    out = np.where(np.isnan(out) & np.isinf(s.real) & (s.real > 0), np.inf, out)
    return out


def epsilon_quantities(sigma, mu):
    """Mirror defects ``eps_k`` and the products ``eps_bullet``, ``eps``.

    Returns ``(eps_bullet, eps, eps_k, mu_matched)`` where ``mu_matched[k]``
    is the pole paired with ``sigma_k`` by the optimal bottleneck matching
    against ``-sigma``.
    """
    s = sigma.values if hasattr(sigma, "values") else np.asarray(sigma, dtype=complex)
    m = mu.values if hasattr(mu, "values") else np.asarray(mu, dtype=complex)
    if len(s) != len(m):
        raise SizeMismatch(f"{len(s)} shifts but {len(m)} poles")
    _, perm = matching_assignment(m, -s)
    mm = m[perm]
    eps_k = mm + s

    scale = SEP_TOL * np.max(np.abs(s))
    plus = s[:, None] + s[None, :]
    minus = s[:, None] - mm[None, :]
    if np.min(np.abs(plus)) < scale or np.min(np.abs(minus)) < scale:
        raise DenominatorCollapse("a certificate denominator vanished")
    eta = -_log_products(-eps_k[None, :] / plus)
    rho = _log_products(eps_k[None, :] / minus)
    return float(np.max(np.abs(eta))), float(np.max(np.abs(rho))), eps_k, mm


@dataclass
class BackwardCertificate:
    eps: float
    eps_bullet: float
    eta: list
    dq_norm: float
    dq_norm_bound_q: float
    dq_norm_bound_qbullet: float
    dAr_norm: float
    dAr_bound: float
    db_norm: float
    db_bound: float
    dA_norm: float
    dA_bound: float
    dc_norm: float
    kappa_C: float
    kappa_V: float
    cos_angle: float
    q_norm: float
    projection_residual: float
    interpolation_residual: float
    placement_residual: float
    valid: bool
    checks: dict = field(default_factory=dict)

    @property
    def all_hold(self):
        return all(self.checks.values())

    def to_dict(self):
        d = asdict(self)
        d["eta"] = [[float(np.real(z)), float(np.imag(z))] for z in self.eta]
        return d


def backward_reduced_perturbation(model):
    """Exact-placement vector ``q*`` and ``dq = q - q*`` with the norm-bound checks.

    Returns ``(q_bullet, dq, checks)``; ``checks`` holds the achieved
    placement residual and the two norm bounds ``||dq|| <= eps ||q||`` and
    ``||dq|| <= eps_bullet ||q*||`` (the latter two only when ``eps < 1``,
    resp. ``eps_bullet < 1``).
    """
    sigma, q = model.sigma, model.q
    q_bullet = feedback_vector(sigma)
    dq = q - q_bullet
    eps_bullet, eps, _, _ = epsilon_quantities(sigma, model.mu)
    r = len(q)
    slack = 1 + 10 * UNIT_ROUNDOFF * r

    placed = companion_poles(sigma, q_bullet)
    placement_residual = matching_distance(placed, reflect(sigma)) / sigma.max_abs()
    dq_norm = np.linalg.norm(dq)
    checks = {
        "eps": eps,
        "eps_bullet": eps_bullet,
        "placement_residual": placement_residual,
        "dq_norm": dq_norm,
        "bound_q": eps * np.linalg.norm(q),
        "bound_qbullet": eps_bullet * np.linalg.norm(q_bullet),
    }
    # dq and eps_k are both differences of nearby numbers, so their
    # rounding error is absolute, of size u * ||q||, not relative to dq
    floor = 10 * UNIT_ROUNDOFF * r * (np.linalg.norm(q) + np.linalg.norm(q_bullet))
    checks["roundoff_floor"] = floor
    checks["bound_q_holds"] = bool(eps >= 1 or dq_norm <= checks["bound_q"] * slack + floor)
    checks["bound_qbullet_holds"] = bool(
        eps_bullet >= 1 or dq_norm <= checks["bound_qbullet"] * slack + floor
    )
    return q_bullet, dq, checks


def _real_promote(x, name):
    x = np.asarray(x)
    scale = max(np.max(np.abs(x)), np.finfo(float).tiny)
    if np.max(np.abs(x.imag)) > 1e-6 * scale:
        raise ValueError(f"{name} is not real to working accuracy")
    return np.real(x)


def backward_system_perturbation(sys, bases, model, require_valid=True):
    """Backward perturbations ``db``, ``dA`` of the full model.

    ``db = (U^T)^+ dq`` with ``U^T = L^{-1} W^T``, ``f = (V^T)^+ e`` and
    ``dA = db f^T``.  The perturbed model ``(A + dA, b - db, c)`` projects
    exactly onto ``Sigma - q* e^T``.

    Returns a dict with ``db``, ``dA``, ``f``, the projection and
    interpolation residuals and the bound values.
    """
    q_bullet, dq, checks = backward_reduced_perturbation(model)
    eps, eps_bullet = checks["eps"], checks["eps_bullet"]
    valid = eps_bullet < 0.5
    if require_valid and not valid:
        raise CertificateInvalid(f"eps_bullet = {eps_bullet:.3e} >= 1/2")

    V, W, L = bases.V, bases.W, bases.L
    r = V.shape[1]
    Ut = np.linalg.solve(L, W.T)
    db = _real_promote(np.linalg.lstsq(Ut, dq, rcond=None)[0], "db")
    f = _real_promote(np.linalg.lstsq(V.T, np.ones(r), rcond=None)[0], "f")
    dA = np.outer(db, f)

    sig = model.sigma.values
    Ar_bullet = np.diag(sig) - np.outer(q_bullet, np.ones(r))
    lhs = Ut @ ((sys.A + dA) @ V)
    rhs = np.diag(sig) - np.outer(Ut @ (sys.b - db), np.ones(r))
    proj_res = np.linalg.norm(lhs - rhs) / np.linalg.norm(Ar_bullet)

    # G_r*(sigma_i) against G*(sigma_i) for the perturbed full model
    Ap, bp = sys.A + dA, sys.b - db
    n = sys.n
    interp = 0.0
    for i, s in enumerate(sig):
        g_full = sys.c @ np.linalg.solve(s * np.eye(n) - Ap, bp)
        g_red = model.c_r @ np.linalg.solve(s * np.eye(r) - Ar_bullet, q_bullet)
        interp = max(interp, abs(g_full - g_red) / max(abs(g_full), np.finfo(float).tiny))

    kappa_V = cond2(V)
    try:
        cos = subspace_cos_angle(V, W)
    except RankDeficient:
        cos = 0.0
    ratio = kappa_V / cos if cos > 0 else np.inf
    db_bound = ratio * eps * np.linalg.norm(sys.b)
    if valid:
        dA_bound = kappa_V * ratio * 2 * eps_bullet / (1 - 2 * eps_bullet) * spla.norm(sys.A, 2)
    else:
        dA_bound = np.inf

    # least-squares output correction, reported only
    dc = -(1.0 / r) * f * (db @ (W @ np.ones(r)))
    return {
        "q_bullet": q_bullet,
        "dq": dq,
        "db": db,
        "dA": dA,
        "f": f,
        "dc": dc,
        "projection_residual": float(proj_res),
        "interpolation_residual": float(interp),
        "db_bound": float(db_bound),
        "dA_bound": float(dA_bound),
        "kappa_V": float(kappa_V),
        "cos_angle": float(cos),
        "valid": bool(valid),
        "reduced_checks": checks,
    }


@dataclass
class PerturbationBound:
    lhs: float
    rhs: float
    rhs_remark: float
    lhs_abs: float

    @property
    def holds(self):
        return self.lhs <= self.rhs and self.lhs_abs <= self.rhs_remark


def eigenvalue_perturbation_bound(sigma, q, dq):
    """Relative eigenvalue perturbation of ``Sigma - q e^T`` under ``q -> q + dq``.

    ``lhs``: ``min_perm sqrt(sum |(mu_i - mu~_perm(i)) / mu_i|^2)`` via an
    optimal sum-of-squares assignment.
    ``rhs``: ``||C|| ||(C M)^{-1}|| kappa(C~) ||dq e^T||``.
    ``rhs_remark``: ``kappa(C) kappa(C~) ||dq e^T||``, bounding the absolute
    variant ``lhs_abs``.
    """
    q = np.asarray(q, dtype=complex)
    dq = np.asarray(dq, dtype=complex)
    mu = companion_poles(sigma, q).values
    mu_t = companion_poles(sigma, q + dq).values
    s = sigma.values if hasattr(sigma, "values") else np.asarray(sigma, dtype=complex)
    # an eigenvalue within roundoff of zero of ||Sigma - q e^T|| counts as zero
    tiny = 10 * UNIT_ROUNDOFF * (np.max(np.abs(s)) + np.sqrt(len(q)) * np.linalg.norm(q))
    if np.min(np.abs(mu)) <= tiny:
        raise ZeroEigenvalue("relative bound needs nonzero eigenvalues")
    for m in (mu, mu_t):
        if np.min(np.abs(s[:, None] - m[None, :])) < SEP_TOL * np.max(np.abs(s)):
            raise ShiftEigCollision("a pole coincides with a shift")

    rel = np.abs((mu[:, None] - mu_t[None, :]) / mu[:, None]) ** 2
    rows, cols = linear_sum_assignment(rel)
    lhs = float(np.sqrt(rel[rows, cols].sum()))
    absd = np.abs(mu[:, None] - mu_t[None, :]) ** 2
    rows, cols = linear_sum_assignment(absd)
    lhs_abs = float(np.sqrt(absd[rows, cols].sum()))

    C = cauchy_matrix(s, mu)
    Ct = cauchy_matrix(s, mu_t)
    rank1 = np.sqrt(len(s)) * np.linalg.norm(dq)
    if rank1 == 0:
        return PerturbationBound(lhs, 0.0, 0.0, lhs_abs)
    sv_C = spla.svdvals(C)
    sv_CM = spla.svdvals(C * mu[None, :])
    rhs = sv_C[0] / sv_CM[-1] * cond2(Ct) * rank1
    rhs_remark = cond2(C) * cond2(Ct) * rank1
    return PerturbationBound(lhs, float(rhs), float(rhs_remark), lhs_abs)


def condition_report(bases, model):
    """Conditioning numbers tracked along the iteration."""
    try:
        kappa_C = cond2(cauchy_matrix(model.sigma, model.mu))
    except (ValueError, FloatingPointError):
        kappa_C = np.inf
    if not np.all(np.isfinite(cauchy_matrix(model.sigma, model.mu))):
        kappa_C = np.inf
    kappa_V = cond2(bases.V)
    try:
        cos = subspace_cos_angle(bases.V, bases.W)
    except RankDeficient:
        cos = np.nan
    return {
        "kappa_C": float(kappa_C),
        "kappa_V": float(kappa_V),
        "cos_angle": float(cos),
        "q_norm": float(np.linalg.norm(model.q)),
    }


def certify(sys, bases, model):
    """Full backward-stability certificate for a stopped iteration."""
    out = backward_system_perturbation(sys, bases, model, require_valid=False)
    chk = out["reduced_checks"]
    eps, eps_bullet = chk["eps"], chk["eps_bullet"]
    _, _, eps_k, mm = epsilon_quantities(model.sigma, model.mu)
    s = model.sigma.values
    eta = -_log_products(-eps_k[None, :] / (s[:, None] + s[None, :]))

    r = model.r
    q_bullet = out["q_bullet"]
    Ar_bullet = np.diag(s) - np.outer(q_bullet, np.ones(r))
    dAr_norm = np.sqrt(r) * chk["dq_norm"]
    dAr_bound = 2 * eps_bullet * spla.norm(Ar_bullet, 2)
    db_norm = float(np.linalg.norm(out["db"]))
    dA_norm = float(spla.norm(out["dA"], 2))
    cond = condition_report(bases, model)
    slack = 1 + 1e-10

    checks = {
        "placement": chk["placement_residual"] <= 1e-10,
        "dq_vs_q": chk["bound_q_holds"],
        "dq_vs_qbullet": chk["bound_qbullet_holds"],
        "dAr": eps_bullet >= 1
        or dAr_norm <= dAr_bound * (1 + 10 * UNIT_ROUNDOFF * r) + np.sqrt(r) * chk["roundoff_floor"],
        "projection": out["projection_residual"] <= 1e-10,
        "interpolation": out["interpolation_residual"] <= 1e-8,
        "db": eps >= 1 or db_norm <= out["db_bound"] * slack,
        "dA": (not out["valid"]) or dA_norm <= out["dA_bound"] * slack,
    }
    return BackwardCertificate(
        eps=eps,
        eps_bullet=eps_bullet,
        eta=list(eta),
        dq_norm=float(chk["dq_norm"]),
        dq_norm_bound_q=float(chk["bound_q"]),
        dq_norm_bound_qbullet=float(chk["bound_qbullet"]),
        dAr_norm=float(dAr_norm),
        dAr_bound=float(dAr_bound),
        db_norm=db_norm,
        db_bound=out["db_bound"],
        dA_norm=dA_norm,
        dA_bound=out["dA_bound"],
        dc_norm=float(np.linalg.norm(out["dc"])),
        kappa_C=cond["kappa_C"],
        kappa_V=out["kappa_V"],
        cos_angle=out["cos_angle"],
        q_norm=cond["q_norm"],
        projection_residual=out["projection_residual"],
        interpolation_residual=out["interpolation_residual"],
        placement_residual=float(chk["placement_residual"]),
        valid=out["valid"],
        checks={k: bool(v) for k, v in checks.items()},
    )
