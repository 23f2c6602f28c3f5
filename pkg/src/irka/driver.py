"""The IRKA fixed-point iteration.

Each step builds primitive bases at the current shifts, projects, and
proposes the mirrored reduced poles as the next shifts.  Optionally the
reduced input is blended with the exact placement vector before the
eigensolve, which damps the update.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import block_diag

from .diagnostics import certify, condition_report, epsilon_quantities
from .errors import DenominatorCollapse, IrkaError
from .interpolation import (
    build_primitive_bases,
    project_reduced,
    reduced_transfer_deriv,
    reduced_transfer_eval,
)
from .lti import LtiSystem
from .linalg import eig_dense
from .placement import blended_update, kv_equivalence_check
from .shifts import (
    ShiftSet,
    detect_cycle,
    flip_unstable,
    hausdorff_distance,
    matching_distance,
    reflect,
    separate,
)

__all__ = [
    "IrkaConfig",
    "IterationRecord",
    "IrkaResult",
    "Status",
    "irka_step",
    "run_irka",
    "default_init",
    "realify",
]

ALPHA_FLOOR = 2.0**-10
UPDATE_MODES = ("vanilla", "blended")
STOP_RULES = ("matching", "hausdorff_then_matching", "certificate")
INIT_MODES = ("logspace", "random")


@dataclass(frozen=True)
class IrkaConfig:
    """Run configuration.

    ``alpha`` is a constant blending weight in ``[0, 1]`` or the string
    ``"backoff"`` (start at 1, halve whenever the matching distance grows,
    reset to 1 after a decrease).  It only matters with
    ``update_mode="blended"``.
    """

    r: int
    tol: float = 1e-6
    max_iter: int = 100
    update_mode: str = "vanilla"
    alpha: object = 1.0
    stop_rule: str = "matching"
    cycle_max_period: int = 4
    cycle_tol: float = 1e-6
    seed: int = 0
    init: str = "logspace"
    verify: bool = False

    def validate(self, n=None):
        if not (isinstance(self.r, (int, np.integer)) and self.r >= 1):
            raise ValueError("r must be a positive integer")
        if n is not None and self.r > n:
            raise ValueError(f"reduced order r={self.r} exceeds the system order n={n}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.update_mode not in UPDATE_MODES:
            raise ValueError(f"update_mode must be one of {UPDATE_MODES}")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}")
        if self.cycle_max_period < 2:
            raise ValueError("cycle_max_period must be at least 2")
        if self.alpha != "backoff":
            a = float(self.alpha)
            if not 0.0 <= a <= 1.0:
                raise ValueError("alpha must lie in [0, 1]")
        return self

    def to_dict(self):
        return {
            "r": int(self.r),
            "tol": float(self.tol),
            "max_iter": int(self.max_iter),
            "update_mode": self.update_mode,
            "alpha": self.alpha if self.alpha == "backoff" else float(self.alpha),
            "stop_rule": self.stop_rule,
            "cycle_max_period": int(self.cycle_max_period),
            "cycle_tol": float(self.cycle_tol),
            "seed": int(self.seed),
            "init": self.init,
            "verify": bool(self.verify),
        }


@dataclass
class IterationRecord:
    k: int
    sigma_in: ShiftSet
    mu_out: ShiftSet
    q_norm: float
    d: float
    h: float
    kappa_C: float
    kappa_V: float
    cos_angle: float
    eps: float
    eps_bullet: float
    cond_L: float
    companion_residual: float
    hermite_value_err: float
    hermite_deriv_err: float
    eigvec_residual: float = math.nan
    flipped: int = 0
    alpha_used: float = 1.0
    kv_residual: float = math.nan
    flags: list = field(default_factory=list)

    CSV_FIELDS = (
        "k",
        "d",
        "h",
        "q_norm",
        "kappa_C",
        "kappa_V",
        "cos_angle",
        "eps",
        "eps_bullet",
        "flipped",
        "alpha_used",
    )

    def row(self):
        return [getattr(self, name) for name in self.CSV_FIELDS]

    def to_dict(self):
        out = {name: getattr(self, name) for name in self.CSV_FIELDS}
        out["sigma_in"] = [[float(z.real), float(z.imag)] for z in self.sigma_in]
        out["mu_out"] = [[float(z.real), float(z.imag)] for z in self.mu_out]
        for name in (
            "cond_L",
            "companion_residual",
            "hermite_value_err",
            "hermite_deriv_err",
            "eigvec_residual",
            "kv_residual",
        ):
            out[name] = getattr(self, name)
        out["flags"] = list(self.flags)
        return out


@dataclass(frozen=True)
class Status:
    kind: str
    period: int = 0
    reason: str = ""

    @classmethod
    def converged(cls):
        return cls("Converged")

    @classmethod
    def max_iter(cls):
        return cls("MaxIter")

    @classmethod
    def cycle(cls, p):
        return cls("Cycle", period=int(p))

    @classmethod
    def failed(cls, reason):
        return cls("Failed", reason=str(reason))

    def __str__(self):
        if self.kind == "Cycle":
            return f"Cycle({self.period})"
        if self.kind == "Failed":
            return f"Failed({self.reason})"
        return self.kind


@dataclass
class IrkaResult:
    final: object
    realified: object
    history: list
    status: Status
    certificate: object = None
    bases: object = None
    initial_shifts: object = None

    def __iter__(self):
        # allows ``final, realified, history, status = run_irka(...)``
        return iter((self.final, self.realified, self.history, self.status))


def _rel(a, b):
    return abs(a - b) / max(abs(a), np.finfo(float).tiny)


def _hermite_errors(bases, model, sys):
    """Worst relative mismatch of values and derivatives at the shifts.

    Full-model data come for free from the bases: ``H(sigma_j) = c^T V e_j``
    and ``H'(sigma_j) = -W[:, j]^T V[:, j]``.
    """
    V, W = bases.V, bases.W
    vals = sys.c @ V
    ders = -np.einsum("ij,ij->j", W, V)
    ev = ed = 0.0
    for j, s in enumerate(bases.shifts.values):
        ev = max(ev, _rel(vals[j], reduced_transfer_eval(model, s, form="companion")))
        ed = max(ed, _rel(ders[j], reduced_transfer_deriv(model, s, form="companion")))
    return ev, ed


def _eigvec_residual(model):
    """``||A_r X - X diag(mu)|| / (||A_r|| ||X||)`` for the analytic eigenvectors."""
    Ar, X = model.A_r, model.X
    R = Ar @ X - X * model.mu.values[None, :]
    return float(np.linalg.norm(R, 2) / (np.linalg.norm(Ar, 2) * np.linalg.norm(X, 2)))


def irka_step(sys, shifts, k=0, verify=False, alpha=1.0):
    """One fixed-point step.

    Returns ``(model, candidate, record)``.  ``candidate`` is the mirrored
    spectrum of the reduced model, before any stability flip.  ``record``
    carries the matching and Hausdorff distances between ``shifts`` and
    ``candidate`` together with the conditioning and certificate data.
    """
    if len(shifts) > sys.n:
        raise ValueError(f"{len(shifts)} shifts for a system of order {sys.n}")
    try:
        bases = build_primitive_bases(sys, shifts)
        model = project_reduced(sys, bases)
    except IrkaError as exc:
        exc.iteration = k
        if exc.args:
            exc.args = (f"iteration {k}: {exc.args[0]}",) + exc.args[1:]
        raise
    candidate = reflect(model.mu)

    d = matching_distance(shifts, candidate)
    h = hausdorff_distance(shifts, candidate)
    cond = condition_report(bases, model)
    flags = []
    try:
        eps_bullet, eps, _, _ = epsilon_quantities(shifts, model.mu)
    except DenominatorCollapse:
        eps_bullet = eps = math.inf
        flags.append("denominator_collapse")
    ev, ed = _hermite_errors(bases, model, sys)
    kv = math.nan
    if verify and alpha < 1.0:
        z = _kv_samples(shifts, k)
        kv = kv_equivalence_check(shifts, model.q, alpha, z)
    for name, val in (("kappa_C", cond["kappa_C"]), ("eps", eps), ("eps_bullet", eps_bullet)):
        if not math.isfinite(val):
            flags.append(f"{name}_overflow")
    if model.degenerate_q:
        flags.append("degenerate_q")
    rec = IterationRecord(
        k=k,
        sigma_in=shifts,
        mu_out=model.mu,
        q_norm=cond["q_norm"],
        d=d,
        h=h,
        kappa_C=cond["kappa_C"],
        kappa_V=cond["kappa_V"],
        cos_angle=cond["cos_angle"],
        eps=eps,
        eps_bullet=eps_bullet,
        cond_L=float(bases.cond_L),
        companion_residual=float(model.companion_residual),
        hermite_value_err=float(ev),
        hermite_deriv_err=float(ed),
        eigvec_residual=_eigvec_residual(model),
        alpha_used=float(alpha),
        kv_residual=float(kv),
        flags=flags,
    )
    model.extras["bases"] = bases
    return model, candidate, rec


def _kv_samples(shifts, k, count=8):
    rng = np.random.default_rng(1000 + k)
    scale = shifts.max_abs()
    z = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    return z


def default_init(sys, r, mode="logspace", seed=0):
    """Initial working shifts.

    ``logspace``: ``r`` positive reals spaced geometrically between the
    smallest and largest eigenvalue moduli of ``A``.
    ``random``: seeded log-uniform moduli in the same range; a seeded number
    of them become conjugate pairs with angle below 60 degrees.
    """
    lam, _ = eig_dense(sys.A)
    mods = np.abs(lam)
    lo, hi = float(mods.min()), float(mods.max())
    if lo == 0:
        lo = hi * 1e-6 if hi > 0 else 1.0
    if r > 1 and hi < 2 * lo:
        # one modulus (e.g. a single conjugate pair) would stack all shifts
        lo, hi = lo / 2, 2 * hi
    if mode == "logspace":
        s = ShiftSet(np.geomspace(lo, hi, r) if r > 1 else [math.sqrt(lo * hi)])
    elif mode == "random":
        rng = np.random.default_rng(seed)
        hi_eff = hi
        n_pairs = int(rng.integers(0, r // 2 + 1))
        n_real = r - 2 * n_pairs
        reals = np.exp(rng.uniform(np.log(lo), np.log(hi_eff), n_real))
        mod = np.exp(rng.uniform(np.log(lo), np.log(hi_eff), n_pairs))
        ang = rng.uniform(0.05, np.pi / 3, n_pairs)
        s = ShiftSet(np.sort(reals), mod * np.exp(1j * ang))
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    return separate(s)


def realify(model):
    """Real state-space realization of ``H_r`` from its poles and residues.

    A real pole gives a 1x1 block.  A pair ``mu = a + ib`` with residue
    ``phi = alpha + i beta`` gives ``[[a, b], [-b, a]]`` with input ``(1, 0)``
    and output ``(2 alpha, 2 beta)``.
    """
    mu = model.mu
    res = np.asarray(model.residues)
    k = mu.n_real
    blocks, bs, cs = [], [], []
    for j in range(k):
        blocks.append(np.array([[mu.values[j].real]]))
        bs.append([1.0])
        cs.append([res[j].real])
    for j in range(k, len(mu), 2):
        a, b = mu.values[j].real, mu.values[j].imag
        # the pair's residues are conjugates; average the two computed copies
        phi = 0.5 * (res[j] + np.conj(res[j + 1]))
        blocks.append(np.array([[a, b], [-b, a]]))
        bs.append([1.0, 0.0])
        cs.append([2 * phi.real, 2 * phi.imag])
    return LtiSystem(block_diag(*blocks), np.concatenate(bs), np.concatenate(cs))


def _stop(config, rec, candidate):
    scale = min(rec.sigma_in.max_abs(), candidate.max_abs())
    thr = config.tol * scale
    if config.stop_rule == "matching":
        return rec.d <= thr
    if config.stop_rule == "hausdorff_then_matching":
        return rec.h <= thr and rec.d <= thr
    return rec.eps_bullet <= config.tol


def run_irka(sys, config, init=None):
    """Run the iteration until the stop rule, a cycle or ``max_iter``.

    Returns an :class:`IrkaResult`; failures inside the loop end the run with
    ``Status.failed`` instead of raising.  On a detected cycle the iterate
    with the smallest matching distance is returned.
    """
    config.validate(sys.n)
    if init is None:
        sigma = default_init(sys, config.r, config.init, config.seed)
    else:
        if len(init) != config.r:
            raise ValueError(f"init has {len(init)} shifts, expected r={config.r}")
        if not init.is_working():
            raise ValueError("init must be a working set (right half-plane, distinct)")
        sigma = init
    backoff = config.alpha == "backoff"
    blended = config.update_mode == "blended"
    alpha = 1.0 if (backoff or not blended) else float(config.alpha)

    history, shift_hist = [], []
    exclude = None
    status = None
    final = best = None
    best_d = math.inf
    for k in range(config.max_iter):
        try:
            model, candidate, rec = irka_step(sys, sigma, k=k, verify=config.verify, alpha=alpha)
            if blended and alpha < 1.0:
                candidate, _ = blended_update(sigma, model.q, alpha, exclude=exclude)
        except (IrkaError, np.linalg.LinAlgError) as exc:
            status = Status.failed(f"{type(exc).__name__}: {exc}")
            break
        history.append(rec)
        shift_hist.append(sigma)
        final = model
        if rec.d < best_d:
            best, best_d = model, rec.d
        if _stop(config, rec, reflect(model.mu)):
            status = Status.converged()
            break

        if len(shift_hist) >= 2 * config.cycle_max_period:
            found = detect_cycle(shift_hist, config.cycle_max_period, config.cycle_tol)
            if found is not None and found[1] <= 1e-3 * rec.d / sigma.max_abs():
                status = Status.cycle(found[0])
                final = best
                break

        nxt, nflip, mask = flip_unstable(candidate)
        rec.flipped = nflip
        if nflip:
            rec.flags.append("flipped")
        try:
            sep = separate(nxt)
        except IrkaError as exc:
            status = Status.failed(f"{type(exc).__name__} at iteration {k}: {exc}")
            break
        if sep is not nxt:
            rec.flags.append("separated")
            mask = np.zeros(len(sep), dtype=bool) if len(sep) != len(mask) else mask
        exclude = mask if nflip else None

        if backoff and blended and len(history) >= 2:
            if rec.d > history[-2].d:
                alpha = max(alpha * 0.5, ALPHA_FLOOR)
            elif rec.d < history[-2].d:
                alpha = 1.0
        sigma = sep
    if status is None:
        status = Status.max_iter()

    realified = cert = bases = None
    if final is not None:
        bases = final.extras.get("bases")
        try:
            realified = realify(final)
        except (IrkaError, ValueError):
            realified = None
        try:
            cert = certify(sys, bases, final)
        except (IrkaError, ValueError, np.linalg.LinAlgError):
            cert = None
    return IrkaResult(final, realified, history, status, cert, bases, shift_hist[0] if shift_hist else sigma)
