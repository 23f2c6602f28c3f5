"""SISO LTI systems ``x' = A x + b u, y = c^T x``."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import BadSpec, DimensionMismatch, UnstableMatrix
from .linalg import eig_dense, lyapunov_factor, shifted_solve, shifted_solve_pair

__all__ = [
    "LtiSystem",
    "eval_transfer",
    "eval_transfer_deriv",
    "is_stable",
    "h2_norm",
    "h2_error",
    "SpectrumSpec",
    "synth_random_stable",
]


def _frozen(x):
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """Real single-input single-output state-space system.

    Parameters
    ----------
    A : (n, n) array_like
        State matrix.
    b : (n,) array_like
        Input vector.
    c : (n,) array_like
        Output vector.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("A", "b", "c"):
            val = np.asarray(getattr(self, name))
            if np.iscomplexobj(val):
                if np.any(val.imag != 0):
                    raise ValueError(f"{name} must be real")
                val = val.real
            object.__setattr__(self, name, _frozen(val))
        A, b, c = self.A, np.ravel(self.b), np.ravel(self.c)
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionMismatch(f"A must be square and nonempty, got shape {A.shape}")
        n = A.shape[0]
        if b.shape != (n,) or c.shape != (n,):
            raise DimensionMismatch(
                f"b and c must have length {n}, got {b.shape[0]} and {c.shape[0]}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("system data must be finite")

    @property
    def n(self):
        return self.A.shape[0]

    def poles(self):
        return eig_dense(self.A, real_similar=True)[0]

    def transfer(self, s):
        return eval_transfer(self, s)

    def transfer_deriv(self, s):
        return eval_transfer_deriv(self, s)

    def is_stable(self):
        return is_stable(self)

    def h2_norm(self):
        return h2_norm(self)

    def __repr__(self):
        return f"LtiSystem(n={self.n})"


def eval_transfer(sys, s):
    """``H(s) = c^T (sI - A)^{-1} b``."""
    return complex(sys.c @ shifted_solve(sys.A, s, sys.b))


def eval_transfer_deriv(sys, s):
    """``H'(s) = -c^T (sI - A)^{-2} b``, via one left and one right solve."""
    v, w = shifted_solve_pair(sys.A, s, sys.b, sys.c)
    return complex(-(w @ v))


def is_stable(sys):
    lam, _ = eig_dense(sys.A)
    return bool(np.max(lam.real) < 0)


def h2_norm(sys):
    """H2 norm ``sqrt(c^T P c)`` with ``P`` the controllability Gramian.

    Evaluated as ``||U^H Q^H c||`` from a triangular factor of ``P`` so that
    small norms (error systems) keep their relative accuracy.
    """
    if not is_stable(sys):
        raise UnstableMatrix("H2 norm is undefined for an unstable system")
    Q, U = lyapunov_factor(sys.A, sys.b)
    return float(np.linalg.norm(U.conj().T @ (Q.conj().T @ sys.c)))


def h2_error(full, reduced):
    """``||H - H_r||_2`` through the block-diagonal error system.

    The two blocks are brought to Schur form separately so that the
    triangular factor of the error Gramian keeps the block structure.
    """
    for sys in (full, reduced):
        if not is_stable(sys):
            raise UnstableMatrix("H2 error needs two stable systems")
    S1, Q1 = spla.schur(full.A, output="complex")
    S2, Q2 = spla.schur(reduced.A, output="complex")
    S = spla.block_diag(S1, S2)
    Q = spla.block_diag(Q1, Q2)
    b = np.concatenate([full.b, reduced.b])
    c = np.concatenate([full.c, -reduced.c])
    Q, U = lyapunov_factor(None, b, schur=(S, Q))
    return float(np.linalg.norm(U.conj().T @ (Q.conj().T @ c)))


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for the spectrum of a synthetic stable system.

    ``n_pairs = round(pair_fraction * n / 2)`` complex pairs are drawn with
    natural frequency in ``pair_freq`` and damping ratio in
    ``pair_damping``; the remaining states get real poles in
    ``real_interval``.  Ranges are sampled log-uniformly when ``log_uniform``
    is set.  With ``scramble`` the block-diagonal realization is hidden by a
    random real similarity of condition number ``transform_cond``.
    """

    real_interval: tuple = (-10.0, -1.0)
    pair_fraction: float = 0.0
    pair_freq: tuple = (1.0, 100.0)
    pair_damping: tuple = (0.01, 0.5)
    log_uniform: bool = True
    scramble: bool = True
    transform_cond: float = 10.0

    PRESETS = ("cdlike", "diagonal", "real", "mixed")

    @classmethod
    def preset(cls, name):
        """Named presets.

        ``cdlike``   lightly damped pairs over four decades of frequency
        ``diagonal`` real poles in [-100, -0.1], unscrambled diagonal ``A``
        ``real``     real poles in [-10, -1], scrambled
        ``mixed``    half real poles, half moderately damped pairs
        """
        if name == "cdlike":
            return cls(
                real_interval=(-1e3, -1.0),
                pair_fraction=1.0,
                pair_freq=(1.0, 1e4),
                pair_damping=(0.005, 0.1),
            )
        if name == "diagonal":
            return cls(real_interval=(-100.0, -0.1), scramble=False)
        if name == "real":
            return cls()
        if name == "mixed":
            return cls(pair_fraction=0.5, pair_freq=(0.5, 50.0), pair_damping=(0.05, 0.7))
        raise BadSpec(f"unknown spectrum preset {name!r}; choose from {cls.PRESETS}")

    def validate(self):
        if not 0.0 <= self.pair_fraction <= 1.0:
            raise BadSpec("pair_fraction must lie in [0, 1]")
        if self.real_interval is not None:
            lo, hi = self.real_interval
            if not (lo <= hi < 0):
                raise BadSpec("real_interval must satisfy lo <= hi < 0")
        flo, fhi = self.pair_freq
        if not (0 < flo <= fhi):
            raise BadSpec("pair_freq must satisfy 0 < lo <= hi")
        zlo, zhi = self.pair_damping
        if not (0 < zlo <= zhi < 1):
            raise BadSpec("pair_damping must satisfy 0 < lo <= hi < 1")
        if self.transform_cond < 1:
            raise BadSpec("transform_cond must be >= 1")


def _draw(rng, lo, hi, size, log):
    if log:
        return np.exp(rng.uniform(np.log(lo), np.log(hi), size))
    return rng.uniform(lo, hi, size)


def synth_random_stable(n, seed, spec=None):
    """Seeded random stable system with a prescribed kind of spectrum.

    Parameters
    ----------
    n : int
        Order.
    seed : int
        Seed for ``numpy.random.default_rng``.
    spec : SpectrumSpec or str, optional
        Descriptor or preset name; defaults to ``SpectrumSpec()``.
    """
    if spec is None:
        spec = SpectrumSpec()
    elif isinstance(spec, str):
        spec = SpectrumSpec.preset(spec)
    elif not isinstance(spec, SpectrumSpec):
        raise BadSpec(f"expected a SpectrumSpec or preset name, got {type(spec).__name__}")
    spec.validate()
    if n < 1:
        raise BadSpec("order must be positive")
    rng = np.random.default_rng(seed)

    n_pairs = min(int(round(spec.pair_fraction * n / 2)), n // 2)
    n_real = n - 2 * n_pairs
    if n_real and spec.real_interval is None:
        raise BadSpec("real poles requested but real_interval is None")

    blocks = []
    if n_real:
        lo, hi = spec.real_interval
        mags = _draw(rng, -hi, -lo, n_real, spec.log_uniform)
        blocks.extend([[-m]] for m in np.sort(mags)[::-1])
    if n_pairs:
        freq = _draw(rng, *spec.pair_freq, n_pairs, spec.log_uniform)
        zeta = _draw(rng, *spec.pair_damping, n_pairs, spec.log_uniform)
        for w, z in zip(np.sort(freq), zeta):
            a, b = -z * w, w * np.sqrt(1 - z * z)
            blocks.append([[a, b], [-b, a]])
    B = spla.block_diag(*blocks)

    if spec.scramble and n > 1:
        Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
        Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        d = np.logspace(0, np.log10(spec.transform_cond), n)
        T = (Q1 * d) @ Q2
        A = np.linalg.solve(T.T, (T @ B).T).T
    else:
        A = B
    b = rng.standard_normal(n)
    c = rng.standard_normal(n)
    return LtiSystem(A, b, c)
