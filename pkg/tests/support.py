import numpy as np

from irka import LtiSystem, ShiftSet

# r=1 IRKA on this 4-state system has an attracting 2-cycle through
# CYCLE_POINT and about 10.1657; found by scanning random diagonal systems
# and refined with a bracketing root solve of F(F(x)) = x.
CYCLE_POLES = [-0.9459487201686652, -52.2449736837976, -0.14267004844099773, -2.4022734403411037]
CYCLE_RESIDUES = [-1.6860577771053475, -0.2245812911868828, 1.172521251313048, -0.00880242360408393]
CYCLE_POINT = 5.297954293159043


def random_working_set(rng, r, pair_prob=0.5, lo=0.1, hi=10.0):
    """Conjugation-closed right-half-plane set of exactly ``r`` shifts."""
    reals, uppers = [], []
    while len(reals) + 2 * len(uppers) < r:
        if r - len(reals) - 2 * len(uppers) >= 2 and rng.random() < pair_prob:
            uppers.append(complex(rng.uniform(lo, hi), rng.uniform(lo, hi)))
        else:
            reals.append(rng.uniform(lo, hi))
    return ShiftSet(reals, uppers)


def random_stable(rng, n):
    """Small dense stable system with a random real spectrum shift."""
    A = rng.standard_normal((n, n))
    A -= (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.5, 2.0)) * np.eye(n)
    return LtiSystem(A, rng.standard_normal(n), rng.standard_normal(n))


def spread_working_set(rng, r, lo=0.1, hi=10.0, pair_prob=0.5, jitter=0.25):
    """Random working set whose moduli sit on a jittered log grid over [lo, hi].

    Neighbouring shifts differ by a roughly fixed ratio and pairs stay at
    least 0.2 rad away from the axes, the regime where mirror placement is
    well conditioned.  Uniform boxes produce tight clusters whose placed
    poles move by O(1) under roundoff-sized changes of the feedback.
    """
    slots = []
    while sum(slots) < r:
        slots.append(2 if r - sum(slots) >= 2 and rng.random() < pair_prob else 1)
    m = len(slots)
    step = np.log(hi / lo) / max(m - 1, 1)
    logs = np.linspace(np.log(lo), np.log(hi), m) + rng.uniform(-jitter, jitter, m) * step
    reals, uppers = [], []
    for mod, width in zip(np.exp(logs), slots):
        if width == 1:
            reals.append(mod)
        else:
            uppers.append(mod * np.exp(1j * rng.uniform(0.2, 1.2)))
    return ShiftSet(reals, uppers)
