import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from irka import (
    IrkaConfig,
    LtiSystem,
    ShiftSet,
    Status,
    default_init,
    h2_error,
    h2_norm,
    irka_step,
    matching_distance,
    realify,
    reflect,
    run_irka,
    synth_random_stable,
)
from irka.errors import RankCollapse
from support import CYCLE_POINT


def sym2_error(a):
    """Optimal first-order H2 error for H(s) = 1/(s+1) + 1/(s+2) with pole -a."""
    S = 1 / (1 + a) + 1 / (2 + a)
    return np.sqrt(max(17 / 12 - 2 * a * S**2, 0.0))


def sym2_minimizer():
    grid = np.linspace(0.05, 10, 4000)
    a0 = grid[np.argmin([sym2_error(a) for a in grid])]
    res = minimize_scalar(sym2_error, bracket=(a0 - 0.01, a0, a0 + 0.01), tol=1e-12)
    return res.x, res.fun


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(r=0),
        dict(r=2, tol=0),
        dict(r=2, max_iter=0),
        dict(r=2, update_mode="fast"),
        dict(r=2, stop_rule="never"),
        dict(r=2, init="zeros"),
        dict(r=2, cycle_max_period=1),
        dict(r=2, alpha=1.5),
    ],
)
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        IrkaConfig(**kwargs).validate(10)


def test_config_r_exceeds_n():
    with pytest.raises(ValueError, match="exceeds"):
        IrkaConfig(r=3).validate(2)


def test_status_strings():
    assert str(Status.converged()) == "Converged"
    assert str(Status.max_iter()) == "MaxIter"
    assert str(Status.cycle(2)) == "Cycle(2)"
    assert str(Status.failed("x")) == "Failed(x)"


def test_scalar_fixture(scalar_sys):
    res = run_irka(scalar_sys, IrkaConfig(r=1, tol=1e-10), init=ShiftSet([7.0]))
    final, realified, history, status = res
    assert status.kind == "Converged"
    assert final.sigma.values[0] == pytest.approx(1.0, abs=1e-12)
    assert h2_error(scalar_sys, realified) <= 1e-12


def test_sym2_matches_brute_force(sym2):
    a_star, e_star = sym2_minimizer()
    res = run_irka(sym2, IrkaConfig(r=1, tol=1e-12))
    assert res.status.kind == "Converged"
    pole = res.final.mu.values[0].real
    assert abs(-pole - a_star) <= 1e-6
    assert h2_error(sym2, res.realified) <= e_star * (1 + 1e-8)


def test_exact_recovery_small():
    sys = synth_random_stable(6, 3, "cdlike")
    lam = np.linalg.eigvals(sys.A)
    init = ShiftSet.from_values(-lam * 1.05)
    res = run_irka(sys, IrkaConfig(r=6, tol=1e-10), init=init)
    assert res.status.kind == "Converged"
    assert h2_error(sys, res.realified) <= 1e-8 * h2_norm(sys)


def test_fixed_point_and_hermite_at_convergence():
    sys = synth_random_stable(30, 3, "cdlike")
    tol = 1e-8
    res = run_irka(sys, IrkaConfig(r=4, tol=tol, max_iter=200))
    assert res.status.kind == "Converged"
    f = res.final
    assert matching_distance(f.sigma, reflect(f.mu)) <= tol * f.sigma.max_abs() * 1.0001
    for m in f.mu.values:
        z = -m
        h, hr = sys.transfer(z), f.transfer(z)
        assert abs(h - hr) <= 10 * tol * (1 + abs(h))
        dh, dhr = sys.transfer_deriv(z), f.transfer_deriv(z)
        assert abs(dh - dhr) <= 10 * tol * (1 + abs(h))


def test_history_invariants():
    sys = synth_random_stable(25, 8, "mixed")
    res = run_irka(sys, IrkaConfig(r=5, tol=1e-8, max_iter=60, init="random", seed=3))
    assert res.history
    for k, rec in enumerate(res.history):
        assert rec.k == k
        assert rec.h <= rec.d
        s = rec.sigma_in.values
        p = rec.sigma_in.conj_partner()
        assert np.array_equal(s[p], np.conj(s))
        assert np.all(s.real > 0)


def test_realified_transfer_matches(rng):
    sys = synth_random_stable(20, 2, "cdlike")
    res = run_irka(sys, IrkaConfig(r=6, tol=1e-8))
    R = res.realified
    assert np.isrealobj(R.A)
    z = 0.5 + rng.standard_normal(20) + 1j * rng.standard_normal(20) * 5
    for s in z:
        ref = res.final.transfer(s)
        assert abs(R.transfer(s) - ref) <= 1e-10 * abs(ref)


def test_blended_alpha_one_is_vanilla():
    sys = synth_random_stable(20, 4, "cdlike")
    a = run_irka(sys, IrkaConfig(r=4, max_iter=15))
    b = run_irka(sys, IrkaConfig(r=4, max_iter=15, update_mode="blended", alpha=1.0))
    assert len(a.history) == len(b.history)
    for ra, rb in zip(a.history, b.history):
        assert ra.sigma_in == rb.sigma_in


def test_blended_verify_kv_residual():
    sys = synth_random_stable(20, 4, "cdlike")
    res = run_irka(sys, IrkaConfig(r=4, max_iter=10, update_mode="blended", alpha=0.6, verify=True))
    kv = [rec.kv_residual for rec in res.history]
    assert kv and all(v < 1e-12 for v in kv)
    assert all(rec.alpha_used == 0.6 for rec in res.history)


def test_backoff_schedule_bounds():
    sys = synth_random_stable(40, 1, "cdlike")
    res = run_irka(sys, IrkaConfig(r=8, max_iter=40, update_mode="blended", alpha="backoff"))
    for prev, rec in zip(res.history, res.history[1:]):
        assert 2.0**-10 <= rec.alpha_used <= 1.0
        assert rec.alpha_used in (1.0, prev.alpha_used, prev.alpha_used / 2, 2.0**-10)


def test_hausdorff_and_certificate_stop():
    sys = synth_random_stable(30, 3, "cdlike")
    for rule in ("hausdorff_then_matching", "certificate"):
        res = run_irka(sys, IrkaConfig(r=4, tol=1e-8, max_iter=200, stop_rule=rule))
        assert res.status.kind == "Converged"
    last = res.history[-1]
    assert last.eps_bullet <= 1e-8


def test_cycle_detected(cycle_sys):
    res = run_irka(cycle_sys, IrkaConfig(r=1, tol=1e-10, max_iter=20), init=ShiftSet([CYCLE_POINT]))
    assert res.status == Status.cycle(2)
    assert len(res.history) <= 20
    d = [rec.d for rec in res.history]
    assert res.final is not None and min(d) > 1.0


def test_rank_collapse_becomes_failed():
    sys = LtiSystem(np.diag([-1.0, -2.0]), [1.0, 0.0], [1.0, 1.0])
    with pytest.raises(RankCollapse) as info:
        irka_step(sys, ShiftSet([1.0, 3.0]), k=4)
    assert info.value.iteration == 4
    assert "iteration 4" in str(info.value)
    res = run_irka(sys, IrkaConfig(r=2), init=ShiftSet([1.0, 3.0]))
    assert res.status.kind == "Failed"
    assert res.history == []


def test_max_iter_status():
    sys = synth_random_stable(40, 1, "cdlike")
    res = run_irka(sys, IrkaConfig(r=8, tol=1e-14, max_iter=3))
    assert res.status.kind == "MaxIter" and len(res.history) == 3


def test_default_init():
    sys = LtiSystem(np.diag([-1.0, -10.0, -100.0]), np.ones(3), np.ones(3))
    s = default_init(sys, 3, "logspace")
    np.testing.assert_allclose(s.values, [1, 10, 100])
    a = default_init(sys, 3, "random", seed=9)
    b = default_init(sys, 3, "random", seed=9)
    assert a == b and a.is_working() and len(a) == 3
    with pytest.raises(ValueError):
        default_init(sys, 2, "nope")


def test_runs_are_deterministic():
    sys = synth_random_stable(30, 6, "cdlike")
    cfg = IrkaConfig(r=6, init="random", seed=4, max_iter=30)
    a, b = run_irka(sys, cfg), run_irka(sys, cfg)
    assert [r.d for r in a.history] == [r.d for r in b.history]
    assert a.final.sigma == b.final.sigma


def test_realify_real_pair_blocks():
    sys = synth_random_stable(10, 0, "cdlike")
    res = run_irka(sys, IrkaConfig(r=4, max_iter=5))
    R = realify(res.final)
    assert R.n == 4
    np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(R.A)), np.sort_complex(res.final.mu.values), rtol=1e-12)


def test_default_init_single_modulus():
    # a lone conjugate pair has one eigenvalue modulus
    sys = LtiSystem([[-1.0, 5.0], [-5.0, -1.0]], [1.0, 0.0], [0.0, 1.0])
    s = default_init(sys, 2, "logspace")
    assert s.values[1] / s.values[0] == pytest.approx(4.0)
    res = run_irka(sys, IrkaConfig(r=2, tol=1e-10))
    assert res.status.kind == "Converged"
    assert h2_error(sys, res.realified) <= 1e-8 * h2_norm(sys)
