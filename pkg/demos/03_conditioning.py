# %% [markdown]
# # Conditioning along the iteration
#
# In primitive bases the reduced matrix is ``diag(sigma) - q e^T`` and its
# eigenvectors are the columns of ``diag(q) C`` with ``C`` the Cauchy matrix
# ``1/(sigma_i - mu_j)``.  How well the reduced poles are determined depends
# on ``kappa(C)`` and on the size of ``q``.  Both typically shrink as the
# shifts approach a fixed point.

# %%
import numpy as np

from irka import IrkaConfig, run_irka, synth_random_stable
from irka.io import write_history_csv

full = synth_random_stable(120, seed=0, spec="cdlike")

# %%
for r in (2, 10, 16):
    res = run_irka(full, IrkaConfig(r=r, init="logspace"))
    first, last = res.history[0], res.history[-1]
    print(f"r={r:2d} {str(res.status):9}  kappa_C {first.kappa_C:9.2e} -> {last.kappa_C:9.2e}"
          f"   |q| {first.q_norm:9.2e} -> {last.q_norm:9.2e}")

# %% [markdown]
# The full history of the last run, as written by the command line tool.

# %%
write_history_csv(res.history, "conditioning_r16.csv")
print(open("conditioning_r16.csv").read().splitlines()[0])
for rec in res.history[::10]:
    print(f"k={rec.k:3d}  d={rec.d:.2e}  kappa_C={rec.kappa_C:.2e}  kappa_V={rec.kappa_V:.2e}  cos={rec.cos_angle:.2e}")

# %% [markdown]
# ## Placing poles accurately
#
# The mirror feedback ``f`` puts the poles of ``diag(sigma) - f e^T``
# exactly at ``-sigma``.  A dense eigensolver only sees the matrix, whose
# norm grows with ``|f|``, so its absolute error grows too.  Refining those
# eigenvalues on the secular equation
# ``1 + sum_i f_i / (z - sigma_i) = 0`` removes that loss.

# %%
from irka import ShiftSet, companion_poles, feedback_vector, matching_distance

sig = ShiftSet([0.0999, 0.4072, 0.8277, 1.8993], [0.0916 + 0.1771j, 3.9552 + 1.0351j, 9.7150 + 2.4239j])
f = feedback_vector(sig)
dense = np.linalg.eigvals(np.diag(sig.values) - np.outer(f, np.ones(len(sig))))
print(f"|f| = {np.linalg.norm(f):.2e}")
print(f"dense eig error   {matching_distance(dense, -sig.values) / sig.max_abs():.2e}")
print(f"refined error     {matching_distance(companion_poles(sig, f), -sig.values) / sig.max_abs():.2e}")
