"""
Continuity with respect to the data
===================================

Run pairs of solutions whose initial temperatures differ by
``eps cos(2 x1)`` and record the Besov distance ``Y(t)``. Smaller
perturbations stay smaller.
"""

from bousspec import BoussinesqParams, make_initial, twin_run

params = BoussinesqParams(alpha=0.95, beta=0.08)
init = make_initial("random", 64, seed=1, cutoff=6)

for eps in (1e-8, 1e-6, 1e-4):
    res = twin_run(params, init, eps, T=0.5, dt=2e-3, sample_every=25)
    print(f"eps={eps:.0e}  Y(0)={res.Y[0]:.3e}  Y(T)={res.Y[-1]:.3e}  Y(T)/eps={res.Y[-1] / eps:.4f}")
