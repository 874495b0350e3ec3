"""
Mapping the admissible exponent region
======================================

Rasterize the (alpha, beta) region on a grid and mark which of the three
upper bounds is binding. Saves ``region_map.png`` when matplotlib is present.
"""

import numpy as np

from bousspec.region import ALPHA_MIN, R0, RegionQuery, beta_bounds, pi_contains

print(f"alpha threshold {ALPHA_MIN:.16f}, r0 = {R0:.15f}")

# one verdict per grid point
alphas = np.linspace(0.85, 1.0, 121)
betas = np.linspace(0.0, 0.3, 121)
inside = np.array([[pi_contains(RegionQuery(a, b)).inside for a in alphas] for b in betas])
print(f"{inside.mean():.1%} of the window lies inside")

# the upper beta bound is the smallest of b1, b2, b3
for a in (0.9, 0.95, 0.99):
    b = beta_bounds(a)
    top = min(b, key=b.get)
    print(f"alpha={a}: beta in ]{1 - a:.4f}, {b[top]:.4f}], binding {top}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.contourf(alphas, betas, inside, levels=[0.5, 1.5], colors=["tab:blue"], alpha=0.5)
    ax.plot(alphas, 1 - alphas, "k--", lw=1, label="beta = 1 - alpha")
    ax.set_xlabel("alpha")
    ax.set_ylabel("beta")
    ax.legend()
    fig.savefig("region_map.png", dpi=120, bbox_inches="tight")
    print("wrote region_map.png")
