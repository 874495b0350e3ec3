"""
Dyadic blocks and Besov norms
=============================

Split a random field into Littlewood-Paley blocks, rebuild it from the
blocks and compare Besov norms with different summability indices.
"""

import math

import numpy as np

from bousspec import BesovSpec, besov_norm, block, build_partition, get_grid, random_field
from bousspec.spectral import forward_transform, inverse_transform

grid = get_grid(128)
part = build_partition()
f = random_field(grid, seed=3, cutoff=40)
fh = forward_transform(f)

# blocks q = -1 .. qmax sum back to the field
qs = range(-1, part.qmax(grid) + 1)
blocks = [block(fh, q, part) for q in qs]
print("reconstruction error:", np.max(np.abs(inverse_transform(sum(blocks)) - f)))
for q, b in zip(qs, blocks):
    print(f"q={q:2d}  |Delta_q f|_2 = {math.sqrt(np.sum(np.abs(b) ** 2)):.5f}")

# B^0_{2,2} is equivalent to L^2; r = 1 dominates r = inf
print("L2 norm:", math.sqrt(np.mean(f**2)))
for r in (1.0, 2.0, math.inf):
    print(f"B^0_(2,{r:g}) = {besov_norm(f, BesovSpec(0.0, 2.0, r), part):.5f}")
