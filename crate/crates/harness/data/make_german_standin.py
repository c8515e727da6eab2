"""Writes german_standin.data-numeric: 1000 rows of 24 integer attributes plus a 1/2 label,
laid out like the UCI numeric German credit file. Labels follow a logistic model on the
standardized attributes with published posterior-mean coefficients."""

import numpy as np

BETA = [-1.20, -0.73, 0.42, -0.41, 0.13, -0.36, -0.17, -0.15, 0.01, 0.18, -0.11, -0.22, 0.12,
        0.03, -0.13, -0.29, 0.28, -0.30, 0.30, 0.27, 0.12, -0.06, -0.09, -0.03, -0.02]

# (low, high) integer ranges; (0, 1) columns are indicators.
RANGES = [(1, 4), (4, 72), (0, 4), (2, 184), (1, 5), (1, 5), (1, 4), (1, 4), (1, 4), (19, 75),
          (1, 3), (1, 4), (1, 2), (1, 2), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1),
          (0, 1), (0, 1), (0, 1), (0, 1)]

rng = np.random.default_rng(20191)
n = 1000
latent = rng.standard_normal((n, 6)) @ rng.standard_normal((6, 24)) * 0.5 + rng.standard_normal((n, 24))
cols = []
for j, (lo, hi) in enumerate(RANGES):
    u = (np.argsort(np.argsort(latent[:, j])) + 0.5) / n
    if hi - lo == 1:
        cols.append((u > rng.uniform(0.3, 0.8)).astype(int))
    else:
        cols.append(np.floor(lo + u ** rng.uniform(0.7, 1.6) * (hi - lo + 1)).clip(lo, hi).astype(int))
x = np.column_stack(cols)
z = (x - x.mean(0)) / x.std(0, ddof=1)
logit = BETA[0] + z @ np.array(BETA[1:])
y = (rng.uniform(size=n) < 1 / (1 + np.exp(-logit))).astype(int) + 1

with open("german_standin.data-numeric", "w") as f:
    for row, label in zip(x, y):
        f.write("".join(f"{v:4d}" for v in row) + f"{label:4d}\n")
