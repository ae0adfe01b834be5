"""
The rank envelope test on plain curves
======================================

A test vector is observed once and simulated ``s`` times under the null
model.  Here everything is Gaussian noise around a sine curve, and the
observed curve gets a bump, so the test should reject.
"""
import numpy as np

from rankenv import TestMatrix, run_rank_test

rng = np.random.default_rng(2024)
r = np.linspace(0, 1, 200)
s = 1999

# smooth null curves: random amplitude and phase
amp = 1 + 0.1 * rng.normal(size=(s + 1, 1))
phase = 0.05 * rng.normal(size=(s + 1, 1))
curves = amp * np.sin(2 * np.pi * (r + phase))
curves[0] += 0.4 * np.exp(-((r - 0.7) / 0.05) ** 2)

m = TestMatrix(curves, side="two-sided", args=r)
res = run_rank_test(m, alpha=0.05)
print(f"extreme rank of the data: {res.observed_rank}, critical rank: {res.critical_rank}")
print(f"p-interval ({res.p_minus:.4f}, {res.p_plus:.4f}], erc p-value {res.p_erc:.4f}")
print("decision:", res.decision.value)

# where does the observed curve leave the envelope?
out = ~res.envelope.contains(curves[0])
print("outside the 95% global envelope for r in", r[out].min().round(3), "...", r[out].max().round(3))

# The same curves without the bump: the observed row is just another draw.
curves[0] = amp[0] * np.sin(2 * np.pi * (r + phase[0]))
print("without the bump:", run_rank_test(TestMatrix(curves, args=r)).decision.value)
