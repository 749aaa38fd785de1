"""
Curve fitting for time-resolved PL and ODMR spectra
====================================================

Synthesizes a fluorescence decay trace and a two-dip ODMR spectrum with
realistic noise, runs the least-squares fitters, and overlays the fits.
"""

import numpy as np
import matplotlib.pyplot as plt

from planaremit.fit import (DecayTrace, OdmrParams, decay_model,
                            fit_exp_decay, fit_odmr, odmr_model)

rng = np.random.default_rng(2)

# --- lifetime trace: a exp(-(t-b)/tau) + c with 2% multiplicative noise
t = np.linspace(0.0, 15.0, 300)
counts = decay_model(t, 1500.0, 0.0, 2.1, 40.0)
counts = np.clip(counts * (1 + 0.02 * rng.standard_normal(t.size)), 0, None)

decay = fit_exp_decay(DecayTrace(t, counts))
print(f"lifetime fit: tau = {decay.tau_ns:.3f} ns (truth 2.1),"
      f" background = {decay.c:.1f}")

# --- ODMR: dips at D - E and D + E on a flat baseline
truth = OdmrParams(D_GHz=3.47, E_GHz=0.12, contrast_minus=0.09,
                   contrast_plus=0.07, width_GHz=0.06, baseline=1.0)
f = np.linspace(3.0, 4.0, 501)
pl = odmr_model(truth, f) * (1 + 0.008 * rng.standard_normal(f.size))

odmr = fit_odmr(np.column_stack([f, pl]))
print(f"ODMR fit: D = {odmr.D_GHz:.4f} GHz, E = {odmr.E_GHz:.4f} GHz"
      f" (truth 3.47, 0.12)")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.semilogy(t, counts, ".", ms=3, alpha=0.5, label="data")
ax1.semilogy(t, decay.model(t), "-", color="crimson", label="fit")
ax1.set_xlabel("time  (ns)")
ax1.set_ylabel("counts")
ax1.legend()

ax2.plot(f, pl, ".", ms=3, alpha=0.5, label="data")
ax2.plot(f, odmr_model(odmr, f), "-", color="crimson", label="fit")
ax2.set_xlabel("microwave frequency  (GHz)")
ax2.set_ylabel("normalized PL")
ax2.legend()

for ax in (ax1, ax2):
    ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig("lifetime_and_odmr_fitting.svg")
