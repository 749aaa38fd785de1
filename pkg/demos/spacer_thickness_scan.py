"""Scan the oxide spacer of the reflective cavity stack.

Sweeps the SiO2 spacer between the Al mirror and the emitter flake,
plotting the band-averaged rate enhancement and golden-section refining
the optimum.  Uses the bundled rdc50 preset as the base configuration.
"""

import matplotlib.pyplot as plt

from planaremit.cli import load_config
from planaremit.sweep import SweepSpec, evaluate_metric, refine_optimum, run_sweep

config = load_config("rdc50")
spec = SweepSpec.from_range("layers[3].thickness_nm", 0.0, 140.0, 10.0,
                            "band_avg_purcell")
result = run_sweep(spec, config)
best = refine_optimum(result, lambda v: evaluate_metric(config, spec, v),
                      tolerance=0.25)

t = [r.parameter_value for r in result.rows]
F = [r.metric_value for r in result.rows]

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(t, F, "o-", ms=5)
ax.axvline(best, color="crimson", ls="--",
           label=f"refined optimum: {best:.1f} nm")
ax.set_xlabel("spacer thickness  (nm)")
ax.set_ylabel("band-averaged rate enhancement")
ax.legend()
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig("spacer_thickness_scan.svg")
print(f"grid argmax {result.argmax_value:.0f} nm, refined {best:.2f} nm")
