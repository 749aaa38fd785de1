"""
Dipole above a mirror: interference with the image dipole
==========================================================

A dipole at height d above a perfect mirror interferes with its own
reflection.  The emission rate oscillates with 2kd and has a closed-form
limit (the image-dipole result), which the layered-stack solver should
reproduce without knowing anything about images.
"""

import numpy as np
import matplotlib.pyplot as plt

from planaremit import EmitterSpec, Layer, Material, Stack, purcell_factor

lam = 810.0  # nm
k = 2 * np.pi / lam

# closed-form image-dipole rates, x = 2 k d
def F_parallel(x):
    return 1 - 1.5 * (np.sin(x) / x + np.cos(x) / x**2 - np.sin(x) / x**3)

def F_perpendicular(x):
    return 1 - 3 * (np.cos(x) / x**2 - np.sin(x) / x**3)

# a "perfect" mirror is just a very good metal
vac = Material.constant("vacuum", 1.0)
pec = Material.constant("mirror", 1e-4, 1e4)

distances = np.linspace(0.02 * lam, 2.0 * lam, 80)
par, perp = [], []
for d in distances:
    pad = max(4 * lam, 2 * d)  # thick spacer so the top interface is far away
    stack = Stack(below=pec, layers=(Layer(vac, pad),), above=vac)
    par.append(purcell_factor(stack, EmitterSpec(0, pad - d, "in_plane_average", 1.0), lam))
    perp.append(purcell_factor(stack, EmitterSpec(0, pad - d, "out_of_plane", 1.0), lam))

x = 2 * k * distances
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(distances / lam, par, "o", ms=4, label="solver, in-plane")
ax.plot(distances / lam, perp, "s", ms=4, label="solver, out-of-plane")
ax.plot(distances / lam, F_parallel(x), "-", lw=1, color="k")
ax.plot(distances / lam, F_perpendicular(x), "--", lw=1, color="k",
        label="image-dipole closed form")
ax.set_xlabel("distance to mirror  (wavelengths)")
ax.set_ylabel("normalized emission rate F")
ax.legend()
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig("mirror_dipole_interference.svg")
print("max deviation from closed form:",
      max(np.max(np.abs(par - F_parallel(x))),
          np.max(np.abs(perp - F_perpendicular(x)))))
