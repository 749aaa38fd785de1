"""Plane-wave optics of planar layer stacks.

Conventions (pinned by the test suite):
  * time dependence exp(-i w t);
  * z is measured from the top interface, positive downward, so a wave
    travelling along its propagation direction carries exp(+i kz * z);
  * incidence is from the ``above`` half-space;
  * the in-plane variable u is the in-plane wavevector divided by
    (n_ref * k0).  ``stack_rt`` and ``field_profile`` use
    n_ref = Re(n_above), i.e. u = sin(incidence angle);
  * tangential-field amplitude convention: for s-polarization the
    amplitudes are E_y, for p-polarization H_y, so every interface has
    r = (eta1 - eta2)/(eta1 + eta2) and t = 1 + r with the admittance
    eta = kz (s) or kz / n^2 (p).

Strongly evanescent waves are handled with the interface recursion
(Rouard/Airy) form instead of raw matrix products, so nothing ever
multiplies a growing exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import Material

__all__ = [
    "Layer",
    "Stack",
    "PlaneWaveResult",
    "FieldSample",
    "axial_wavenumber",
    "fresnel",
    "stack_rt",
    "field_profile",
]


@dataclass(frozen=True)
class Layer:
    """Finite layer; half-spaces are represented on the Stack itself."""

    material: Material
    thickness_nm: float

    def __post_init__(self):
        if not np.isfinite(self.thickness_nm) or self.thickness_nm <= 0:
            raise ValueError(
                f"layer {self.material.name!r}: thickness must be finite and > 0, "
                f"got {self.thickness_nm}"
            )


@dataclass(frozen=True)
class Stack:
    """Ordered layers between two semi-infinite half-spaces.

    ``layers`` runs bottom-to-top: layers[0] sits on the ``below``
    half-space, layers[-1] touches the ``above`` half-space.
    """

    below: Material
    layers: tuple[Layer, ...]
    above: Material

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def total_thickness_nm(self) -> float:
        return float(sum(l.thickness_nm for l in self.layers))

    def depth_of_layer_top(self, i: int) -> float:
        """Depth (from the top interface) of the top of layers[i]."""
        return float(sum(l.thickness_nm for l in self.layers[i + 1:]))

    def top_to_bottom(self) -> tuple[Layer, ...]:
        return tuple(reversed(self.layers))


@dataclass(frozen=True)
class PlaneWaveResult:
    r: complex
    t: complex
    R: float
    T: float
    A: float


@dataclass(frozen=True)
class FieldSample:
    """Field at one depth: tangential amplitude pair and |E|^2."""

    forward: complex        # amplitude travelling +z (downward)
    backward: complex       # amplitude travelling -z (upward)
    psi: complex            # total tangential field (E_y for s, H_y for p)
    e_tangential: complex   # tangential E component
    intensity: float        # |E|^2 normalized to unit incident |E|^2


def axial_wavenumber(index, u, k0, n_ref):
    """kz = k0*sqrt(index^2 - (n_ref*u)^2), branch Im >= 0 (Re >= 0 if Im = 0)."""
    arg = np.asarray(index, dtype=complex) ** 2 - (n_ref * np.asarray(u)) ** 2
    kz = k0 * np.sqrt(arg)
    kz = np.where(kz.imag < 0, -kz, kz)
    if kz.ndim == 0:
        return complex(kz)
    return kz


def _admittance(pol, index, kz):
    if pol == "s":
        return kz
    if pol == "p":
        return kz / np.asarray(index, dtype=complex) ** 2
    raise ValueError(f"polarization must be 's' or 'p', got {pol!r}")


def fresnel(pol, n1, n2, u, n_ref, k0: float = 1.0):
    """Single-interface amplitude coefficients in the tangential convention.

    r_s = (kz1 - kz2)/(kz1 + kz2);
    r_p = (n2^2 kz1 - n1^2 kz2)/(n2^2 kz1 + n1^2 kz2); t = 1 + r for both.
    """
    kz1 = axial_wavenumber(n1, u, k0, n_ref)
    kz2 = axial_wavenumber(n2, u, k0, n_ref)
    e1 = _admittance(pol, n1, kz1)
    e2 = _admittance(pol, n2, kz2)
    r = (e1 - e2) / (e1 + e2)
    return r, 1.0 + r


def _solve_amplitudes(indices, thicknesses_nm, pol, k0, u, n_ref):
    """Amplitudes for media [incident, layers..., final] (top to bottom).

    Returns (r, t, A, B, kz) where A[j], B[j] are the down/up amplitudes
    at the top of layer j (0-based over the finite layers) and kz has one
    entry per medium.  Vectorized over u.
    """
    u = np.asarray(u, dtype=float)
    kz = [axial_wavenumber(idx, u, k0, n_ref) for idx in indices]
    eta = [_admittance(pol, idx, z) for idx, z in zip(indices, kz)]
    nlay = len(thicknesses_nm)

    # interface coefficients between medium j and j+1; the only 0/0 is two
    # index-matched media at grazing incidence, where the limit is r = 0
    def _iface(a, b):
        num, den = a - b, a + b
        with np.errstate(invalid="ignore"):
            return np.where(den == 0, 0.0, num / np.where(den == 0, 1.0, den))

    r_if = [_iface(eta[j], eta[j + 1]) for j in range(nlay + 1)]

    # upward Rouard pass: Rtop[j] = reflection looking down from the top
    # inside layer j (1-based medium index j+1), including its own phase.
    rtop = [None] * nlay
    rbelow = r_if[nlay]  # at the bottom of the deepest layer
    for j in range(nlay - 1, -1, -1):
        phase = np.exp(2j * kz[j + 1] * thicknesses_nm[j])
        rtop[j] = rbelow * phase
        rbelow = (r_if[j] + rtop[j]) / (1.0 + r_if[j] * rtop[j])
    r = rbelow

    # downward pass for the layer amplitudes and the transmitted wave
    A = [None] * nlay
    B = [None] * nlay
    a_prev = np.ones_like(r)  # downward amplitude just above each interface
    for j in range(nlay):
        A[j] = (1.0 + r_if[j]) * a_prev / (1.0 + r_if[j] * rtop[j])
        B[j] = rtop[j] * A[j]
        a_prev = A[j] * np.exp(1j * kz[j + 1] * thicknesses_nm[j])
    t = (1.0 + r_if[nlay]) * a_prev
    return r, t, A, B, kz, eta


def _stack_media(stack: Stack, wavelength_nm: float):
    """(indices, thicknesses) ordered incident-side first (top to bottom)."""
    layers = stack.top_to_bottom()
    indices = [stack.above.index(wavelength_nm)]
    indices += [l.material.index(wavelength_nm) for l in layers]
    indices += [stack.below.index(wavelength_nm)]
    thicknesses = [l.thickness_nm for l in layers]
    return indices, thicknesses


def stack_rt(stack: Stack, pol, wavelength_nm, u) -> PlaneWaveResult:
    """Reflection/transmission for incidence from ``above`` at sin(angle) = u."""
    k0 = 2.0 * np.pi / wavelength_nm
    n_ref = float(np.real(stack.above.index(wavelength_nm)))
    indices, dz = _stack_media(stack, wavelength_nm)
    r, t, _, _, kz, eta = _solve_amplitudes(indices, dz, pol, k0, u, n_ref)
    flux_in = np.real(eta[0])
    flux_out = np.real(eta[-1])
    R = np.abs(r) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.where(flux_in > 0, flux_out / flux_in * np.abs(t) ** 2, 0.0)
    A = 1.0 - R - T
    if np.ndim(u) == 0:
        return PlaneWaveResult(complex(r), complex(t), float(R), float(T), float(A))
    return PlaneWaveResult(r, t, R, T, A)


def field_profile(stack: Stack, pol, wavelength_nm, u, z_nm, side: str = "auto"):
    """Field amplitudes at depth z (nm, from the top interface, downward).

    Normalized to a unit-amplitude incident wave from above.  ``side``
    selects the medium when z falls exactly on an interface: "auto"
    (medium below), "above" or "below".
    """
    if side not in ("auto", "above", "below"):
        raise ValueError(f"side must be 'auto', 'above' or 'below', got {side!r}")
    k0 = 2.0 * np.pi / wavelength_nm
    n_above = stack.above.index(wavelength_nm)
    n_ref = float(np.real(n_above))
    indices, dz = _stack_media(stack, wavelength_nm)
    r, t, A, B, kz, _ = _solve_amplitudes(indices, dz, pol, k0, u, n_ref)

    bounds = np.concatenate([[0.0], np.cumsum(dz)])  # interface depths
    z_total = bounds[-1]

    def medium_of(z):
        if z < 0 or (z == 0 and side == "above"):
            return 0
        if z > z_total or (z == z_total and side != "above"):
            return len(dz) + 1
        if side == "above":
            j = int(np.searchsorted(bounds, z, side="left"))
        else:
            j = int(np.searchsorted(bounds, z, side="right"))
        return min(max(j, 1), len(dz))

    def sample(z) -> FieldSample:
        m = medium_of(z)
        if m == 0:
            a, b, zref = 1.0 + 0j, complex(r), 0.0
        elif m == len(dz) + 1:
            a, b, zref = complex(t), 0.0 + 0j, z_total
        else:
            a, b, zref = complex(A[m - 1]), complex(B[m - 1]), float(bounds[m - 1])
        kzm = complex(kz[m]) if np.ndim(kz[m]) == 0 else complex(kz[m])
        fwd = a * np.exp(1j * kzm * (z - zref))
        bwd = b * np.exp(-1j * kzm * (z - zref))
        psi = fwd + bwd
        nm = indices[m]
        if pol == "s":
            e_t = psi
            inten = abs(psi) ** 2
        else:
            kpar = n_ref * u * k0
            ex = (kzm / (k0 * nm**2)) * (fwd - bwd)
            ez = -(kpar / (k0 * nm**2)) * psi
            # incident p wave of unit H has |E| = 1/n_above (real n_above)
            scale = float(np.real(n_above)) ** 2
            e_t = ex * np.real(n_above)
            inten = (abs(ex) ** 2 + abs(ez) ** 2) * scale
        return FieldSample(complex(fwd), complex(bwd), complex(psi),
                           complex(e_t), float(inten))

    if np.ndim(z_nm) == 0:
        return sample(float(z_nm))
    return [sample(float(z)) for z in np.asarray(z_nm, dtype=float)]
