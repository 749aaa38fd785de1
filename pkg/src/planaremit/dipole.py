"""Point-dipole emission inside a planar layer stack.

The total normalized decay rate (Purcell factor) and the power routing
are computed from the standard dissipated-power integrals over the
normalized in-plane wavenumber u = k_par / (n_host * k0).  With a(+/-)
the reflection of the sub-stack above/below the emitter plane
(propagation phase to the plane included) and l = sqrt(1 - u^2):

  F_perp = Re Int (3/2) (u^3/l) (1+ap+)(1+ap-) / (1 - ap+ ap-) du
  F_par  = Re Int (3/4) (u/l) [ (1+as+)(1+as-) / (1 - as+ as-)
                        + l^2 (1-ap+)(1-ap-) / (1 - ap+ ap-) ] du

The p-wave combination for the in-plane dipole carries (1 - a) factors
because its up/down p amplitudes have opposite sign.  Power radiated
into a half-space is the u < 1 part of the corresponding one-sided
amplitude, weighted by the power transmissivity of that sub-stack;
everything else (absorption, guided and evanescent channels) counts as
lost.  The integrand has a branch point at u = 1; it is integrated with
sqrt-substituted panels on either side plus an adaptive tail that stops
once its contribution is negligible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .materials import Material
from .quadrature import QuadratureError, adaptive_gauss_kronrod
from .tmm import Stack, _solve_amplitudes

__all__ = [
    "ORIENTATIONS",
    "EmitterSpec",
    "QuadratureSpec",
    "EmissionResult",
    "FarField",
    "UnsupportedConfigurationError",
    "half_stack_reflection",
    "purcell",
    "emission",
    "far_field",
    "collection_efficiency",
]

ORIENTATIONS = ("in_plane_average", "out_of_plane", "isotropic_average")

# Materials that are exactly lossless get this extinction floor inside
# the emission integrals only, moving guided-mode poles just off the
# real u axis (their residue then counts as lost power, which is the
# physical epsilon -> 0+ limit).  1e-6 keeps the pole Lorentzians wide
# enough for the adaptive quadrature to resolve in a handful of
# bisections while perturbing radiative rates at the 1e-7 level.
_LOSS_FLOOR = 1e-6


class UnsupportedConfigurationError(ValueError):
    """Emitter placement the dissipated-power formalism cannot handle."""


@dataclass(frozen=True)
class EmitterSpec:
    """Dipole position and emission model inside a Stack.

    depth_in_layer_nm is measured downward from the top of the host layer.
    """

    host_layer: int
    depth_in_layer_nm: float
    orientation: str = "in_plane_average"
    quantum_efficiency_eta0: float = 1.0

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(
                f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}"
            )
        if self.depth_in_layer_nm < 0:
            raise ValueError("depth_in_layer_nm must be >= 0")
        if not 0.0 <= self.quantum_efficiency_eta0 <= 1.0:
            raise ValueError("quantum_efficiency_eta0 must be in [0, 1]")


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the u-integrals."""

    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    max_depth: int = 45
    u_max: float = 10.0
    branch_delta: float = 1e-3
    tail_rel_cut: float = 1e-12


@dataclass(frozen=True)
class EmissionResult:
    purcell_F: float
    frac_up: float
    frac_down: float
    frac_lost: float
    collection_eta: float | None = None


@dataclass(frozen=True)
class FarField:
    """Upper-half-space angular power density, phi-averaged.

    Normalized so that Int p dOmega = frac_up * purcell_F.
    """

    theta_rad: np.ndarray
    p: np.ndarray
    n_above: float
    upward_power: float


class _HalfStacks:
    """Reflection/transmission of the sub-stacks around the emitter plane."""

    def __init__(self, stack: Stack, emitter: EmitterSpec, wavelength_nm: float):
        if not 0 <= emitter.host_layer < len(stack.layers):
            raise ValueError(
                f"host_layer {emitter.host_layer} out of range for a stack of "
                f"{len(stack.layers)} layers"
            )
        host = stack.layers[emitter.host_layer]
        if emitter.depth_in_layer_nm > host.thickness_nm:
            raise ValueError(
                "emitter depth exceeds host layer thickness "
                f"({emitter.depth_in_layer_nm} > {host.thickness_nm} nm)"
            )
        n_host = host.material.index(wavelength_nm)
        if abs(n_host.imag) >= 1e-6:
            raise UnsupportedConfigurationError(
                f"host layer {host.material.name!r} is lossy at "
                f"{wavelength_nm} nm (k = {n_host.imag:.3g}); the emitter must "
                "sit in a lossless layer"
            )
        self.wavelength_nm = float(wavelength_nm)
        self.k0 = 2.0 * np.pi / wavelength_nm
        self.n_host = float(n_host.real)
        self.k1 = self.n_host * self.k0
        self.d_up = float(emitter.depth_in_layer_nm)
        self.d_dn = float(host.thickness_nm - emitter.depth_in_layer_nm)
        self.n_above = stack.above.index(wavelength_nm)

        def floored(idx: complex) -> complex:
            return idx.real + 1j * max(idx.imag, _LOSS_FLOOR)

        i = emitter.host_layer
        up_layers = stack.layers[i + 1:]           # bottom-to-top above host
        dn_layers = stack.layers[:i][::-1]         # top-to-bottom below host
        self._up_media = [complex(self.n_host)] + \
            [l.material.index(wavelength_nm) for l in up_layers] + [self.n_above]
        self._up_d = [l.thickness_nm for l in up_layers]
        self._dn_media = [complex(self.n_host)] + \
            [l.material.index(wavelength_nm) for l in dn_layers] + \
            [stack.below.index(wavelength_nm)]
        self._dn_d = [l.thickness_nm for l in dn_layers]
        # pole-regularized copies, used only in the total-rate integrand
        self._up_media_fl = [self._up_media[0]] + \
            [floored(m) for m in self._up_media[1:]]
        self._dn_media_fl = [self._dn_media[0]] + \
            [floored(m) for m in self._dn_media[1:]]

    def _solve(self, media, dz, pol, u):
        return _solve_amplitudes(media, dz, pol, self.k0, u, self.n_host)

    def kz_host(self, u):
        u = np.asarray(u, dtype=float)
        kz = self.k1 * np.sqrt((1.0 - u**2) + 0j)
        return np.where(kz.imag < 0, -kz, kz)

    @staticmethod
    def _both_pol_r(media, dz, u, k0, n_ref):
        """Rouard recursion for s and p at once (shared kz per medium)."""
        u2 = (n_ref * np.asarray(u, dtype=float)) ** 2
        kz = []
        eta_p = []
        for idx in media:
            z = k0 * np.sqrt(idx**2 - u2 + 0j)
            z = np.where(z.imag < 0, -z, z)
            kz.append(z)
            eta_p.append(z / idx**2)
        def _fresnel(a, b):
            # 0/0 happens only when both media are index-matched at grazing
            # incidence (kz -> 0 on each side); the limit there is r = 0.
            num, den = a - b, a + b
            with np.errstate(invalid="ignore"):
                r = np.where(den == 0, 0.0, num / np.where(den == 0, 1.0, den))
            return r

        nlay = len(dz)
        rs = _fresnel(kz[nlay], kz[nlay + 1])
        rp = _fresnel(eta_p[nlay], eta_p[nlay + 1])
        for j in range(nlay - 1, -1, -1):
            phase = np.exp(2j * kz[j + 1] * dz[j])
            rts, rtp = rs * phase, rp * phase
            ris = _fresnel(kz[j], kz[j + 1])
            rip = _fresnel(eta_p[j], eta_p[j + 1])
            rs = (ris + rts) / (1.0 + ris * rts)
            rp = (rip + rtp) / (1.0 + rip * rtp)
        return rs, rp

    def reflections_sp(self, u, regularized: bool = False):
        """(as_up, as_dn, ap_up, ap_dn) referenced to the emitter plane."""
        kz = self.kz_host(u)
        up = self._up_media_fl if regularized else self._up_media
        dn = self._dn_media_fl if regularized else self._dn_media
        rs_up, rp_up = self._both_pol_r(up, self._up_d, u, self.k0, self.n_host)
        rs_dn, rp_dn = self._both_pol_r(dn, self._dn_d, u, self.k0, self.n_host)
        ph_up = np.exp(2j * kz * self.d_up)
        ph_dn = np.exp(2j * kz * self.d_dn)
        return rs_up * ph_up, rs_dn * ph_dn, rp_up * ph_up, rp_dn * ph_dn

    def reflections(self, pol, u, regularized: bool = False):
        """(a_up, a_down) referenced to the emitter plane."""
        asu, asd, apu, apd = self.reflections_sp(u, regularized)
        return (asu, asd) if pol == "s" else (apu, apd)

    def _transmissivity(self, media, dz, pol, u):
        _, t, _, _, _, eta = self._solve(media, dz, pol, u)
        flux_in = np.real(eta[0])
        flux_out = np.real(eta[-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            T = np.where(flux_in > 1e-300, flux_out / flux_in * np.abs(t) ** 2, 0.0)
        return T

    def transmissivity_up(self, pol, u):
        return self._transmissivity(self._up_media, self._up_d, pol, u)

    def transmissivity_down(self, pol, u):
        return self._transmissivity(self._dn_media, self._dn_d, pol, u)


def half_stack_reflection(stack, emitter, pol, wavelength_nm, u):
    """Reflection amplitudes (r_up, r_down) seen from the emitter plane."""
    hs = _HalfStacks(stack, emitter, wavelength_nm)
    a_up, a_dn = hs.reflections(pol, u)
    if np.ndim(u) == 0:
        return complex(a_up), complex(a_dn)
    return a_up, a_dn


def _ell(u):
    l = np.sqrt((1.0 - np.asarray(u, dtype=float) ** 2) + 0j)
    return np.where(l.imag < 0, -l, l)


def _rate_integrand(hs: _HalfStacks, orientation: str):
    """Total-rate spectral density K(u); F = Re Int K du."""

    def K(u):
        l = _ell(u)
        asu, asd, apu, apd = hs.reflections_sp(u, regularized=True)
        dp = 1.0 - apu * apd
        out = 0.0
        if orientation in ("out_of_plane", "isotropic_average"):
            kperp = 1.5 * u**3 / l * (1.0 + apu) * (1.0 + apd) / dp
            out = kperp if orientation == "out_of_plane" else kperp / 3.0
        if orientation in ("in_plane_average", "isotropic_average"):
            ds = 1.0 - asu * asd
            kpar = 0.75 * u / l * (
                (1.0 + asu) * (1.0 + asd) / ds
                + l**2 * (1.0 - apu) * (1.0 - apd) / dp
            )
            out = kpar if orientation == "in_plane_average" else out + 2.0 * kpar / 3.0
        return out

    return K


def _halfspace_power_over_u(hs: _HalfStacks, orientation: str, upward: bool):
    """P(u)/u for the power radiated into one half-space (u < 1 only)."""

    def density(u):
        u = np.asarray(u, dtype=float)
        l = np.sqrt(np.clip(1.0 - u**2, 0.0, None))
        asu, asd, apu, apd = hs.reflections_sp(u)
        dp2 = np.abs(1.0 - apu * apd) ** 2
        if upward:
            ts = hs.transmissivity_up("s", u)
            tp = hs.transmissivity_up("p", u)
            cs, cp_sym, cp_asym = asd, 1.0 + apd, 1.0 - apd
        else:
            ts = hs.transmissivity_down("s", u)
            tp = hs.transmissivity_down("p", u)
            cs, cp_sym, cp_asym = asu, 1.0 + apu, 1.0 - apu
        out = 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if orientation in ("out_of_plane", "isotropic_average"):
                perp = 0.75 * u**2 / l * np.abs(cp_sym) ** 2 / dp2 * tp
                perp = np.where(l > 0, perp, 0.0)
                out = perp if orientation == "out_of_plane" else perp / 3.0
            if orientation in ("in_plane_average", "isotropic_average"):
                ds2 = np.abs(1.0 - asu * asd) ** 2
                par_s = 0.375 / l * np.abs(1.0 + cs) ** 2 / ds2 * ts
                par_s = np.where(l > 0, par_s, 0.0)
                par_p = 0.375 * l * np.abs(cp_asym) ** 2 / dp2 * tp
                par = par_s + par_p
                out = par if orientation == "in_plane_average" else out + 2.0 * par / 3.0
        return out

    return density


def _integrate_rate(hs, orientation, quad: QuadratureSpec):
    K = _rate_integrand(hs, orientation)
    d = quad.branch_delta
    total = 0.0
    err = 0.0
    # [0, 1 - d]
    val, e = adaptive_gauss_kronrod(
        lambda u: K(u), 0.0, 1.0 - d,
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
    total += val.real
    err += e
    # [1 - d, 1]: u = 1 - s^2 removes the 1/sqrt branch singularity
    sd = np.sqrt(d)
    val, e = adaptive_gauss_kronrod(
        lambda s: K(1.0 - s**2) * 2.0 * s, 0.0, sd,
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
    total += val.real
    err += e
    # [1, 1 + d]: u = 1 + s^2
    val, e = adaptive_gauss_kronrod(
        lambda s: K(1.0 + s**2) * 2.0 * s, 0.0, sd,
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
    total += val.real
    err += e
    # evanescent tail in unit chunks with an early stop
    lo = 1.0 + d
    while lo < quad.u_max:
        hi = min(np.floor(lo) + 1.0, quad.u_max)
        val, e = adaptive_gauss_kronrod(
            lambda u: K(u), lo, hi,
            rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
        total += val.real
        err += e
        if abs(val.real) < quad.tail_rel_cut * max(abs(total), 1.0):
            break
        lo = hi
    return total, err


def _integrate_halfspace(hs, orientation, upward, quad: QuadratureSpec,
                         u_hi: float = 1.0):
    density = _halfspace_power_over_u(hs, orientation, upward)
    d = quad.branch_delta
    u_hi = min(u_hi, 1.0)
    total = 0.0
    val, _ = adaptive_gauss_kronrod(
        lambda u: density(u) * u, 0.0, min(u_hi, 1.0 - d),
        rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
    total += val.real
    if u_hi > 1.0 - d:
        sd = np.sqrt(1.0 - u_hi) if u_hi < 1.0 else 0.0
        val, _ = adaptive_gauss_kronrod(
            lambda s: density(1.0 - s**2) * (1.0 - s**2) * 2.0 * s,
            sd, np.sqrt(d),
            rel_tol=quad.rel_tol, abs_tol=quad.abs_tol, max_depth=quad.max_depth)
        total += val.real
    return total


def purcell_factor(stack, emitter, wavelength_nm,
                   quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Total-rate Purcell factor only (skips the power-routing integrals)."""
    hs = _HalfStacks(stack, emitter, wavelength_nm)
    F, _ = _integrate_rate(hs, emitter.orientation, quad)
    return F


def purcell(stack, emitter, wavelength_nm,
            quad: QuadratureSpec = QuadratureSpec()) -> EmissionResult:
    """Purcell factor and up/down/lost power routing."""
    hs = _HalfStacks(stack, emitter, wavelength_nm)
    F, _ = _integrate_rate(hs, emitter.orientation, quad)
    p_up = _integrate_halfspace(hs, emitter.orientation, True, quad)
    p_dn = _integrate_halfspace(hs, emitter.orientation, False, quad)
    frac_up = p_up / F
    frac_dn = p_dn / F
    return EmissionResult(
        purcell_F=F,
        frac_up=frac_up,
        frac_down=frac_dn,
        frac_lost=1.0 - frac_up - frac_dn,
    )


def emission(stack, emitter, wavelength_nm, NA: float | None = None,
             quad: QuadratureSpec = QuadratureSpec()) -> EmissionResult:
    """Full emission result, including collection into the given NA."""
    res = purcell(stack, emitter, wavelength_nm, quad)
    if NA is None:
        return res
    hs = _HalfStacks(stack, emitter, wavelength_nm)
    n_above = float(np.real(hs.n_above))
    if not 0.0 < NA <= n_above:
        raise ValueError(f"NA must be in (0, {n_above}], got {NA}")
    p_na = _integrate_halfspace(hs, emitter.orientation, True, quad,
                                u_hi=NA / hs.n_host)
    return replace(res, collection_eta=p_na / res.purcell_F)


def far_field(stack, emitter, wavelength_nm, theta_rad=None,
              quad: QuadratureSpec = QuadratureSpec()) -> FarField:
    """Angular power density p(theta) in the upper half-space (phi-averaged)."""
    hs = _HalfStacks(stack, emitter, wavelength_nm)
    n_above = float(np.real(hs.n_above))
    if abs(complex(hs.n_above).imag) > 1e-9:
        raise UnsupportedConfigurationError(
            "upper half-space must be lossless for a far-field pattern"
        )
    if theta_rad is None:
        theta_rad = np.linspace(0.0, np.pi / 2.0, 721)
    theta_rad = np.asarray(theta_rad, dtype=float)
    density = _halfspace_power_over_u(hs, emitter.orientation, True)
    ratio = n_above / hs.n_host
    u = ratio * np.sin(theta_rad)
    p = density(u) * ratio**2 * np.cos(theta_rad) / (2.0 * np.pi)
    upward = _integrate_halfspace(hs, emitter.orientation, True, quad)
    return FarField(theta_rad=theta_rad, p=np.asarray(p, dtype=float),
                    n_above=n_above, upward_power=upward)


def collection_efficiency(farfield: FarField, NA: float, purcell_F: float) -> float:
    """Fraction of ALL emitted power captured within the objective's NA."""
    if not 0.0 < NA <= farfield.n_above:
        raise ValueError(f"NA must be in (0, {farfield.n_above}], got {NA}")
    theta_c = float(np.arcsin(NA / farfield.n_above))
    th = farfield.theta_rad
    integrand = farfield.p * 2.0 * np.pi * np.sin(th)
    inside = th <= theta_c
    th_in = th[inside]
    y_in = integrand[inside]
    if len(th_in) == 0 or th_in[-1] < theta_c:
        # interpolate the cap edge onto the grid
        y_c = np.interp(theta_c, th, integrand)
        th_in = np.append(th_in, theta_c)
        y_in = np.append(y_in, y_c)
    return float(np.trapezoid(y_in, th_in) / purcell_F)
