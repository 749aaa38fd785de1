"""Observable photoluminescence quantities.

Combines excitation enhancement (pump standing wave at the emitter),
emission-rate modification, the intrinsic-quantum-efficiency model and
collection efficiency into the measurable total PL gain of a stack
relative to a reference stack, plus the corresponding lifetime ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dipole import EmissionResult, EmitterSpec, QuadratureSpec, emission
from .tmm import Stack, field_profile

__all__ = [
    "EMISSION_BAND_NM",
    "SpectrumWeight",
    "EnhancementReport",
    "excitation_gain",
    "band_average",
    "effective_quantum_efficiency",
    "pl_enhancement",
    "lifetime_ratio",
    "calibrate_eta0",
]

# Integration band for all spectrally averaged quantities (nm).
EMISSION_BAND_NM = (750.0, 900.0)


@dataclass(frozen=True)
class SpectrumWeight:
    """Nonnegative emission-spectrum weight, normalized over the band."""

    kind: str  # "gaussian" | "flat" | "table"
    params: tuple = ()
    table: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def gaussian(cls, center_nm: float, fwhm_nm: float) -> "SpectrumWeight":
        if fwhm_nm <= 0:
            raise ValueError("fwhm_nm must be > 0")
        return cls("gaussian", (float(center_nm), float(fwhm_nm)))

    @classmethod
    def flat(cls, min_nm: float = EMISSION_BAND_NM[0],
             max_nm: float = EMISSION_BAND_NM[1]) -> "SpectrumWeight":
        if max_nm <= min_nm:
            raise ValueError("flat weight needs max_nm > min_nm")
        return cls("flat", (float(min_nm), float(max_nm)))

    @classmethod
    def from_table(cls, rows) -> "SpectrumWeight":
        tab = np.asarray(rows, dtype=float)
        if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
            raise ValueError("table weight needs >= 2 rows of (wavelength_nm, w)")
        if np.any(np.diff(tab[:, 0]) <= 0) or np.any(tab[:, 1] < 0):
            raise ValueError("table weight: wavelengths increasing, weights >= 0")
        return cls("table", (), tab)

    def raw(self, wavelength_nm):
        wl = np.asarray(wavelength_nm, dtype=float)
        if self.kind == "gaussian":
            center, fwhm = self.params
            sigma = fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
            return np.exp(-0.5 * ((wl - center) / sigma) ** 2)
        if self.kind == "flat":
            lo, hi = self.params
            return np.where((wl >= lo) & (wl <= hi), 1.0, 0.0)
        return np.interp(wl, self.table[:, 0], self.table[:, 1],
                         left=0.0, right=0.0)


def band_average(quantity, weight: SpectrumWeight, n_samples: int = 31,
                 band=EMISSION_BAND_NM):
    """Weight-normalized trapezoidal average of quantity(wavelength) over the band."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    wl = np.linspace(band[0], band[1], n_samples)
    w = weight.raw(wl)
    norm = np.trapezoid(w, wl)
    if norm <= 0:
        raise ValueError("spectrum weight vanishes over the integration band")
    vals = np.array([float(quantity(x)) for x in wl])
    return float(np.trapezoid(vals * w, wl) / norm)


def _emitter_depth_from_top(stack: Stack, emitter: EmitterSpec) -> float:
    return stack.depth_of_layer_top(emitter.host_layer) + emitter.depth_in_layer_nm


def excitation_gain(stack: Stack, ref_stack: Stack, emitter: EmitterSpec,
                    pump_wavelength_nm: float = 532.0,
                    ref_emitter: EmitterSpec | None = None) -> float:
    """Pump-intensity ratio |E|^2(stack) / |E|^2(ref) at the emitter position.

    Unit-amplitude normal-incidence plane wave from above (s and p
    coincide at u = 0).
    """
    ref_emitter = ref_emitter or emitter
    z = _emitter_depth_from_top(stack, emitter)
    z_ref = _emitter_depth_from_top(ref_stack, ref_emitter)
    i_stack = field_profile(stack, "s", pump_wavelength_nm, 0.0, z).intensity
    i_ref = field_profile(ref_stack, "s", pump_wavelength_nm, 0.0, z_ref).intensity
    return i_stack / i_ref


def effective_quantum_efficiency(F: float, eta0: float,
                                 frac_lost: float = 0.0) -> float:
    """eta = eta0 * F_r / (1 - eta0 + eta0 * F) with F_r = (1 - frac_lost) * F."""
    if F <= 0:
        raise ValueError("F must be > 0")
    if not 0.0 <= eta0 <= 1.0:
        raise ValueError("eta0 must be in [0, 1]")
    f_r = (1.0 - frac_lost) * F
    return eta0 * f_r / (1.0 - eta0 + eta0 * F)


@dataclass(frozen=True)
class EnhancementReport:
    excitation_gain: float
    band_avg_purcell: float
    band_avg_collection: float
    effective_qe_ratio: float
    total_gain: float
    na: float
    pump_wavelength_nm: float
    rows: tuple  # per-wavelength breakdown dicts

    def to_dict(self) -> dict:
        return {
            "excitation_gain": self.excitation_gain,
            "band_avg_purcell": self.band_avg_purcell,
            "band_avg_collection": self.band_avg_collection,
            "effective_qe_ratio": self.effective_qe_ratio,
            "total_gain": self.total_gain,
            "na": self.na,
            "pump_wavelength_nm": self.pump_wavelength_nm,
            "per_wavelength": list(self.rows),
        }


def _per_wavelength(stack, emitter, wl, na, quad) -> dict:
    res: EmissionResult = emission(stack, emitter, wl, NA=na, quad=quad)
    eta_eff = effective_quantum_efficiency(
        res.purcell_F, emitter.quantum_efficiency_eta0, res.frac_lost)
    return {
        "wavelength_nm": float(wl),
        "purcell_F": float(res.purcell_F),
        "frac_up": float(res.frac_up),
        "frac_down": float(res.frac_down),
        "frac_lost": float(res.frac_lost),
        "collection_eta": float(res.collection_eta),
        "eta_effective": float(eta_eff),
        "detected": float(res.collection_eta * eta_eff),
    }


def pl_enhancement(stack: Stack, ref_stack: Stack, emitter: EmitterSpec,
                   weight: SpectrumWeight, NA: float = 0.9, *,
                   ref_emitter: EmitterSpec | None = None,
                   pump_wavelength_nm: float = 532.0,
                   n_samples: int = 31,
                   quad: QuadratureSpec = QuadratureSpec()) -> EnhancementReport:
    """Total PL gain of stack vs ref_stack under the linear-excitation model.

    total_gain = excitation_gain * band_avg(collection_eta * eta_effective,
    stack) / band_avg(same, ref_stack).
    """
    ref_emitter = ref_emitter or emitter
    wl_grid = np.linspace(EMISSION_BAND_NM[0], EMISSION_BAND_NM[1], n_samples)
    w = weight.raw(wl_grid)
    norm = np.trapezoid(w, wl_grid)
    if norm <= 0:
        raise ValueError("spectrum weight vanishes over the integration band")

    rows = []
    for wl in wl_grid:
        row = _per_wavelength(stack, emitter, float(wl), NA, quad)
        ref = _per_wavelength(ref_stack, ref_emitter, float(wl), NA, quad)
        row.update({f"ref_{k}": v for k, v in ref.items() if k != "wavelength_nm"})
        rows.append(row)

    def avg(key, which=""):
        vals = np.array([r[which + key] for r in rows])
        return float(np.trapezoid(vals * w, wl_grid) / norm)

    exc = excitation_gain(stack, ref_stack, emitter, pump_wavelength_nm,
                          ref_emitter)
    detected = avg("detected")
    detected_ref = avg("detected", "ref_")
    total = exc * detected / detected_ref
    return EnhancementReport(
        excitation_gain=exc,
        band_avg_purcell=avg("purcell_F"),
        band_avg_collection=avg("collection_eta"),
        effective_qe_ratio=avg("eta_effective") / avg("eta_effective", "ref_"),
        total_gain=total,
        na=NA,
        pump_wavelength_nm=pump_wavelength_nm,
        rows=tuple(rows),
    )


def lifetime_ratio(F_stack: float, F_ref: float, eta0: float) -> float:
    """tau_stack / tau_ref; only the radiative channel is rate-modified."""
    if F_stack <= 0 or F_ref <= 0:
        raise ValueError("F values must be > 0")
    if not 0.0 <= eta0 <= 1.0:
        raise ValueError("eta0 must be in [0, 1]")
    return (1.0 - eta0 + eta0 * F_ref) / (1.0 - eta0 + eta0 * F_stack)


def calibrate_eta0(F_stack: float, F_ref: float, target_ratio: float) -> float:
    """Solve lifetime_ratio(F_stack, F_ref, eta0) = target_ratio for eta0."""
    denom = (F_ref - 1.0) - target_ratio * (F_stack - 1.0)
    if denom == 0:
        raise ValueError("lifetime ratio is independent of eta0 for these F values")
    eta0 = (target_ratio - 1.0) / denom
    if not 0.0 < eta0 <= 1.0:
        raise ValueError(
            f"no physical eta0 reproduces ratio {target_ratio} "
            f"(solved eta0 = {eta0:.4g})"
        )
    return eta0
