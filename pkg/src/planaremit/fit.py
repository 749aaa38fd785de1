"""Least-squares models and fitters for decay traces and ODMR spectra.

Both fitters use damped least squares (Levenberg-Marquardt via
scipy.optimize.least_squares) with analytic Jacobians and uniform
weights; they are deterministic given the data and initial guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "DecayTrace",
    "DecayFit",
    "OdmrParams",
    "FitError",
    "decay_model",
    "odmr_model",
    "fit_exp_decay",
    "fit_odmr",
]

_MAX_ITER = 200
_FTOL = 1e-10


class FitError(RuntimeError):
    """Fit did not converge or the data cannot identify the model."""


@dataclass(frozen=True)
class DecayTrace:
    """Fluorescence decay samples (time in ns, counts >= 0)."""

    t_ns: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_ns, dtype=float)
        y = np.asarray(self.counts, dtype=float)
        if t.ndim != 1 or t.shape != y.shape or len(t) < 8:
            raise ValueError("decay trace needs >= 8 aligned (t, counts) samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise ValueError("decay trace contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise ValueError("decay trace times must be strictly increasing")
        if np.any(y < 0):
            raise ValueError("decay trace counts must be >= 0")
        object.__setattr__(self, "t_ns", t)
        object.__setattr__(self, "counts", y)


@dataclass(frozen=True)
class DecayFit:
    """y(t) = a * exp(-(t - b)/tau) + c."""

    a: float
    b: float
    tau_ns: float
    c: float
    residual_rms: float

    def model(self, t_ns):
        return decay_model(np.asarray(t_ns, dtype=float),
                           self.a, self.b, self.tau_ns, self.c)


def decay_model(t, a, b, tau, c):
    return a * np.exp(-(t - b) / tau) + c


@dataclass(frozen=True)
class OdmrParams:
    """Double-Lorentzian-dip spectrum with dips at D -/+ E."""

    D_GHz: float
    E_GHz: float
    contrast_minus: float
    contrast_plus: float
    width_GHz: float
    baseline: float
    single_dip_warning: bool = False


def _lorentz(freq, center, width):
    """Unit-peak Lorentzian; width is the FWHM."""
    half = 0.5 * width
    return half**2 / ((freq - center) ** 2 + half**2)


def odmr_model(params: OdmrParams, freq_GHz):
    """Expected normalized PL: baseline * (1 - sum of contrast dips)."""
    if params.width_GHz <= 0:
        raise ValueError("width_GHz must be > 0")
    f = np.asarray(freq_GHz, dtype=float)
    dip = (params.contrast_minus
           * _lorentz(f, params.D_GHz - params.E_GHz, params.width_GHz)
           + params.contrast_plus
           * _lorentz(f, params.D_GHz + params.E_GHz, params.width_GHz))
    return params.baseline * (1.0 - dip)


def _decay_guess(trace: DecayTrace):
    t, y = trace.t_ns, trace.counts
    n_tail = max(len(y) // 8, 2)
    c = float(np.mean(y[-n_tail:]))
    i_peak = int(np.argmax(y))
    b = float(t[i_peak])
    a = float(y[i_peak] - c)
    if a <= 0:
        raise FitError("decay trace has no amplitude above the tail level")
    # tau from the log-slope over the first decade of the decay
    above = y[i_peak:] - c
    t_dec = t[i_peak:]
    mask = above > 0.1 * a
    if np.count_nonzero(mask) >= 2:
        slope = np.polyfit(t_dec[mask], np.log(above[mask]), 1)[0]
        tau = -1.0 / slope if slope < 0 else (t[-1] - t[0]) / 3.0
    else:
        tau = (t[-1] - t[0]) / 3.0
    return a, b, max(tau, 1e-6), c


def fit_exp_decay(trace: DecayTrace,
                  initial_guess: tuple | None = None) -> DecayFit:
    """Least-squares fit of a * exp(-(t - b)/tau) + c.

    The time offset b is a pure reparametrization of a (the model is
    exponential for all t), so b is pinned: to initial_guess[1] when a
    guess is supplied, otherwise to the time of the maximum count.  The
    remaining (a, tau, c) are optimized.
    """
    t, y = trace.t_ns, trace.counts
    if np.ptp(y) == 0:
        raise FitError("constant trace: tau is unidentifiable")
    if initial_guess is not None:
        a0, b, tau0, c0 = (float(v) for v in initial_guess)
        if tau0 <= 0:
            raise ValueError("initial tau must be > 0")
    else:
        a0, b, tau0, c0 = _decay_guess(trace)

    def residuals(p):
        a, tau, c = p
        return decay_model(t, a, b, tau, c) - y

    def jac(p):
        a, tau, c = p
        e = np.exp(-(t - b) / tau)
        return np.column_stack([e, a * e * (t - b) / tau**2, np.ones_like(t)])

    sol = least_squares(residuals, [a0, tau0, c0], jac=jac, method="lm",
                        ftol=_FTOL, xtol=_FTOL, gtol=_FTOL,
                        max_nfev=_MAX_ITER * 4)
    if not sol.success:
        raise FitError(
            f"decay fit did not converge: {sol.message} "
            f"(residual {np.sqrt(np.mean(sol.fun**2)):.4g})"
        )
    a, tau, c = sol.x
    if tau <= 0 or a <= 0:
        raise FitError(f"decay fit collapsed to unphysical a={a:.4g}, tau={tau:.4g}")
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return DecayFit(a=float(a), b=float(b), tau_ns=float(tau), c=float(c),
                    residual_rms=rms)


def _odmr_guess(freq, pl):
    n = len(pl)
    win = max(n // 25, 1)
    ker = np.ones(win)
    smooth = np.convolve(pl, ker, mode="same") / np.convolve(
        np.ones(n), ker, mode="same")
    baseline = float(np.median(np.sort(smooth)[-max(n // 4, 2):]))
    span = float(freq[-1] - freq[0])
    width = max(span / 10.0, 1e-3)
    i1 = int(np.argmin(smooth))
    depth1 = baseline - smooth[i1]
    # second dip: deepest point at least one linewidth from the first,
    # and at least half as deep (otherwise it is baseline noise)
    far = np.abs(freq - freq[i1]) > width
    if np.any(far):
        i2 = int(np.flatnonzero(far)[np.argmin(smooth[far])])
        if baseline - smooth[i2] > 0.5 * depth1:
            f1, f2 = sorted((float(freq[i1]), float(freq[i2])))
            d = 0.5 * (f1 + f2)
            e = 0.5 * (f2 - f1)
            c1 = max(1.0 - smooth[i1] / baseline, 1e-3)
            c2 = max(1.0 - smooth[i2] / baseline, 1e-3)
            return (d, e, c1, c2, width, baseline), False
    c = max(1.0 - smooth[i1] / baseline, 1e-3)
    return (float(freq[i1]), 0.0, c / 2.0, c / 2.0, width, baseline), True


def fit_odmr(spectrum, initial_guess: OdmrParams | None = None) -> OdmrParams:
    """Least-squares fit of the double-dip model to (freq_GHz, PL) data.

    With only one resolved dip, E is pinned at 0 (contrast split evenly
    between the two coincident dips) and single_dip_warning is set.
    """
    arr = np.asarray(spectrum, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 12:
        raise ValueError("ODMR spectrum needs >= 12 rows of (freq_GHz, pl)")
    order = np.argsort(arr[:, 0])
    freq, pl = arr[order, 0], arr[order, 1]
    if not np.all(np.isfinite(freq)) or not np.all(np.isfinite(pl)):
        raise ValueError("ODMR spectrum contains non-finite values")

    single_dip = False
    if initial_guess is not None:
        p0 = (initial_guess.D_GHz, initial_guess.E_GHz,
              initial_guess.contrast_minus, initial_guess.contrast_plus,
              initial_guess.width_GHz, initial_guess.baseline)
    else:
        p0, single_dip = _odmr_guess(freq, pl)

    def params_of(p):
        if single_dip:
            d, c, w, base = p
            return OdmrParams(d, 0.0, c / 2.0, c / 2.0, w, base)
        d, e, c1, c2, w, base = p
        return OdmrParams(d, e, c1, c2, w, base)

    def residuals(p):
        return odmr_model(params_of(_abswidth(p)), freq) - pl

    def _abswidth(p):
        q = np.array(p, dtype=float)
        q[-2] = abs(q[-2])  # width sign is meaningless
        return q

    x0 = ([p0[0], p0[2] + p0[3], p0[4], p0[5]] if single_dip
          else list(p0))
    sol = least_squares(residuals, x0, method="lm",
                        ftol=_FTOL, xtol=_FTOL, gtol=_FTOL,
                        max_nfev=_MAX_ITER * 8)
    if not sol.success:
        raise FitError(
            f"ODMR fit did not converge: {sol.message} "
            f"(residual {np.sqrt(np.mean(sol.fun**2)):.4g})"
        )
    params = params_of(_abswidth(sol.x))
    if params.E_GHz < 0:  # swap dips so E >= 0
        params = OdmrParams(params.D_GHz, -params.E_GHz, params.contrast_plus,
                            params.contrast_minus, params.width_GHz,
                            params.baseline)
    if single_dip:
        params = OdmrParams(params.D_GHz, params.E_GHz, params.contrast_minus,
                            params.contrast_plus, params.width_GHz,
                            params.baseline, single_dip_warning=True)
    return params
