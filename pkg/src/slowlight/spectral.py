"""Discrete power spectra and width estimators for sampled waveforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_SAMPLES = 64


@dataclass(frozen=True)
class Spectrum:
    """Power spectrum of a uniformly sampled waveform.

    omega is the angular-frequency grid (fft order, shifted to be monotone),
    power = |X(omega)|^2 with the plain DFT normalization.  fwhm is the full
    width at half maximum of the power spectrum; rms_width is the square root
    of its second central moment.
    """

    omega: np.ndarray
    power: np.ndarray
    fwhm: float
    rms_width: float


def power_spectrum(samples, spacing: float) -> Spectrum:
    """DFT power spectrum of uniformly spaced samples.

    Parseval holds exactly: sum |x|^2 = (1/n) sum |X|^2.
    """
    x = np.asarray(samples)
    if x.ndim != 1 or x.size < MIN_SAMPLES:
        raise ValueError(f"need a 1-D waveform with >= {MIN_SAMPLES} samples")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError("spacing must be positive and finite")
    X = np.fft.fftshift(np.fft.fft(x))
    omega = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(x.size, d=spacing))
    power = np.abs(X) ** 2
    return Spectrum(omega=omega, power=power,
                    fwhm=_fwhm(omega, power), rms_width=_rms_width(omega, power))


def power_spectrum_from_times(samples, times) -> Spectrum:
    """As :func:`power_spectrum` but validating a given time grid is uniform."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size != np.asarray(samples).size:
        raise ValueError("times must match samples")
    dt = np.diff(t)
    if dt.size == 0 or np.any(np.abs(dt - dt[0]) > 1e-9 * abs(dt[0])):
        raise ValueError("non-uniform sampling rejected")
    return power_spectrum(samples, float(dt[0]))


def parseval_residual(samples, spacing: float) -> float:
    """Relative Parseval mismatch of the DFT pair (should be ~1e-16)."""
    x = np.asarray(samples)
    lhs = np.sum(np.abs(x) ** 2)
    rhs = np.sum(np.abs(np.fft.fft(x)) ** 2) / x.size
    return abs(lhs - rhs) / max(lhs, 1e-300)


def _fwhm(omega: np.ndarray, power: np.ndarray) -> float:
    half = 0.5 * power.max()
    above = power >= half
    idx = np.where(above)[0]
    if idx.size == 0:
        return 0.0
    i0, i1 = idx[0], idx[-1]
    if i0 == 0 or i1 == omega.size - 1:
        # half maximum not bracketed; fall back to the covered span
        return float(omega[i1] - omega[i0])
    xl = np.interp(half, [power[i0 - 1], power[i0]], [omega[i0 - 1], omega[i0]])
    xr = np.interp(half, [power[i1 + 1], power[i1]], [omega[i1 + 1], omega[i1]])
    return float(xr - xl)


def _rms_width(omega: np.ndarray, power: np.ndarray) -> float:
    norm = power.sum()
    if norm <= 0:
        return 0.0
    mean = (omega * power).sum() / norm
    var = ((omega - mean) ** 2 * power).sum() / norm
    return float(np.sqrt(var))
