"""Closed-form EIT optics for a resonantly driven three-level Lambda medium.

A weak probe couples the ground state |b> to the excited state |a> while a
strong control field of Rabi frequency Omega couples |a> to the meta-stable
state |c>.  Everything here is a pure function of the static medium constants;
simulation units are c = 1, gamma = 1 unless stated otherwise (see README for
the mapping to SI).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularityError

#: relative tolerance for the g^2 N = eta*k*c*gamma consistency check
_GN2_RTOL = 1e-12


@dataclass(frozen=True)
class MediumParams:
    """Static constants of the EIT medium.

    Attributes
    ----------
    eta : dimensionless density parameter (atoms per cubic wavelength scale).
        eta = 0 is allowed as the explicit free-space limit; operations that
        need a finite opacity raise on it.
    gamma : excited-state decay rate [1/time].
    k : probe wavenumber [1/length].
    length_L : medium length [length].
    c : vacuum speed of light (1 in simulation units).
    gN2 : collective coupling g^2 N [1/time^2].  Computed from
        eta*k*c*gamma when omitted; validated against it when given.
    n_atoms : optional atom number in the interaction volume.  Only used by
        the weak-probe validity monitor (a c-number envelope solver is
        amplitude-scale free, so the monitor needs the absolute scale).
    """

    eta: float
    gamma: float
    k: float
    length_L: float
    c: float = 1.0
    gN2: float = None  # type: ignore[assignment]
    n_atoms: float | None = None

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        for name in ("gamma", "k", "length_L", "c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        consistent = self.eta * self.k * self.c * self.gamma
        if self.gN2 is None:
            object.__setattr__(self, "gN2", consistent)
        else:
            scale = max(abs(self.gN2), abs(consistent), 1e-300)
            if abs(self.gN2 - consistent) > _GN2_RTOL * scale:
                raise ValueError(
                    f"gN2={self.gN2} inconsistent with eta*k*c*gamma={consistent}"
                )
        if self.n_atoms is not None and self.n_atoms <= 0:
            raise ValueError("n_atoms must be > 0 when given")

    @property
    def alpha(self) -> float:
        """Opacity eta*k*L of the bare medium (resonant optical depth)."""
        return self.eta * self.k * self.length_L


def susceptibility(delta, omega_c: float, m: MediumParams):
    """Complex probe susceptibility chi(delta) at two-photon detuning delta.

    chi = eta * gamma * delta / (Omega^2 - delta^2 - i*gamma*delta)

    Near delta = 0 this expands to eta*(gamma*delta/Omega^2) for the real
    part and eta*(gamma*delta/Omega^2)^2 for the imaginary part.
    """
    if omega_c <= 0:
        raise ValueError("omega_c must be > 0")
    delta = np.asarray(delta, dtype=float)
    denom = omega_c**2 - delta**2 - 1j * m.gamma * delta
    floor = 1e4 * np.finfo(float).eps * max(
        omega_c**2, float(np.max(delta**2, initial=0.0)), m.gamma * float(np.max(np.abs(delta), initial=0.0))
    )
    if np.any(np.abs(denom) < floor):
        raise SingularityError("susceptibility evaluated too close to its pole")
    chi = m.eta * m.gamma * delta / denom
    return chi if chi.ndim else complex(chi)


def group_quantities(omega_c: float, m: MediumParams) -> tuple[float, float]:
    """Group index n_g and group velocity v_gr for control strength omega_c.

    n_g = eta*k*c*gamma / Omega^2 and v_gr = c/(1+n_g), identically equal to
    c*cos^2(theta) with tan^2(theta) = g^2 N / Omega^2.
    """
    if omega_c <= 0:
        raise ValueError("omega_c must be > 0")
    n_g = m.eta * m.k * m.c * m.gamma / omega_c**2
    v_gr = m.c / (1.0 + n_g)
    return n_g, v_gr


def mixing_angle(omega_c: float, m: MediumParams) -> float:
    """Mixing angle theta with tan^2(theta) = g^2 N / Omega^2."""
    return float(np.arctan2(np.sqrt(m.gN2), omega_c))


def transparency_width(omega_c: float, m: MediumParams) -> float:
    """Spectral half-width (1/e, intensity) of the EIT transparency window.

    d_omega_tr = (Omega^2/gamma) / sqrt(eta*k*L).  For n_g >> 1 this equals
    (v_gr/L)*sqrt(eta*k*L); the two agree to the n_g/(1+n_g) factor.
    """
    if m.alpha <= 0:
        raise ValueError("opacity alpha = eta*k*L must be > 0")
    return omega_c**2 / (m.gamma * np.sqrt(m.alpha))


def transparency_width_vgr_form(omega_c: float, m: MediumParams) -> float:
    """Equivalent transparency width (v_gr/L)*sqrt(alpha), valid for tan(theta) >> 1."""
    _, v_gr = group_quantities(omega_c, m)
    return v_gr / m.length_L * np.sqrt(m.alpha)


def transmission_spectrum(delta_grid, omega_c: float, m: MediumParams) -> np.ndarray:
    """Intensity transmission T(delta) = exp(-k*L*Im chi) on a sorted grid.

    Beer-Lambert closure with the dimensionless susceptibility convention;
    T(0) = 1 exactly at two-photon resonance.
    """
    delta_grid = np.asarray(delta_grid, dtype=float)
    if delta_grid.ndim != 1 or not np.all(np.isfinite(delta_grid)):
        raise ValueError("delta_grid must be a finite 1-D array")
    if np.any(np.diff(delta_grid) < 0):
        raise ValueError("delta_grid must be sorted")
    chi = susceptibility(delta_grid, omega_c, m)
    return np.exp(-m.k * m.length_L * np.imag(chi))


def transmission_fwhm(omega_c: float, m: MediumParams, npts: int = 4001) -> float:
    """Numerically extracted FWHM of the transmission window around delta = 0.

    The grid spans +-6 analytic transparency widths, which contains the half
    maximum for any opacity above ln(2).
    """
    w = transparency_width(omega_c, m)
    grid = np.linspace(-6.0 * w, 6.0 * w, npts)
    T = transmission_spectrum(grid, omega_c, m)
    half = 0.5 * (T.max() + T.min())
    above = T >= half
    idx = np.where(above)[0]
    if idx.size < 2 or idx[0] == 0 or idx[-1] == npts - 1:
        raise ValueError("half-maximum crossings not bracketed; widen the grid")
    # linear interpolation of the two crossings
    i0, i1 = idx[0], idx[-1]
    xl = np.interp(half, [T[i0 - 1], T[i0]], [grid[i0 - 1], grid[i0]])
    xr = np.interp(half, [T[i1 + 1], T[i1]], [grid[i1 + 1], grid[i1]])
    return float(xr - xl)


def rms_transmission_width(omega_c: float, m: MediumParams, npts: int = 4001) -> float:
    """Alternative width estimator: rms width of T(delta) treated as a profile."""
    w = transparency_width(omega_c, m)
    grid = np.linspace(-6.0 * w, 6.0 * w, npts)
    T = transmission_spectrum(grid, omega_c, m)
    T = T - T.min()
    norm = np.trapezoid(T, grid)
    mean = np.trapezoid(grid * T, grid) / norm
    var = np.trapezoid((grid - mean) ** 2 * T, grid) / norm
    return float(np.sqrt(var))


def delay_ratio_bound(m: MediumParams) -> float:
    """Upper bound sqrt(eta*k*L) on the delay-to-pulse-duration ratio.

    This is the figure of merit of an EIT delay line used as a memory; vapor
    opacities below ~1e4 cap the ratio at order 100.
    """
    if m.alpha <= 0:
        raise ValueError("opacity alpha = eta*k*L must be > 0")
    return float(np.sqrt(m.alpha))
