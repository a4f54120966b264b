"""Dark/bright polariton transform, adiabatic transport, and corrections.

The dark polariton Psi = cos(theta) E - sin(theta) S and bright polariton
Phi = sin(theta) E + cos(theta) S mix the probe envelope with the scaled spin
coherence through the control-set angle tan^2(theta) = g^2 N / Omega^2.  In
the adiabatic limit Phi ~ 0 and Psi rides at v = c cos^2(theta); the leading
corrections enter as four time-dependent coefficients multiplying Psi and its
first three spatial derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicSpline

from .control import ControlSchedule
from .errors import ScheduleSmoothnessError, WindowMassError
from .medium import MediumParams, transparency_width
from .solver import Scenario
from .spectral import power_spectrum

EDGE_MASS_TOL = 1e-8
SAFETY_FACTOR = 10.0


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------

@dataclass
class PolaritonState:
    """Dark (Psi) and bright (Phi) fields plus the angle that produced them."""

    t: float
    Psi: np.ndarray
    Phi: np.ndarray
    theta: float | np.ndarray

    def __post_init__(self):
        if len(self.Psi) != len(self.Phi):
            raise ValueError("Psi and Phi must share the grid length")
        th = np.asarray(self.theta)
        if np.any(th < -1e-12) or np.any(th > np.pi / 2 + 1e-12):
            raise ValueError("theta must lie in [0, pi/2]")


def to_polariton(E, S, theta, t: float = 0.0) -> PolaritonState:
    """Pointwise rotation (E, S) -> (Psi, Phi); exactly norm preserving."""
    E = np.asarray(E)
    S = np.asarray(S)
    if E.shape != S.shape:
        raise ValueError("E and S must share the grid length")
    c, s = np.cos(theta), np.sin(theta)
    return PolaritonState(t=t, Psi=c * E - s * S, Phi=s * E + c * S, theta=theta)


def from_polariton(state: PolaritonState):
    """Inverse rotation; round trip with :func:`to_polariton` is identity."""
    c, s = np.cos(state.theta), np.sin(state.theta)
    E = c * state.Psi + s * state.Phi
    S = -s * state.Psi + c * state.Phi
    return E, S


# ---------------------------------------------------------------------------
# adiabatic transport
# ---------------------------------------------------------------------------

def _integral_cos2(schedule: ControlSchedule, gN2: float, t: float) -> float:
    pts = [p for p in schedule.critical_points() if 0.0 < p < t]
    val, _ = quad(lambda tt: float(schedule.cos2_theta(tt, gN2)), 0.0, t,
                  points=pts or None, limit=400, epsrel=1e-11, epsabs=0.0)
    return val


def advect_dark(Psi0, z, schedule: ControlSchedule, t: float,
                m: MediumParams) -> np.ndarray:
    """Shape-preserving transport Psi(z, t) = Psi(z - c*int cos^2(theta), 0).

    Cubic resampling on the grid; values displaced from outside the window
    are zero-filled.
    """
    z = np.asarray(z, dtype=float)
    Psi0 = np.asarray(Psi0)
    disp = m.c * _integral_cos2(schedule, m.gN2, t)
    zq = z - disp
    re = CubicSpline(z, Psi0.real, extrapolate=False)(zq)
    im = CubicSpline(z, Psi0.imag, extrapolate=False)(zq)
    out = np.nan_to_num(re, nan=0.0) + 1j * np.nan_to_num(im, nan=0.0)
    return out


# ---------------------------------------------------------------------------
# first-order correction coefficients
# ---------------------------------------------------------------------------

def _deriv1(f, t, h):
    """Central difference with one Richardson step; O(h^4)."""
    d_h = (f(t + h) - f(t - h)) / (2 * h)
    d_h2 = (f(t + h / 2) - f(t - h / 2)) / h
    return (4.0 * d_h2 - d_h) / 3.0


def _deriv2(f, t, h):
    d_h = (f(t + h) - 2.0 * f(t) + f(t - h)) / h**2
    d_h2 = (f(t + h / 2) - 2.0 * f(t) + f(t - h / 2)) / (h / 2) ** 2
    return (4.0 * d_h2 - d_h) / 3.0


def _default_step(schedule: ControlSchedule) -> float:
    scale = schedule.feature_scale()
    if not np.isfinite(scale):
        scale = 1.0
    return max(scale / 50.0, 1e-7)


@dataclass(frozen=True)
class CorrectionCoeffs:
    """Coefficients of -A Psi + B c dPsi/dz + C c^2 d2Psi/dz2 - D c^3 d3Psi/dz3.

    A is a homogeneous non-adiabatic loss rate, B a velocity correction,
    C damps high spatial frequencies, D deforms the pulse.  The monitors
    record the sign conditions that hold in the slowly varying regime
    (D >= 0 is structural).
    """

    t: float
    A: float
    B: float
    C: float
    D: float

    @property
    def loss_positive(self) -> bool:
        return self.A >= 0.0

    @property
    def spreading_positive(self) -> bool:
        return self.C >= 0.0


def correction_coeffs(schedule: ControlSchedule, t, m: MediumParams,
                      h: float | None = None):
    """Evaluate A, B, C, D at time t (vectorized over t).

    A = (gamma + d/dt / 2)(thetadot^2 sin^2 / g2N)
    B = (sin(theta) / 3 g2N) d2/dt2 sin^3(theta)
    C = (gamma + d/dt / 2)(sin^4 cos^2 / g2N)
    D = sin^4 cos^4 / g2N

    Schedule derivatives use central differences with Richardson
    extrapolation at step h (default: feature scale / 50).
    """
    if schedule.domain != "time":
        raise ValueError("correction coefficients need a time-domain schedule")
    if h is None:
        h = _default_step(schedule)
    gN2, gamma = m.gN2, m.gamma

    def theta(tt):
        return np.asarray(schedule.theta(tt, gN2), dtype=float)

    def thetadot(tt):
        return _deriv1(theta, np.asarray(tt, dtype=float), h)

    def u(tt):  # thetadot^2 sin^2(theta) / g2N
        return thetadot(tt) ** 2 * np.sin(theta(tt)) ** 2 / gN2

    def w(tt):  # sin^4 cos^2 / g2N
        th = theta(tt)
        return np.sin(th) ** 4 * np.cos(th) ** 2 / gN2

    def sin3(tt):
        return np.sin(theta(tt)) ** 3

    t_arr = np.asarray(t, dtype=float)
    th = theta(t_arr)
    A = gamma * u(t_arr) + 0.5 * _deriv1(u, t_arr, h)
    B = np.sin(th) / (3.0 * gN2) * _deriv2(sin3, t_arr, h)
    C = gamma * w(t_arr) + 0.5 * _deriv1(w, t_arr, h)
    D = np.sin(th) ** 4 * np.cos(th) ** 4 / gN2
    for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
        if not np.all(np.isfinite(val)):
            raise ScheduleSmoothnessError(
                f"coefficient {name} undefined at t={t} (non-smooth schedule)")
    if t_arr.ndim == 0:
        return CorrectionCoeffs(t=float(t_arr), A=float(A), B=float(B),
                                C=float(C), D=float(D))
    return A, B, C, D


# ---------------------------------------------------------------------------
# corrected Fourier-space propagator
# ---------------------------------------------------------------------------

def _edge_mass_fraction(field: np.ndarray) -> float:
    tot = float(np.sum(np.abs(field) ** 2))
    if tot == 0.0:
        return 0.0
    return float((abs(field[0]) ** 2 + abs(field[-1]) ** 2) / tot)


def corrected_propagate(Psi0, z, schedule: ControlSchedule, m: MediumParams,
                        t: float, h: float | None = None,
                        nquad: int = 2001) -> np.ndarray:
    """Propagate Psi including the first-order correction terms.

    Per spatial wavenumber q (d/dz <-> iq) the amplitude is multiplied by
    exp(-i q c I_v - I_A + i q c I_B - q^2 c^2 I_C + i q^3 c^3 I_D) where
    I_X are the time integrals of cos^2(theta) and the coefficients.  With
    A = B = C = D = 0 this reduces to the adiabatic transport.  Requires the
    field to carry < 1e-8 of its mass at the periodic-window edges.
    """
    Psi0 = np.asarray(Psi0, dtype=complex)
    z = np.asarray(z, dtype=float)
    if Psi0.shape != z.shape:
        raise ValueError("Psi0 and z must share the grid length")
    if _edge_mass_fraction(Psi0) > EDGE_MASS_TOL:
        raise WindowMassError("initial field has too much mass at window edges")
    if nquad % 2 == 0:
        nquad += 1
    tq = np.linspace(0.0, t, nquad)
    A, B, C, D = correction_coeffs(schedule, tq, m, h=h)
    cos2 = np.asarray(schedule.cos2_theta(tq, m.gN2), dtype=float)
    I_v = simpson(cos2, x=tq)
    I_A = simpson(A, x=tq)
    I_B = simpson(B, x=tq)
    I_C = simpson(C, x=tq)
    I_D = simpson(D, x=tq)

    dz = z[1] - z[0]
    q = 2.0 * np.pi * np.fft.fftfreq(z.size, d=dz)
    c = m.c
    symbol = np.exp(-1j * q * c * (I_v - I_B)
                    - I_A
                    - q**2 * c**2 * I_C
                    + 1j * q**3 * c**3 * I_D)
    out = np.fft.ifft(np.fft.fft(Psi0) * symbol)
    if _edge_mass_fraction(out) > EDGE_MASS_TOL:
        raise WindowMassError("propagated field reached the window edges")
    return out


def predicted_homogeneous_loss(schedule: ControlSchedule, m: MediumParams,
                               t: float, h: float | None = None,
                               nquad: int = 4001) -> float:
    """First-order energy-loss prediction 1 - exp(-2 int A dt) over [0, t]."""
    if nquad % 2 == 0:
        nquad += 1
    tq = np.linspace(0.0, t, nquad)
    A, _, _, _ = correction_coeffs(schedule, tq, m, h=h)
    return 1.0 - float(np.exp(-2.0 * simpson(A, x=tq)))


# ---------------------------------------------------------------------------
# adiabaticity audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Margin:
    """One audit quantity; `want_small` records the passing direction."""

    name: str
    value: float
    want_small: bool

    @property
    def passed(self) -> bool:
        if self.want_small:
            return self.value <= 1.0 / SAFETY_FACTOR
        return self.value >= SAFETY_FACTOR


@dataclass(frozen=True)
class AdiabaticityReport:
    margins: tuple

    @property
    def all_passed(self) -> bool:
        return all(m.passed for m in self.margins)

    def margin(self, name: str) -> Margin:
        for m in self.margins:
            if m.name == name:
                return m
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {m.name: {"value": m.value, "want_small": m.want_small,
                         "passed": m.passed} for m in self.margins}


def _intensity_fwhm(x: np.ndarray, amp2: np.ndarray) -> float:
    half = 0.5 * amp2.max()
    idx = np.where(amp2 >= half)[0]
    if idx.size < 2:
        return float(x[1] - x[0])
    return float(x[idx[-1]] - x[idx[0]])


def adiabaticity_report(scenario: Scenario) -> AdiabaticityReport:
    """Evaluate the four adiabaticity margins for a scenario.

    (i)   gamma c L / (g2N L_p^2)                 [small passes]
    (ii)  gamma int thetadot^2/(g2N + Omega^2) dt [small passes]
    (iii) (Omega0^2 T_p / gamma) / sqrt(eta k L)  [large passes]
    (iv)  T / ((l_abs/c)(v0/c)),  l_abs = c gamma / g2N,
          T = 1/max|thetadot|                     [large passes]

    Pass/fail applies safety factor 10: small margins must be below 0.1,
    large ones above 10.  L_p is the intensity FWHM of the initial pulse;
    T_p = L_p / v_gr(0).
    """
    m = scenario.medium
    g = scenario.grid
    gN2, gamma, c = m.gN2, m.gamma, m.c
    L = g.z_max - g.z_min

    state0 = scenario.initial_state()
    if scenario.envelope is not None:
        L_p = _intensity_fwhm(g.z, np.abs(state0.E) ** 2)
        if scenario.control is not None:
            v0 = c * float(scenario.control.cos2_theta(0.0, gN2))
            omega0 = float(scenario.control.omega(0.0, gN2))
        else:
            zc = scenario.envelope.center
            v0 = c * float(scenario.vgr_profile.cos2_theta(zc, gN2))
            omega0 = float(scenario.vgr_profile.omega(zc, gN2))
        T_p = L_p / v0
    else:
        # boundary injection: temporal width given directly
        T_p = 2.0 * scenario.injection.sigma * np.sqrt(np.log(2.0) / 2.0) * 2.0
        if scenario.control is None:
            raise ValueError("injection scenarios need a time-domain control")
        v0 = c * float(scenario.control.cos2_theta(0.0, gN2))
        omega0 = float(scenario.control.omega(0.0, gN2))
        L_p = T_p * v0

    m1 = gamma * c * L / (gN2 * L_p**2)

    if scenario.control is not None:
        sched = scenario.control
        hstep = max(min(sched.feature_scale() / 50.0, g.t_end / 1000.0), 1e-7)

        def thetadot(tt):
            return (float(sched.theta(tt + hstep, gN2))
                    - float(sched.theta(tt - hstep, gN2))) / (2 * hstep)

        def integrand(tt):
            om = float(sched.omega(tt, gN2))
            return thetadot(tt) ** 2 / (gN2 + om**2)

        pts = [p for p in sched.critical_points() if 0.0 < p < g.t_end]
        val, _ = quad(integrand, 0.0, g.t_end, points=pts or None,
                      limit=800, epsrel=1e-8, epsabs=1e-14)
        m2 = gamma * val
        tdense = np.linspace(0.0, g.t_end, 20001)
        th = np.asarray(sched.theta(tdense, gN2))
        max_rate = float(np.max(np.abs(np.gradient(th, tdense))))
    else:
        m2 = 0.0
        max_rate = 0.0

    m3 = (omega0**2 * T_p / gamma) / np.sqrt(m.eta * m.k * L)

    l_abs = c * gamma / gN2
    T_switch = np.inf if max_rate == 0.0 else 1.0 / max_rate
    m4 = T_switch / ((l_abs / c) * (v0 / c))

    return AdiabaticityReport(margins=(
        Margin("pulse_length", float(m1), want_small=True),
        Margin("rotation_rate", float(m2), want_small=True),
        Margin("delay_bandwidth", float(m3), want_small=False),
        Margin("switching_time", float(m4), want_small=False),
    ))


@dataclass(frozen=True)
class BandwidthCheck:
    ratio: float
    passed: bool


def initial_bandwidth_check(samples, spacing: float, omega_c0: float,
                            m: MediumParams,
                            threshold: float = 0.1) -> BandwidthCheck:
    """Compare the pulse spectral width against the transparency window.

    Delta_omega_p is sqrt(2) times the rms width of the temporal power
    spectrum (the 1/e half-width for a Gaussian); Delta_omega_tr is the 1/e
    intensity half-width of the transparency window.  Passes when the ratio
    is below `threshold`.
    """
    spec = power_spectrum(samples, spacing)
    d_omega_p = np.sqrt(2.0) * spec.rms_width
    d_omega_tr = transparency_width(omega_c0, m)
    ratio = float(d_omega_p / d_omega_tr)
    return BandwidthCheck(ratio=ratio, passed=ratio < threshold)
