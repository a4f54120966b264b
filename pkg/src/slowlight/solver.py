"""Time-domain integrator for the weak-probe 1-D Maxwell-Bloch system.

Rescaled variables: the solver stores the sqrt(N)-scaled optical coherence
P = sqrt(N) rho_ab and spin coherence S = sqrt(N) rho_cb alongside the
dimensionless probe envelope E, so that with G = sqrt(g^2 N) the system is

    (d/dt + c d/dz) E = i G P
    dP/dt = -gamma P + i G E + i Omega S
    dS/dt = i Omega P

and the dark/bright polariton transform is an exact pointwise rotation.

Scheme: Strang splitting.  The advection of E is an exact one-cell shift at
unit CFL (selectable Lax-Wendroff otherwise); the local linear system is
advanced with its exact 3x3 matrix exponential, which keeps the integrator
stable for arbitrarily strong control fields.  A classical substepped RK4
local stage is available for cross-validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .control import ControlSchedule
from .errors import DivergentDelayError, NumericalBlowupError
from .medium import MediumParams

WEAK_PROBE_FLAG_THRESHOLD = 0.3


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform 1-D space-time grid."""

    z_min: float
    z_max: float
    nz: int
    t_end: float
    dt: float
    c: float = 1.0

    def __post_init__(self):
        if self.nz < 64:
            raise ValueError("nz must be >= 64")
        if self.z_max <= self.z_min:
            raise ValueError("z_max must exceed z_min")
        if self.dt <= 0 or self.t_end < 0:
            raise ValueError("dt > 0 and t_end >= 0 required")
        if self.cfl > 1.0 + 1e-12:
            raise ValueError(f"CFL number c*dt/dz = {self.cfl:.6f} exceeds 1")

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.nz - 1)

    @property
    def cfl(self) -> float:
        return self.c * self.dt / self.dz

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.nz)

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))

    @classmethod
    def unit_cfl(cls, z_min: float, z_max: float, nz: int, t_end: float,
                 c: float = 1.0) -> "Grid":
        dz = (z_max - z_min) / (nz - 1)
        return cls(z_min, z_max, nz, t_end, dz / c, c)


@dataclass
class FieldState:
    """Gridded envelope and coherences at one instant.

    P and S are the sqrt(N)-scaled coherences (rho_ab = P/sqrt(N),
    rho_cb = S/sqrt(N) for N atoms in the interaction volume).
    """

    t: float
    E: np.ndarray
    P: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        if not (len(self.E) == len(self.P) == len(self.S)):
            raise ValueError("E, P, S must share the grid length")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.E.copy(), self.P.copy(), self.S.copy())

    def excitation(self, dz: float) -> float:
        """Total excitation integral((|E|^2 + |S|^2) dz (polariton-number proxy)."""
        return float((np.abs(self.E) ** 2 + np.abs(self.S) ** 2).sum() * dz)


@dataclass(frozen=True)
class GaussianPulse:
    """amplitude * exp(-((x - center)/sigma)^2); x is z or t per context."""

    center: float
    sigma: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")

    def __call__(self, x):
        return self.amplitude * np.exp(-(((np.asarray(x, float) - self.center)
                                          / self.sigma) ** 2))


@dataclass(frozen=True)
class Scenario:
    """Complete description of one solver run."""

    medium: MediumParams
    grid: Grid
    control: ControlSchedule | None = None       # time-domain schedule
    vgr_profile: ControlSchedule | None = None   # space-domain schedule
    envelope: GaussianPulse | None = None        # initial envelope inside medium
    injection: GaussianPulse | None = None       # boundary waveform at z_min
    snapshot_times: tuple = ()
    probe_points: tuple = ()
    initial_atoms: str = "polariton"             # or "cold"
    transport: str = "auto"                      # auto | shift | lax-wendroff
    local_scheme: str = "exact"                  # exact | rk4

    def __post_init__(self):
        if (self.control is None) == (self.vgr_profile is None):
            raise ValueError("give exactly one of control (time) / vgr_profile (space)")
        if self.control is not None and self.control.domain != "time":
            raise ValueError("control schedule must have domain='time'")
        if self.vgr_profile is not None and self.vgr_profile.domain != "space":
            raise ValueError("vgr_profile schedule must have domain='space'")
        if (self.envelope is None) == (self.injection is None):
            raise ValueError("give exactly one of envelope / injection")
        for ts in self.snapshot_times:
            if not (0.0 <= ts <= self.grid.t_end + 1e-12):
                raise ValueError(f"snapshot time {ts} outside [0, t_end]")
        for zp in self.probe_points:
            if not (self.grid.z_min <= zp <= self.grid.z_max):
                raise ValueError(f"probe point {zp} outside the grid")
        if self.initial_atoms not in ("polariton", "cold"):
            raise ValueError("initial_atoms must be 'polariton' or 'cold'")
        if self.transport not in ("auto", "shift", "lax-wendroff"):
            raise ValueError("transport must be auto|shift|lax-wendroff")
        if self.local_scheme not in ("exact", "rk4"):
            raise ValueError("local_scheme must be exact|rk4")
        if abs(self.medium.c - self.grid.c) > 1e-12 * self.medium.c:
            raise ValueError("medium.c and grid.c disagree")

    # -- field/angle accessors ----------------------------------------
    def omega_at(self, t: float):
        """Control Rabi frequency; scalar (time schedule) or (nz,) array."""
        if self.control is not None:
            return float(self.control.omega(t, self.medium.gN2))
        return np.asarray(self.vgr_profile.omega(self.grid.z, self.medium.gN2))

    def theta_at(self, t: float):
        if self.control is not None:
            return float(self.control.theta(t, self.medium.gN2))
        return np.asarray(self.vgr_profile.theta(self.grid.z, self.medium.gN2))

    def cos2_theta_at(self, t: float):
        if self.control is not None:
            return float(self.control.cos2_theta(t, self.medium.gN2))
        return np.asarray(self.vgr_profile.cos2_theta(self.grid.z, self.medium.gN2))

    def initial_state(self) -> FieldState:
        z = self.grid.z
        if self.envelope is not None:
            E0 = self.envelope(z).astype(complex)
        else:
            E0 = np.zeros(self.grid.nz, dtype=complex)
            E0[0] = self.injection(0.0)
        if self.initial_atoms == "polariton" and self.envelope is not None:
            th = self.theta_at(0.0)
            S0 = -np.tan(th) * E0
        else:
            S0 = np.zeros_like(E0)
        return FieldState(0.0, E0, np.zeros_like(E0), S0)


@dataclass
class SnapshotMetrics:
    t: float
    centroid: float
    rms_width: float
    peak_abs_E: float
    excitation: float


@dataclass
class RunDiagnostics:
    snapshot_metrics: list = field(default_factory=list)
    probe_times: np.ndarray | None = None
    probe_series: dict = field(default_factory=dict)   # z -> complex array of E
    weak_probe_ratio: float | None = None
    weak_probe_flagged: bool = False

    def metrics_dict(self) -> dict:
        return {
            "snapshots": [
                {"t": m.t, "centroid": m.centroid, "rms_width": m.rms_width,
                 "peak_abs_E": m.peak_abs_E, "excitation": m.excitation}
                for m in self.snapshot_metrics
            ],
            "weak_probe_ratio": self.weak_probe_ratio,
            "weak_probe_flagged": self.weak_probe_flagged,
        }


@dataclass
class RunResult:
    snapshots: list            # list[FieldState]
    diagnostics: RunDiagnostics


# ---------------------------------------------------------------------------
# local propagator
# ---------------------------------------------------------------------------

def _local_matrix(gN2: float, gamma: float, omega):
    """RHS matrix of the local (E, P, S) system, batched over omega."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    n = om.size
    G = np.sqrt(gN2)
    M = np.zeros((n, 3, 3), dtype=complex)
    M[:, 0, 1] = 1j * G
    M[:, 1, 0] = 1j * G
    M[:, 1, 1] = -gamma
    M[:, 1, 2] = 1j * om
    M[:, 2, 1] = 1j * om
    return M


def local_propagators(gN2: float, gamma: float, omega, tau: float) -> np.ndarray:
    """exp(M*tau) for the local system, shape (3,3) or (nz,3,3).

    Uses the three-eigenvalue Lagrange form exp(M t) = sum_k e^{l_k t} *
    prod_{j!=k}(M - l_j)/(l_k - l_j) with eigenvalues {0, l+, l-},
    l+- = (-gamma +- sqrt(gamma^2 - 4 W^2))/2, W^2 = g^2 N + Omega^2.
    Cells too close to eigenvalue degeneracy fall back to scipy expm.
    """
    scalar = np.isscalar(omega) or np.asarray(omega).ndim == 0
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    M = _local_matrix(gN2, gamma, om)
    W2 = gN2 + om**2
    sq = np.sqrt(np.asarray(gamma**2 - 4.0 * W2, dtype=complex))
    lp = 0.5 * (-gamma + sq)
    lm = 0.5 * (-gamma - sq)

    scale = np.maximum(np.sqrt(W2), gamma) + 1e-300
    ok = (np.abs(sq) > 1e-8 * scale) & (np.abs(lp) > 1e-8 * scale) \
        & (np.abs(lm) > 1e-8 * scale) & (W2 > 0)

    out = np.empty_like(M)
    if np.any(ok):
        Mo = M[ok]
        M2 = Mo @ Mo
        eye = np.eye(3, dtype=complex)
        w2 = W2[ok][:, None, None]
        lpo = lp[ok][:, None, None]
        lmo = lm[ok][:, None, None]
        term0 = (M2 + gamma * Mo + w2 * eye) / w2
        termp = np.exp(lpo * tau) * (M2 - lmo * Mo) / (lpo * (lpo - lmo))
        termm = np.exp(lmo * tau) * (M2 - lpo * Mo) / (lmo * (lmo - lpo))
        out[ok] = term0 + termp + termm
    if np.any(~ok):
        for i in np.where(~ok)[0]:
            out[i] = expm(M[i] * tau)
    return out[0] if scalar else out


def _apply_propagator(U: np.ndarray, E, P, S):
    if U.ndim == 2:
        F = np.stack([E, P, S])
        G = U @ F
        return G[0], G[1], G[2]
    F = np.stack([E, P, S], axis=-1)          # (nz, 3)
    G = np.einsum("zab,zb->za", U, F)
    return G[:, 0].copy(), G[:, 1].copy(), G[:, 2].copy()


def _rk4_local(E, P, S, gN2, gamma, omega, tau):
    """Substepped classical RK4 on the local system (validation path)."""
    G = np.sqrt(gN2)
    om = omega
    wmax = float(np.max(np.sqrt(gN2 + np.asarray(om) ** 2)))
    nsub = max(1, int(np.ceil(tau * max(gamma, wmax) / 0.1)))
    h = tau / nsub

    def rhs(e, p, s):
        return (1j * G * p,
                1j * G * e - gamma * p + 1j * om * s,
                1j * om * p)

    for _ in range(nsub):
        k1 = rhs(E, P, S)
        k2 = rhs(E + 0.5 * h * k1[0], P + 0.5 * h * k1[1], S + 0.5 * h * k1[2])
        k3 = rhs(E + 0.5 * h * k2[0], P + 0.5 * h * k2[1], S + 0.5 * h * k2[2])
        k4 = rhs(E + h * k3[0], P + h * k3[1], S + h * k3[2])
        E = E + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        P = P + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        S = S + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return E, P, S


# ---------------------------------------------------------------------------
# stepping engine
# ---------------------------------------------------------------------------

class _Engine:
    """Holds the per-run precomputed propagators and boundary logic."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        g = scenario.grid
        self.dz = g.dz
        self.dt = g.dt
        self.cfl = g.cfl
        self.unit_shift = (scenario.transport == "shift") or (
            scenario.transport == "auto" and abs(self.cfl - 1.0) < 1e-12)
        if scenario.transport == "shift" and abs(self.cfl - 1.0) > 1e-12:
            raise ValueError("transport='shift' requires c*dt/dz == 1")
        self.static_local = scenario.vgr_profile is not None
        if self.static_local:
            om = scenario.omega_at(0.0)
            self._U_half = local_propagators(
                scenario.medium.gN2, scenario.medium.gamma, om, self.dt / 2)

    def _half_local(self, E, P, S, t_mid):
        sc = self.sc
        if sc.local_scheme == "rk4":
            om = sc.omega_at(t_mid)
            return _rk4_local(E, P, S, sc.medium.gN2, sc.medium.gamma, om,
                              self.dt / 2)
        if self.static_local:
            U = self._U_half
        else:
            om = sc.omega_at(t_mid)
            U = local_propagators(sc.medium.gN2, sc.medium.gamma, om, self.dt / 2)
        return _apply_propagator(U, E, P, S)

    def _transport(self, E, t_new):
        inflow = self.sc.injection(t_new) if self.sc.injection is not None else 0.0
        if self.unit_shift:
            out = np.empty_like(E)
            out[1:] = E[:-1]
            out[0] = inflow
            return out
        nu = self.cfl
        out = np.empty_like(E)
        out[1:-1] = (E[1:-1] - 0.5 * nu * (E[2:] - E[:-2])
                     + 0.5 * nu**2 * (E[2:] - 2 * E[1:-1] + E[:-2]))
        out[0] = inflow
        out[-1] = E[-1] - nu * (E[-1] - E[-2])     # first-order outflow
        return out

    def step(self, state: FieldState) -> FieldState:
        t, dt = state.t, self.dt
        E, P, S = self._half_local(state.E, state.P, state.S, t + 0.25 * dt)
        E = self._transport(E, t + dt)
        E, P, S = self._half_local(E, P, S, t + 0.75 * dt)
        if not (np.isfinite(E).all() and np.isfinite(P).all()
                and np.isfinite(S).all()):
            raise NumericalBlowupError(
                f"non-finite field values at t={t + dt:.6g}", t=t + dt,
                snapshot=state.copy())
        return FieldState(t + dt, E, P, S)


def step(state: FieldState, scenario: Scenario, dt: float) -> FieldState:
    """Advance one state by dt (must equal the scenario grid dt)."""
    if abs(dt - scenario.grid.dt) > 1e-12 * scenario.grid.dt:
        raise ValueError("dt must match scenario.grid.dt")
    return _Engine(scenario).step(state)


def _snapshot_metrics(grid: Grid, state: FieldState) -> SnapshotMetrics:
    z = grid.z
    w = np.abs(state.E) ** 2
    tot = w.sum()
    if tot > 0:
        centroid = float((z * w).sum() / tot)
        width = float(np.sqrt(((z - centroid) ** 2 * w).sum() / tot))
    else:
        centroid, width = float("nan"), float("nan")
    return SnapshotMetrics(t=state.t, centroid=centroid, rms_width=width,
                           peak_abs_E=float(np.abs(state.E).max()),
                           excitation=state.excitation(grid.dz))


def run(scenario: Scenario) -> RunResult:
    """Integrate the scenario, returning snapshots and diagnostics.

    Deterministic: identical scenarios produce bitwise identical snapshots.
    """
    g = scenario.grid
    eng = _Engine(scenario)
    state = scenario.initial_state()
    nsteps = g.nsteps

    want = sorted(set(min(int(round(ts / g.dt)), nsteps)
                      for ts in scenario.snapshot_times))
    snap_at = set(want)
    probe_idx = [int(round((zp - g.z_min) / g.dz)) for zp in scenario.probe_points]

    snapshots: list[FieldState] = []
    diag = RunDiagnostics()
    probe_data = [np.empty(nsteps + 1, dtype=complex) for _ in probe_idx]

    max_coh = 0.0
    for k in range(nsteps + 1):
        if k > 0:
            state = eng.step(state)
        for j, pi in enumerate(probe_idx):
            probe_data[j][k] = state.E[pi]
        m = max(np.abs(state.P).max(), np.abs(state.S).max(), initial=0.0)
        max_coh = max(max_coh, float(m))
        if k in snap_at:
            snapshots.append(state.copy())
            diag.snapshot_metrics.append(_snapshot_metrics(g, state))

    if scenario.medium.n_atoms is not None:
        diag.weak_probe_ratio = max_coh / np.sqrt(scenario.medium.n_atoms)
        diag.weak_probe_flagged = diag.weak_probe_ratio > WEAK_PROBE_FLAG_THRESHOLD
    diag.probe_times = np.arange(nsteps + 1) * g.dt
    diag.probe_series = {zp: probe_data[j]
                         for j, zp in enumerate(scenario.probe_points)}
    return RunResult(snapshots=snapshots, diagnostics=diag)


# ---------------------------------------------------------------------------
# closed-form reference solutions
# ---------------------------------------------------------------------------

_VGR_FLOOR = 1e-14


def group_delay(vgr, z, *, c: float = 1.0, rtol: float = 1e-10) -> np.ndarray:
    """integral_0^z dz'/v_gr(z') by adaptive quadrature, per requested z."""
    zs = np.atleast_1d(np.asarray(z, dtype=float))

    def inv_v(zz):
        v = float(np.asarray(vgr(zz)))
        if not v > _VGR_FLOOR * c:
            raise DivergentDelayError(f"v_gr({zz}) = {v} is not positive")
        return 1.0 / v

    order = np.argsort(zs)
    delays = np.empty_like(zs)
    acc = 0.0
    prev = 0.0
    for i in order:
        val, _ = quad(inv_v, prev, zs[i], epsrel=rtol, epsabs=0.0, limit=200)
        acc += val
        delays[i] = acc
        prev = zs[i]
    return delays if np.asarray(z).ndim else float(delays[0])


def analytic_space_profile(waveform, vgr, z, t, *, c: float = 1.0) -> np.ndarray:
    """Dispersive-only propagation with a static v_gr(z) profile.

    E(z, t) = E0(t - integral_0^z dz'/v_gr(z')) where E0 is the waveform
    crossing z = 0.  The temporal pulse shape is invariant; the spatial shape
    follows the local group velocity.
    """
    delay = group_delay(vgr, z, c=c)
    return np.asarray(waveform(np.asarray(t) - delay))


def displacement(vgr_of_t, t, *, rtol: float = 1e-10) -> float:
    """integral_0^t v_gr(tau) dtau."""
    val, _ = quad(lambda tt: float(np.asarray(vgr_of_t(tt))), 0.0, t,
                  epsrel=rtol, epsabs=0.0, limit=400)
    return val


def analytic_time_profile(envelope0, vgr_of_t, z, t) -> np.ndarray:
    """Spatially invariant translation under a time-dependent v_gr(t).

    E(z, t) = E0(z - integral_0^t v_gr(tau) dtau).  The spatial shape is
    frozen; the temporal spectrum at a fixed point scales with the sweep
    velocity (narrowing law Delta_omega(t)/Delta_omega(0) = v(t)/v(0)).
    """
    disp = displacement(vgr_of_t, t)
    return np.asarray(envelope0(np.asarray(z) - disp))


def temporal_trace(envelope0, vgr_of_t, z_probe: float, t_grid) -> np.ndarray:
    """Time series E(z_probe, t) of the spatially invariant solution."""
    t_grid = np.asarray(t_grid, dtype=float)
    disps = np.empty_like(t_grid)
    acc = 0.0
    prev = 0.0
    for i, tt in enumerate(t_grid):
        val, _ = quad(lambda x: float(np.asarray(vgr_of_t(x))), prev, tt,
                      epsrel=1e-10, epsabs=0.0, limit=200)
        acc += val
        disps[i] = acc
        prev = tt
    return np.asarray(envelope0(z_probe - disps))


# ---------------------------------------------------------------------------
# exports (see README for the frozen column schema)
# ---------------------------------------------------------------------------

SNAPSHOT_CSV_HEADER = "z,re_E,im_E,re_S,im_S,re_P,im_P"
CSV_SCHEMA_VERSION = 1


def write_snapshot_csv(path, grid: Grid, state: FieldState) -> None:
    data = np.column_stack([
        grid.z,
        state.E.real, state.E.imag,
        state.S.real, state.S.imag,
        state.P.real, state.P.imag,
    ])
    np.savetxt(path, data, delimiter=",", header=SNAPSHOT_CSV_HEADER,
               comments="")


def write_diagnostics_json(path, diagnostics: RunDiagnostics,
                           extra: dict | None = None) -> None:
    payload = {"schema_version": CSV_SCHEMA_VERSION}
    payload.update(diagnostics.metrics_dict())
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
