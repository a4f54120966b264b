"""Control-field schedules: Omega(t), mixing angle theta(t), or v_gr profiles.

A schedule is a smooth deterministic curve over time or space.  It stores one
raw quantity (omega, cot_theta, cos2_theta or vgr_fraction) and converts to
the others through tan^2(theta) = g^2 N / Omega^2 and v_gr = c cos^2(theta),
so the representations can never disagree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

QUANTITIES = ("omega", "cot_theta", "cos2_theta", "vgr_fraction")
DOMAINS = ("time", "space")


def _as_float_or_array(x):
    arr = np.asarray(x, dtype=float)
    return arr


@dataclass(frozen=True)
class ControlSchedule:
    """Base class; use the concrete kinds or :meth:`from_dict`."""

    quantity: str
    domain: str

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"quantity must be one of {QUANTITIES}")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")

    # -- raw curve -----------------------------------------------------
    def raw(self, x):
        raise NotImplementedError

    def critical_points(self) -> list[float]:
        """Abscissae where the curve varies fastest (for quadrature hints)."""
        return []

    def feature_scale(self) -> float:
        """Smallest width over which the curve varies appreciably."""
        return np.inf

    # -- converted views ----------------------------------------------
    def cos2_theta(self, x, gN2: float = None):
        v = self.raw(x)
        if self.quantity == "cos2_theta":
            out = v
        elif self.quantity == "vgr_fraction":
            out = v
        elif self.quantity == "cot_theta":
            out = v * v / (1.0 + v * v)
        else:  # omega
            if gN2 is None:
                raise ValueError("gN2 required to convert omega to cos^2(theta)")
            out = v * v / (v * v + gN2)
        return out

    def theta(self, x, gN2: float = None):
        v = self.raw(x)
        if self.quantity == "cot_theta":
            return np.arctan2(1.0, v)
        if self.quantity == "omega":
            if gN2 is None:
                raise ValueError("gN2 required to convert omega to theta")
            return np.arctan2(np.sqrt(gN2), v)
        c2 = np.clip(self.cos2_theta(x, gN2), 0.0, 1.0)
        return np.arccos(np.sqrt(c2))

    def omega(self, x, gN2: float):
        v = self.raw(x)
        if self.quantity == "omega":
            return v
        if self.quantity == "cot_theta":
            return np.sqrt(gN2) * v
        c2 = np.asarray(self.cos2_theta(x, gN2), dtype=float)
        if np.any(c2 >= 1.0 - 1e-15):
            raise ValueError("cos^2(theta) = 1 requires infinite Omega; "
                             "specify the schedule as omega or cot_theta instead")
        return np.sqrt(gN2 * c2 / (1.0 - c2))

    def vgr(self, x, c: float, gN2: float = None):
        return c * self.cos2_theta(x, gN2)

    # -- construction from config dicts ---------------------------------
    @staticmethod
    def from_dict(d: dict) -> "ControlSchedule":
        d = dict(d)
        kind = d.pop("kind")
        cls = {
            "constant": ConstantSchedule,
            "tanh-ramp": TanhRamp,
            "tanh-pulse-pair": TanhPulsePair,
            "tabulated": TabulatedSchedule,
        }.get(kind)
        if cls is None:
            raise ValueError(f"unknown schedule kind {kind!r}")
        return cls(**d)


@dataclass(frozen=True)
class ConstantSchedule(ControlSchedule):
    value: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.value < 0:
            raise ValueError("schedule value must be >= 0")

    def raw(self, x):
        x = _as_float_or_array(x)
        return np.full_like(x, self.value) if x.ndim else self.value


@dataclass(frozen=True)
class TanhRamp(ControlSchedule):
    """Smooth ramp start -> stop centered at `center` with width `width`."""

    start: float = 1.0
    stop: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.width <= 0:
            raise ValueError("width must be > 0")

    def raw(self, x):
        x = _as_float_or_array(x)
        s = 0.5 * (1.0 + np.tanh((x - self.center) / self.width))
        return self.start + (self.stop - self.start) * s

    def critical_points(self):
        return [self.center]

    def feature_scale(self):
        return self.width


@dataclass(frozen=True)
class TanhPulsePair(ControlSchedule):
    """base*(1 - amp1*tanh((x-c1)/w1) + amp2*tanh((x-c2)/w2)).

    With amp1 = amp2 = 0.5 this dips from `base` to zero between the two
    centers and recovers afterwards (the stop-and-retrieve shape).
    """

    base: float = 1.0
    amp1: float = 0.5
    center1: float = 0.0
    width1: float = 1.0
    amp2: float = 0.5
    center2: float = 1.0
    width2: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.width1 <= 0 or self.width2 <= 0:
            raise ValueError("widths must be > 0")

    def raw(self, x):
        x = _as_float_or_array(x)
        return self.base * (
            1.0
            - self.amp1 * np.tanh((x - self.center1) / self.width1)
            + self.amp2 * np.tanh((x - self.center2) / self.width2)
        )

    def critical_points(self):
        return [self.center1, self.center2]

    def feature_scale(self):
        return min(self.width1, self.width2)


@dataclass(frozen=True)
class TabulatedSchedule(ControlSchedule):
    """Monotone piecewise-cubic (PCHIP) interpolation of tabulated samples."""

    x: tuple = ()
    y: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        xs = np.asarray(self.x, dtype=float)
        ys = np.asarray(self.y, dtype=float)
        if xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("tabulated schedule needs matching x/y with >= 2 points")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated abscissa must be strictly increasing")
        object.__setattr__(self, "x", tuple(xs))
        object.__setattr__(self, "y", tuple(ys))
        object.__setattr__(self, "_interp", PchipInterpolator(xs, ys, extrapolate=False))

    def raw(self, t):
        xs = np.asarray(self.x)
        t_arr = _as_float_or_array(t)
        clipped = np.clip(t_arr, xs[0], xs[-1])
        vals = self._interp(clipped)
        return vals if t_arr.ndim else float(vals)

    def feature_scale(self):
        return float(np.min(np.diff(np.asarray(self.x))))


def stop_retrieve_schedule(base: float = 100.0, rate: float = 0.1,
                           t_stop: float = 15.0, t_release: float = 125.0,
                           ) -> TanhPulsePair:
    """cot(theta) schedule that rotates theta from ~0 to pi/2 and back.

    cot(theta(t)) = base*(1 - 0.5 tanh[rate (t - t_stop)]
                          + 0.5 tanh[rate (t - t_release)])
    """
    w = 1.0 / rate
    return TanhPulsePair(quantity="cot_theta", domain="time", base=base,
                         amp1=0.5, center1=t_stop, width1=w,
                         amp2=0.5, center2=t_release, width2=w)
