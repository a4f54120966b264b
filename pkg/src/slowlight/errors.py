"""Exception types shared across the package."""


class SlowlightError(Exception):
    """Base class for package-specific failures."""


class SingularityError(SlowlightError, ValueError):
    """Closed-form expression evaluated too close to a pole."""


class DivergentDelayError(SlowlightError, ValueError):
    """Group delay integral diverges (v_gr -> 0 inside the interval)."""


class WindowMassError(SlowlightError, ValueError):
    """Field has non-negligible weight at the edges of a periodic window."""


class ScheduleSmoothnessError(SlowlightError, ValueError):
    """Derivative of a control schedule is undefined at the requested point."""


class NumericalBlowupError(SlowlightError, RuntimeError):
    """Integration produced NaN/Inf.  Carries the last good state snapshot."""

    def __init__(self, message, t=None, snapshot=None):
        super().__init__(message)
        self.t = t
        self.snapshot = snapshot
