"""Exception hierarchy shared by the analytic and simulation layers."""


class ChannelError(Exception):
    """Base class for every error raised by mcfreq."""


class DomainError(ChannelError, ValueError):
    """Argument outside the domain where the evaluation is defined."""


class SingularityError(ChannelError, ArithmeticError):
    """A denominator vanished (or a loop became algebraically singular)."""


class PoleError(SingularityError):
    """Rational transfer function evaluated on (or next to) a pole."""


class ZeroGainError(ChannelError, ValueError):
    """Gain of exactly zero has no finite dB value."""


class CutoffError(ChannelError):
    """Cut-off search failed."""


class NoCrossingError(CutoffError):
    """Gain never reaches the threshold inside the scan range."""


class BandStartsBelowThresholdError(CutoffError):
    """Gain is already at or below the threshold at the lower scan bound."""


class SimulationConfigError(ChannelError, ValueError):
    """Invalid finite-difference configuration (grid, step, duration)."""


class InstabilityError(ChannelError, ArithmeticError):
    """Time stepping diverged."""


class FitError(ChannelError):
    """Steady-state sinusoid fit rejected (residual too large)."""
