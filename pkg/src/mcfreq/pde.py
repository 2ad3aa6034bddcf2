"""Finite-difference time-domain oracle for the bounded channel.

Explicit forward-time/central-space scheme on ``nx + 1`` nodes
``r_i = i * L / nx``. Node 0 carries the boundary-compartment concentration
``v`` (Dirichlet coupling); node ``nx`` is the reflecting wall, handled with
a ghost node ``u[nx + 1] = u[nx - 1]``. The passive membrane ODE::

    dv/dt = k (y - v) + mu_hat du/dr(t, 0)

is advanced by forward Euler with a second-order one-sided gradient
``(-3 u0 + 4 u1 - u2) / (2 dx)``. ``v`` and the field are advanced together
from the same old state (plain forward Euler on the semi-discrete system),
and the new ``v`` is then written into node 0.

Nothing here touches the analytic transfer functions, so the results can be
used to check them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .boundary import PassiveMembrane, eval_channel
from .errors import ChannelError, FitError, InstabilityError, SimulationConfigError
from .xfer import DiffusionChannel

SAFETY = 0.4
MIN_NX = 16
MAX_NX = 4000
MAX_STEPS = 20_000_000
FIT_RESIDUAL_LIMIT = 0.05
BLOWUP_FACTOR = 1e12
_CHECK_EVERY = 1024


@dataclass(frozen=True)
class Step:
    amplitude: float = 1.0

    def sample(self, times, dt):
        return np.full_like(times, self.amplitude, dtype=float)


@dataclass(frozen=True)
class Sine:
    amplitude: float = 1.0
    omega: float = 1e-2

    def sample(self, times, dt):
        return self.amplitude * np.sin(self.omega * times)


@dataclass(frozen=True)
class Impulse:
    """Rectangular pulse of the given area starting at t = 0.

    ``width`` defaults to ten time steps.
    """

    area: float = 1.0
    width: Optional[float] = None

    def _width(self, dt):
        return 10.0 * dt if self.width is None else self.width

    def sample(self, times, dt):
        w = self._width(dt)
        # half-step margin keeps the sample count independent of rounding in t_n
        on = times < w - 0.5 * dt
        return np.where(on, self.area / w, 0.0)


InputSpec = Union[Step, Sine, Impulse]


def stable_dt(chan: DiffusionChannel, nx: int, safety: float = SAFETY) -> float:
    """Largest admissible step, ``safety * dx**2 / (2 mu)``."""
    dx = chan.L / nx
    return safety * dx * dx / (2.0 * chan.mu)


def settling_time(chan: DiffusionChannel, mem: PassiveMembrane) -> float:
    """Time after which the start-up transient is negligible.

    Besides the diffusion time ``L**2/mu`` and the membrane time ``1/k``,
    the coupled loop has a slow mode: at low frequency the diffusion layer
    acts as an extra capacity ``mu_hat L / mu`` behind the membrane, so its
    time constant is about ``(1 + mu_hat L / mu) / k``.
    """
    diffusion = chan.L**2 / chan.mu
    if mem.k == 0:
        return math.inf
    coupled = (1.0 + mem.mu_hat * chan.L / chan.mu) / mem.k + diffusion
    return max(5.0 * diffusion, 5.0 / mem.k, 8.0 * coupled)


@dataclass(frozen=True)
class SimConfig:
    """Finite-difference run description.

    ``dt`` defaults to the stability bound. ``record_every`` thins the stored
    series; ``snapshot_every`` (in steps) stores whole-field profiles.
    """

    chan: DiffusionChannel
    mem: PassiveMembrane
    nx: int
    t_end: float
    dt: Optional[float] = None
    input: InputSpec = field(default_factory=Step)
    record_every: int = 1
    snapshot_every: Optional[int] = None
    safety: float = SAFETY

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < MIN_NX:
            raise SimulationConfigError(f"nx must be an integer >= {MIN_NX}, got {self.nx!r}")
        bound = stable_dt(self.chan, self.nx, self.safety)
        if self.dt is None:
            object.__setattr__(self, "dt", bound)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise SimulationConfigError(f"dt must be positive, got {self.dt!r}")
        if self.dt > bound * (1 + 1e-12):
            raise SimulationConfigError(
                f"dt={self.dt:.6g} s violates the stability bound {bound:.6g} s "
                f"(safety {self.safety} * dx^2 / (2 mu))"
            )
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise SimulationConfigError(f"t_end must be positive and finite, got {self.t_end!r}")
        if self.record_every < 1:
            raise SimulationConfigError("record_every must be >= 1")
        if isinstance(self.input, Sine):
            need = 10.0 * max(self.chan.L**2 / self.chan.mu, _inv(self.mem.k))
            if self.t_end < need:
                raise SimulationConfigError(
                    f"sine runs need t_end >= {need:.6g} s (10 x slowest time constant)"
                )

    @property
    def dx(self) -> float:
        return self.chan.L / self.nx

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))


def _inv(k):
    return math.inf if k == 0 else 1.0 / k


@dataclass
class SimResult:
    times: np.ndarray
    v_series: np.ndarray
    uL_series: np.ndarray
    snapshot_times: Optional[np.ndarray] = None
    snapshots: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None


def _input_samples(cfg: SimConfig, y, times):
    if y is None:
        return cfg.input.sample(times, cfg.dt)
    try:
        vals = np.asarray(y(times), dtype=float)
    except (TypeError, ValueError):
        vals = np.array([float(y(t)) for t in times])
    return np.broadcast_to(vals, times.shape).astype(float)


def simulate(cfg: SimConfig, y: Optional[Callable] = None) -> SimResult:
    """Advance the coupled membrane/diffusion system from rest.

    Args:
        cfg: Run configuration.
        y: Optional upstream concentration ``y(t)``; overrides ``cfg.input``.
            Called once with the array of step times (falls back to
            element-wise calls when it is not vectorised).

    Raises:
        InstabilityError: the field exceeds ``1e12`` times the input peak.
    """
    chan, mem, nx, dt = cfg.chan, cfg.mem, cfg.nx, cfg.dt
    dx = cfg.dx
    lam = chan.mu * dt / (dx * dx)
    k, mu_hat = mem.k, mem.mu_hat
    n_steps = cfg.n_steps
    step_times = np.arange(n_steps) * dt
    ys = _input_samples(cfg, y, step_times)
    if not np.all(np.isfinite(ys)):
        raise SimulationConfigError("input signal is not finite")
    limit = BLOWUP_FACTOR * float(np.max(np.abs(ys), initial=0.0))

    every = cfg.record_every
    n_rec = n_steps // every + 1
    times = np.empty(n_rec)
    v_out = np.empty(n_rec)
    uL_out = np.empty(n_rec)
    snap_every = cfg.snapshot_every
    snaps, snap_t = [], []

    u = np.zeros(nx + 1)
    v = 0.0
    times[0] = v_out[0] = uL_out[0] = 0.0
    if snap_every:
        snaps.append(u.copy())
        snap_t.append(0.0)
    rec = 1
    half_inv_dx = 0.5 / dx

    # divergence is caught by the periodic finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n_steps):
            grad0 = (-3.0 * v + 4.0 * u[1] - u[2]) * half_inv_dx
            v_next = v + dt * (k * (ys[n] - v) + mu_hat * grad0)
            # field sees the old v; using v_next here costs O(dt/dx) accuracy
            wall = 2.0 * (u[nx - 1] - u[nx])
            u[1:nx] += lam * (u[0:nx - 1] - 2.0 * u[1:nx] + u[2:nx + 1])
            u[nx] += lam * wall
            v = v_next
            u[0] = v
            m = n + 1
            if m % every == 0:
                times[rec] = m * dt
                v_out[rec] = v
                uL_out[rec] = u[nx]
                rec += 1
            if snap_every and m % snap_every == 0:
                snaps.append(u.copy())
                snap_t.append(m * dt)
            if m % _CHECK_EVERY == 0 or m == n_steps:
                peak = np.max(np.abs(u))
                if not np.isfinite(peak) or peak > limit:
                    raise InstabilityError(f"field diverged at t={m * dt:.6g} s (|u|={peak:.3g})")

    res = SimResult(times[:rec], v_out[:rec], uL_out[:rec])
    if snap_every:
        res.snapshot_times = np.array(snap_t)
        res.snapshots = np.array(snaps)
        res.r = np.linspace(0.0, chan.L, nx + 1)
    return res


@dataclass(frozen=True)
class SteadyStateFit:
    amplitude_ratio: float
    phase_deg: float
    residual: float


def fit_sinusoid(times, values, omega: float, amplitude: float) -> SteadyStateFit:
    """Least-squares projection onto ``{sin wt, cos wt, 1}``.

    Phase is that of the response relative to ``amplitude * sin(omega t)``.
    The residual is the RMS misfit relative to the RMS of the fitted
    sinusoid.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    basis = np.column_stack([np.sin(omega * times), np.cos(omega * times), np.ones_like(times)])
    coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
    a, b, _c = coef
    amp = math.hypot(a, b)
    resid = values - basis @ coef
    if amp == 0.0:
        raise FitError("fitted sinusoid has zero amplitude")
    rel = math.sqrt(np.mean(resid**2)) / (amp / math.sqrt(2.0))
    return SteadyStateFit(amp / abs(amplitude), math.degrees(math.atan2(b, a)), rel)


def sinusoid_response(
    cfg: SimConfig,
    omega: float,
    amplitude: float = 1.0,
    transient: Optional[float] = None,
) -> SteadyStateFit:
    """Empirical gain and phase of the receiver concentration at ``omega``.

    The run uses ``cfg`` with its input replaced by a sinusoid; samples
    before ``transient`` (default :func:`settling_time`) are discarded.

    Raises:
        SimulationConfigError: fewer than eight periods after the transient.
        FitError: residual of the steady-state fit is 5% or more.
    """
    if not omega > 0:
        raise SimulationConfigError("omega must be positive")
    if transient is None:
        transient = settling_time(cfg.chan, cfg.mem)
    period = 2.0 * math.pi / omega
    if cfg.t_end < transient + 8.0 * period:
        raise SimulationConfigError(
            f"t_end={cfg.t_end:.6g} s must cover the transient ({transient:.6g} s) "
            f"plus 8 periods ({8 * period:.6g} s)"
        )
    run = replace(cfg, input=Sine(amplitude, omega))
    res = simulate(run)
    keep = res.times >= transient
    fit = fit_sinusoid(res.times[keep], res.uL_series[keep], omega, amplitude)
    if not fit.residual < FIT_RESIDUAL_LIMIT:
        raise FitError(f"steady-state fit residual {fit.residual:.3g} at omega={omega:g} rad/s")
    return fit


def auto_grid(chan: DiffusionChannel, omega: float, points_per_length: float = 40.0) -> int:
    """Cell count resolving the penetration depth ``sqrt(2 mu / omega)``."""
    dx_max = math.sqrt(2.0 * chan.mu / omega) / points_per_length
    return max(MIN_NX, math.ceil(chan.L / dx_max - 1e-9))


@dataclass(frozen=True)
class ValidationEntry:
    omega: float
    analytic_gain: float
    analytic_phase_deg: float
    sim_gain: float = math.nan
    sim_phase_deg: float = math.nan
    gain_error: float = math.nan
    phase_error_deg: float = math.nan
    nx: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ValidationReport:
    entries: list
    gain_tol: float = 0.02
    phase_tol_deg: float = 3.0

    @property
    def failures(self) -> int:
        return sum(1 for e in self.entries if not e.ok)

    def _good(self):
        return [e for e in self.entries if e.ok]

    @property
    def max_gain_error(self) -> float:
        return max((e.gain_error for e in self._good()), default=0.0)

    @property
    def mean_gain_error(self) -> float:
        good = self._good()
        return float(np.mean([e.gain_error for e in good])) if good else 0.0

    @property
    def max_phase_error(self) -> float:
        return max((e.phase_error_deg for e in self._good()), default=0.0)

    @property
    def mean_phase_error(self) -> float:
        good = self._good()
        return float(np.mean([e.phase_error_deg for e in good])) if good else 0.0

    @property
    def passed(self) -> bool:
        return (
            self.failures == 0
            and self.max_gain_error < self.gain_tol
            and self.max_phase_error < self.phase_tol_deg
        )


def wrap_deg(d: float) -> float:
    return (d + 180.0) % 360.0 - 180.0


def _validate_one(chan, mem, omega, nx_scale, max_nx, max_steps):
    ref = complex(eval_channel(mem.boundary_layer(), chan, 1j * omega))
    a_gain, a_phase = abs(ref), math.degrees(math.atan2(ref.imag, ref.real))
    nx = int(round(auto_grid(chan, omega) * nx_scale)) if omega > 0 else 0
    base = ValidationEntry(omega, a_gain, a_phase, nx=nx)
    try:
        if not omega > 0:
            raise SimulationConfigError("omega must be positive")
        if nx > max_nx:
            raise SimulationConfigError(f"needs nx={nx} > cap {max_nx}")
        dt = stable_dt(chan, nx)
        transient = settling_time(chan, mem)
        t_end = max(
            transient + 8.0 * 2.0 * math.pi / omega,
            10.0 * max(chan.L**2 / chan.mu, _inv(mem.k)),
        )
        if t_end / dt > max_steps:
            raise SimulationConfigError(
                f"needs {t_end / dt:.3g} time steps > budget {max_steps:.3g}"
            )
        # ~64 samples per period is plenty for the projection
        every = max(1, int(2.0 * math.pi / omega / dt / 64))
        cfg = SimConfig(chan, mem, nx=nx, t_end=t_end, dt=dt, record_every=every)
        fit = sinusoid_response(cfg, omega, 1.0, transient)
    except ChannelError as exc:
        return replace(base, error=f"{type(exc).__name__}: {exc}")
    return replace(
        base,
        sim_gain=fit.amplitude_ratio,
        sim_phase_deg=fit.phase_deg,
        gain_error=abs(fit.amplitude_ratio - a_gain) / a_gain,
        phase_error_deg=abs(wrap_deg(fit.phase_deg - a_phase)),
    )


def validate_against_analytic(
    chan: DiffusionChannel,
    mem: PassiveMembrane,
    omegas: Sequence[float],
    nx_scale: float = 1.0,
    max_nx: int = MAX_NX,
    max_steps: int = MAX_STEPS,
    workers: Optional[int] = None,
) -> ValidationReport:
    """Compare simulated and analytic channel gain/phase at each frequency.

    Failures at one frequency are recorded in its entry and do not stop the
    others. With ``workers > 1`` frequencies run in separate processes; the
    report order always follows ``omegas``.
    """
    omegas = [float(w) for w in omegas]
    args = [(chan, mem, w, nx_scale, max_nx, max_steps) for w in omegas]
    if workers and workers > 1 and len(omegas) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_validate_one, *zip(*args)))
    else:
        entries = [_validate_one(*a) for a in args]
    return ValidationReport(entries)
