"""Bode sweeps, cut-off frequencies and the distance/bandwidth design rule.

The cut-off frequency of a subsystem is the smallest frequency at which its
gain reaches -6 dB. For the diffusion layer the receiver gain depends on
frequency only through ``w_hat = L * sqrt(omega / (2 mu))``, and is strictly
decreasing in ``w_hat``; bisecting once on that single curve gives a
universal constant ``w_star`` with ``omega_D = 2 mu w_star**2 / L**2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .boundary import BoundaryLayer, eval_GB
from .errors import (
    BandStartsBelowThresholdError,
    ChannelError,
    DomainError,
    NoCrossingError,
    ZeroGainError,
)
from .xfer import DiffusionChannel

THRESHOLD_DB = -6.0
HALF_AMPLITUDE_DB = 20.0 * math.log10(0.5)

DEFAULT_SCAN = (1e-5, 1e2, 400)

Evaluator = Callable[[float], complex]


@dataclass(frozen=True)
class BodePoint:
    omega: float
    gain_db: float
    phase_deg: float


@dataclass(frozen=True)
class CutoffResult:
    """Cut-off frequency with the final bisection bracket (all in rad/s)."""

    omega_c: float
    bracket_lo: float
    bracket_hi: float
    iterations: int


class Limiting(enum.Enum):
    BOUNDARY = "BoundaryLimited"
    DIFFUSION = "DiffusionLimited"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Classification:
    verdict: Limiting
    omega_D: float
    omega_B: float
    max_distance: float


def gain_db(v) -> float:
    """``20 log10 |v|``; raises ZeroGainError for ``v == 0``."""
    mag = np.abs(v)
    if np.any(mag == 0):
        raise ZeroGainError("zero gain has no dB value")
    out = 20.0 * np.log10(mag)
    return float(out) if np.ndim(out) == 0 else out


def bode_sweep(evaluator: Evaluator, wmin: float, wmax: float, n: int) -> list[BodePoint]:
    """Sample ``evaluator(omega)`` on ``n`` log-spaced frequencies.

    Phase is unwrapped: a jump of more than 180 degrees between neighbouring
    samples is taken as a branch crossing and corrected by a multiple of 360.
    """
    if not (0 < wmin < wmax):
        raise DomainError("need 0 < wmin < wmax")
    if n < 2:
        raise DomainError("need at least two sweep points")
    omegas = np.logspace(math.log10(wmin), math.log10(wmax), n)
    values = np.empty(n, dtype=np.complex128)
    for i, w in enumerate(omegas):
        try:
            values[i] = evaluator(float(w))
        except ChannelError as exc:
            raise type(exc)(f"{exc} (at omega={w:.9g} rad/s)") from exc
    gains = gain_db(values)
    phases = np.unwrap(np.degrees(np.angle(values)), period=360.0)
    return [BodePoint(float(w), float(g), float(p)) for w, g, p in zip(omegas, gains, phases)]


def dimensionless_gain(w_hat):
    """Receiver gain of the diffusion layer as a function of ``w_hat``."""
    w = np.asarray(w_hat, dtype=float)
    if np.any(w < 0):
        raise DomainError("w_hat must be non-negative")
    e2 = np.exp(-2.0 * w)
    out = 2.0 * np.exp(-w) / np.sqrt(1.0 + 2.0 * e2 * np.cos(2.0 * w) + e2 * e2)
    return float(out) if out.ndim == 0 else out


def prop1_F(w_hat):
    """``exp(-4w) + 2 exp(-2w) sin(2w)``.

    The gain derivative has the sign of ``F(w) - 1``; ``F < 1`` for every
    ``w > 0`` is what makes the diffusion gain strictly decreasing.
    """
    w = np.asarray(w_hat, dtype=float)
    out = np.exp(-4.0 * w) + 2.0 * np.exp(-2.0 * w) * np.sin(2.0 * w)
    return float(out) if out.ndim == 0 else out


def _gain_db_scalar(w):
    e2 = math.exp(-2.0 * w)
    mag = 2.0 * math.exp(-w) / math.sqrt(1.0 + 2.0 * e2 * math.cos(2.0 * w) + e2 * e2)
    return 20.0 * math.log10(mag)


def _bisect_w_hat(threshold_db, tol=1e-13):
    lo, hi = 0.0, 1.0
    while _gain_db_scalar(hi) > threshold_db:
        hi *= 2.0
        if hi > 1e3:
            raise NoCrossingError(f"diffusion gain never reaches {threshold_db} dB")
    it = 0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if _gain_db_scalar(mid) > threshold_db:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


@lru_cache(maxsize=8)
def dimensionless_cutoff(threshold_db: float = THRESHOLD_DB) -> float:
    """Root ``w_star`` of ``dimensionless_gain(w) = threshold`` (about 1.44 at -6 dB)."""
    if not threshold_db < 0:
        raise DomainError("threshold must be negative dB")
    lo, hi, _ = _bisect_w_hat(threshold_db)
    return 0.5 * (lo + hi)


def diffusion_cutoff(chan: DiffusionChannel, threshold_db: float = THRESHOLD_DB) -> CutoffResult:
    """Cut-off frequency of ``G_D(s, L)``, ``omega_D = 2 mu w_star**2 / L**2``."""
    if not threshold_db < 0:
        raise DomainError("threshold must be negative dB")
    lo, hi, it = _bisect_w_hat(threshold_db)
    scale = 2.0 * chan.mu / chan.L**2
    mid = 0.5 * (lo + hi)
    return CutoffResult(scale * mid * mid, scale * lo * lo, scale * hi * hi, it)


def general_cutoff(
    evaluator: Evaluator,
    wmin: float = DEFAULT_SCAN[0],
    wmax: float = DEFAULT_SCAN[1],
    n_scan: int = DEFAULT_SCAN[2],
    threshold_db: float = THRESHOLD_DB,
    rtol: float = 1e-11,
) -> CutoffResult:
    """Smallest frequency in ``[wmin, wmax]`` where the gain reaches the threshold.

    The gain is first scanned on a log grid; bisection then refines the
    first bracketed crossing. Non-monotone gains (dips) are handled because
    only the first bracket is ever refined.

    Raises:
        BandStartsBelowThresholdError: gain at ``wmin`` is not above threshold.
        NoCrossingError: gain stays above threshold up to ``wmax``.
    """
    if not (0 < wmin < wmax) or n_scan < 2:
        raise DomainError("need 0 < wmin < wmax and n_scan >= 2")

    def g(w):
        return gain_db(evaluator(w))

    grid = np.logspace(math.log10(wmin), math.log10(wmax), n_scan)
    prev = float(grid[0])
    if g(prev) <= threshold_db:
        raise BandStartsBelowThresholdError(
            f"gain at wmin={wmin:g} rad/s is already at or below {threshold_db} dB"
        )
    for w in grid[1:]:
        w = float(w)
        if g(w) <= threshold_db:
            lo, hi = prev, w
            break
        prev = w
    else:
        raise NoCrossingError(f"no {threshold_db} dB crossing in [{wmin:g}, {wmax:g}] rad/s")

    it = 0
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if g(mid) > threshold_db:
            lo = mid
        else:
            hi = mid
        it += 1
    return CutoffResult(math.sqrt(lo * hi), lo, hi, it)


def max_distance(mu: float, omega_B: float, threshold_db: float = THRESHOLD_DB) -> float:
    """Longest channel whose diffusion cut-off does not undercut ``omega_B``.

    ``L_max = sqrt(2) w_star sqrt(mu / omega_B)`` (about 2.03 sqrt(mu/omega_B)).
    """
    if not omega_B > 0:
        raise DomainError("omega_B must be positive")
    if not mu > 0:
        raise DomainError("mu must be positive")
    return math.sqrt(2.0) * dimensionless_cutoff(threshold_db) * math.sqrt(mu / omega_B)


def classify_limiting_subsystem(
    chan: DiffusionChannel,
    bl: BoundaryLayer,
    wmin: float = DEFAULT_SCAN[0],
    wmax: float = DEFAULT_SCAN[1],
    n_scan: int = DEFAULT_SCAN[2],
    threshold_db: float = THRESHOLD_DB,
) -> Classification:
    """Decide whether the boundary system or the diffusion layer caps the bandwidth."""
    omega_B = general_cutoff(
        lambda w: eval_GB(bl, chan, 1j * w), wmin, wmax, n_scan, threshold_db
    ).omega_c
    omega_D = diffusion_cutoff(chan, threshold_db).omega_c
    verdict = Limiting.DIFFUSION if omega_D < omega_B else Limiting.BOUNDARY
    return Classification(verdict, omega_D, omega_B, max_distance(chan.mu, omega_B, threshold_db))
