"""Transfer functions of the bounded diffusion layer.

The diffusion layer occupies ``[0, L]`` with a Dirichlet value at ``r = 0``
and a reflecting (zero-gradient) wall at ``r = L``. After a Laplace
transform in time the concentration and its spatial gradient at ``r`` are
linear in the sender-side concentration ``u(s, 0)``::

    u(s, r)       = G_D(s, r) u(s, 0)
    du/dr (s, r)  = G_F(s, r) u(s, 0)

All functions accept Python/numpy complex scalars or arrays for ``s`` and
broadcast. The principal square root is used throughout, so for
``Re s >= 0`` every exponential has modulus at most one and nothing
overflows.

Units: micrometres, seconds, rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

_DEN_FLOOR = 1e-300


@dataclass(frozen=True)
class DiffusionChannel:
    """Diffusion coefficient ``mu`` [um^2/s] and channel length ``L`` [um]."""

    mu: float
    L: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"diffusion coefficient must be positive, got {self.mu!r}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise DomainError(f"channel length must be positive, got {self.L!r}")


def _check_s(s):
    s = np.asarray(s, dtype=np.complex128)
    if not np.all(np.isfinite(s)):
        raise DomainError("Laplace variable must be finite")
    if np.any(s.real < 0):
        raise DomainError("Re(s) < 0: principal-branch decay is not guaranteed")
    return s


def _check_r(chan: DiffusionChannel, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > chan.L):
        raise DomainError(f"position must lie in [0, {chan.L}] um")
    return r


def _finish(value):
    if not np.all(np.isfinite(value)):
        raise SingularityError("transfer function evaluation overflowed")
    return value[()] if isinstance(value, np.ndarray) and value.ndim == 0 else value


def _root(chan: DiffusionChannel, s):
    # principal branch: Re >= 0
    return np.sqrt(s / chan.mu)


def exp_element(chan: DiffusionChannel, R, s):
    """Diffusion over distance ``R`` into a semi-infinite medium.

    Returns ``exp(-R * sqrt(s / mu))``; modulus is at most one on the
    closed right half-plane.
    """
    s = _check_s(s)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise DomainError("distance must be non-negative")
    return _finish(np.exp(-R * _root(chan, s)))


def _denominator(chan, q):
    den = 1.0 + np.exp(-2.0 * chan.L * q)
    if np.any(np.abs(den) < _DEN_FLOOR):
        raise SingularityError("1 + exp(-2L sqrt(s/mu)) vanished")
    return den


def eval_GD(chan: DiffusionChannel, r, s):
    """Concentration transfer function ``G_D(s, r)`` (sender to position r)."""
    s = _check_s(s)
    r = _check_r(chan, r)
    q = _root(chan, s)
    num = np.exp(-r * q) + np.exp((r - 2.0 * chan.L) * q)
    return _finish(num / _denominator(chan, q))


def eval_GF(chan: DiffusionChannel, r, s):
    """Gradient transfer function ``G_F(s, r)`` in 1/um.

    Vanishes at the reflecting wall ``r = L`` and at ``s = 0``.
    """
    s = _check_s(s)
    r = _check_r(chan, r)
    q = _root(chan, s)
    # -e^{-rq} + e^{(r-2L)q} = e^{-rq} expm1(-2(L-r)q); avoids cancellation near s = 0
    num = np.exp(-r * q) * np.expm1(-2.0 * (chan.L - r) * q)
    return _finish(q * num / _denominator(chan, q))


def eval_GD_receiver(chan: DiffusionChannel, s):
    """``G_D(s, L)``: sender concentration to receiver concentration."""
    s = _check_s(s)
    q = _root(chan, s)
    return _finish(2.0 * np.exp(-chan.L * q) / _denominator(chan, q))


def eval_GF_sender(chan: DiffusionChannel, s):
    """``G_F(s, 0)``: sender concentration to gradient at the sender.

    Behaves like a differentiator: zero at DC, growing like
    ``sqrt(omega / mu)`` at high frequency.
    """
    s = _check_s(s)
    q = _root(chan, s)
    return _finish(q * np.expm1(-2.0 * chan.L * q) / _denominator(chan, q))


def eval_GD_blockdiagram(chan: DiffusionChannel, r, s):
    """``G_D(s, r)`` assembled from semi-infinite diffusion elements.

    The forward path is ``E(r) + E(2L - r)`` (direct wave plus the wave
    reflected off the wall) closed by the round-trip loop ``E(2L)``, where
    ``E(R) = exp_element(chan, R, s)``.
    """
    r = _check_r(chan, r)
    forward = exp_element(chan, r, s) + exp_element(chan, 2.0 * chan.L - r, s)
    loop = 1.0 + exp_element(chan, 2.0 * chan.L, s)
    if np.any(np.abs(loop) < _DEN_FLOOR):
        raise SingularityError("block-diagram loop denominator vanished")
    return _finish(np.asarray(forward / loop))
