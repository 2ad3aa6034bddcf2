"""Linearised boundary layer and the composed channel.

The boundary (membrane) compartment is described by two rational transfer
functions::

    v(s) = G1(s) y(s) + G2(s) du/dr(s, 0)

``G1`` maps the upstream concentration to the boundary concentration and
``G2`` maps the gradient at the sender side of the diffusion layer to the
boundary concentration. Closing the loop through ``G_F(s, 0)`` gives the
boundary system ``G_B = G1 / (1 - G2 G_F)``; the end-to-end channel is
``G_D(s, L) G_B(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, PoleError, SingularityError
from .xfer import DiffusionChannel, eval_GD_receiver, eval_GF_sender

_LOOP_FLOOR = 1e-12


def _trim(coeffs):
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class RationalTf:
    """Ratio of real polynomials, coefficients in ascending powers of s.

    ``RationalTf([k], [k, 1])`` is ``k / (k + s)``.
    """

    num: tuple = field(default=(0.0,))
    den: tuple = field(default=(1.0,))

    def __post_init__(self):
        if len(self.den) == 0:
            raise DomainError("denominator must be non-empty")
        num = _trim(self.num) if len(self.num) else (0.0,)
        den = _trim(self.den)
        if den[-1] == 0.0:
            raise DomainError("denominator is identically zero")
        if not all(np.isfinite(num)) or not all(np.isfinite(den)):
            raise DomainError("coefficients must be finite")
        if any(num) and len(num) > len(den):
            raise DomainError("transfer function must be proper (deg num <= deg den)")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, s):
        return eval_rational(self, s)

    @property
    def is_zero(self) -> bool:
        return not any(self.num)


def eval_rational(tf: RationalTf, s):
    """Evaluate ``num(s) / den(s)`` by Horner's rule."""
    s = np.asarray(s, dtype=np.complex128)
    num = P.polyval(s, tf.num)
    den = P.polyval(s, tf.den)
    if np.any(np.abs(den) < 1e-12 * np.maximum(1.0, np.abs(num))):
        raise PoleError("rational transfer function evaluated at a pole")
    out = num / den
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class PassiveMembrane:
    """Passive membrane transport.

    Attributes:
        k: Transport rate constant through the membrane [1/s].
        mu_hat: Diffusion velocity coupling the gradient into the
            boundary compartment [um/s].

    ``k = 0`` is accepted (a sealed membrane) so that the simulator can
    represent a decoupled boundary; its frequency-domain ``G1`` then has a
    pole at the origin.
    """

    k: float
    mu_hat: float

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k >= 0):
            raise DomainError(f"membrane rate k must be non-negative, got {self.k!r}")
        if not (np.isfinite(self.mu_hat) and self.mu_hat >= 0):
            raise DomainError(f"mu_hat must be non-negative, got {self.mu_hat!r}")

    def boundary_layer(self) -> "BoundaryLayer":
        return BoundaryLayer(passive_g1(self), passive_g2(self))


def passive_g1(mem: PassiveMembrane) -> RationalTf:
    """``k / (s + k)``: first-order lag with unit DC gain."""
    return RationalTf((mem.k,), (mem.k, 1.0))


def passive_g2(mem: PassiveMembrane) -> RationalTf:
    """``mu_hat / (s + k)`` [um]."""
    return RationalTf((mem.mu_hat,), (mem.k, 1.0))


@dataclass(frozen=True)
class BoundaryLayer:
    g1: RationalTf
    g2: RationalTf


def _loop(bl: BoundaryLayer, chan: DiffusionChannel, s):
    s = np.asarray(s, dtype=np.complex128)
    if bl.g2.is_zero:
        # no feedback path; skip evaluating G2 so a pole there cannot matter
        return np.ones_like(s)
    loop = 1.0 - eval_rational(bl.g2, s) * eval_GF_sender(chan, s)
    if np.any(np.abs(loop) < _LOOP_FLOOR):
        raise SingularityError("flux feedback loop 1 - G2*G_F is singular")
    return loop


def eval_GFF(bl: BoundaryLayer, chan: DiffusionChannel, s):
    """Flux feedback factor ``1 / (1 - G2(s) G_F(s, 0))``."""
    out = 1.0 / _loop(bl, chan, s)
    return out[()] if np.ndim(out) == 0 else out


def eval_GB(bl: BoundaryLayer, chan: DiffusionChannel, s):
    """Boundary system ``G1 / (1 - G2 G_F(s, 0))``."""
    out = eval_rational(bl.g1, s) / _loop(bl, chan, s)
    return out[()] if np.ndim(out) == 0 else out


def eval_GB_passive(mem: PassiveMembrane, chan: DiffusionChannel, s):
    """Closed form of ``G_B`` for the passive membrane: ``k / (s + k - mu_hat G_F)``."""
    s = np.asarray(s, dtype=np.complex128)
    den = s + mem.k - mem.mu_hat * eval_GF_sender(chan, s)
    if np.any(np.abs(den) < _LOOP_FLOOR):
        raise SingularityError("passive boundary denominator vanished")
    out = mem.k / den
    return out[()] if out.ndim == 0 else out


def eval_channel(bl: BoundaryLayer, chan: DiffusionChannel, s):
    """End-to-end map from upstream concentration to receiver concentration."""
    out = eval_GD_receiver(chan, s) * eval_GB(bl, chan, s)
    return out[()] if np.ndim(out) == 0 else out
