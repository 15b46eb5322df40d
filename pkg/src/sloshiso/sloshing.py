"""Free-surface eigenvalue to sloshing eigenvalue maps for vertical-wall
containers over a flat bottom, plus physical frequency conversion.

For a membrane eigenvalue mu of the free surface, the container with
depth d has sloshing eigenvalue sqrt(mu) * tanh(d sqrt(mu)); infinitely
deep containers have sqrt(mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

#: beyond this value of d*sqrt(mu), tanh saturates below double resolution
_TANH_SATURATION = 20.0


@dataclass(frozen=True)
class DepthSpec:
    """Finite depth d > 0 (flat bottom at -d) or infinite depth (d=None)."""

    d: Optional[float] = None

    def __post_init__(self):
        if self.d is not None and not self.d > 0.0:
            raise ValueError(f"finite depth must be positive, got {self.d}")

    @classmethod
    def finite(cls, d: float) -> "DepthSpec":
        return cls(d=float(d))

    @classmethod
    def infinite(cls) -> "DepthSpec":
        return cls(d=None)

    @property
    def is_infinite(self) -> bool:
        return self.d is None

    def __str__(self):
        return "inf" if self.is_infinite else f"{self.d:g}"


@dataclass(frozen=True)
class PhysicalContext:
    """Gravitational acceleration, length/time^2."""

    g: float = 9.81

    def __post_init__(self):
        if not self.g > 0.0:
            raise ValueError(f"g must be positive, got {self.g}")


def slosh_eig(mu: float, depth: DepthSpec) -> float:
    """Sloshing eigenvalue of the vertical-wall container for mode mu."""
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    root = math.sqrt(mu)
    if depth.is_infinite:
        return root
    x = depth.d * root
    if x > _TANH_SATURATION:
        return root
    return root * math.tanh(x)


def depth_curve(mu: float, depths) -> np.ndarray:
    """Table of (d, nu) over an ascending list of finite depths."""
    d = np.asarray(depths, dtype=float)
    if d.ndim != 1 or len(d) == 0:
        raise ValueError("depths must be a non-empty 1-d sequence")
    if np.any(d <= 0.0):
        raise ValueError("depths must be positive")
    if np.any(np.diff(d) <= 0.0):
        raise ValueError("depths must be strictly ascending")
    nu = np.array([slosh_eig(mu, DepthSpec.finite(di)) for di in d])
    return np.column_stack([d, nu])


def angular_frequency(nu: float, ctx: PhysicalContext = PhysicalContext()) -> float:
    """Radian frequency omega = sqrt(g * nu)."""
    if not nu > 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    return math.sqrt(ctx.g * nu)


def nu_from_angular_frequency(omega: float,
                              ctx: PhysicalContext = PhysicalContext()) -> float:
    """Inverse map: nu = omega^2 / g."""
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    return omega * omega / ctx.g
