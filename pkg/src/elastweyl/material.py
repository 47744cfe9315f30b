"""Isotropic elastic material parameters and the Rayleigh sextic."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .numerics import solve_cubic_real


class InvalidMaterialError(ValueError):
    pass


@dataclass(frozen=True)
class ElasticMaterial:
    """Squared transverse/longitudinal wave speeds of an isotropic medium.

    ``alpha`` is ct2/cl2.  The range flags record which admissibility
    convention a parameter pair falls under:

    * ``sv_range``        alpha < 1/2  (cl2 - 2 ct2 > 0)
    * ``cflv_range``      alpha < 1    (cl2 - ct2 > 0)
    * ``strong_convexity``  n (cl2 - 2 ct2) + 2 ct2 > 0
    """
    ct2: float
    cl2: float
    n: int = 2

    @property
    def alpha(self) -> float:
        return self.ct2 / self.cl2

    @property
    def ct(self) -> float:
        return math.sqrt(self.ct2)

    @property
    def cl(self) -> float:
        return math.sqrt(self.cl2)

    @property
    def sv_range(self) -> bool:
        return self.alpha < 0.5

    @property
    def cflv_range(self) -> bool:
        return self.alpha < 1.0

    @property
    def strong_convexity(self) -> bool:
        return self.n * (self.cl2 - 2 * self.ct2) + 2 * self.ct2 > 0

    def scaled(self, sigma: float) -> "ElasticMaterial":
        return ElasticMaterial(self.ct2 * sigma, self.cl2 * sigma, self.n)

    def to_dict(self) -> dict:
        return {"ct2": self.ct2, "cl2": self.cl2, "n": self.n, "alpha": self.alpha,
                "sv_range": self.sv_range, "cflv_range": self.cflv_range,
                "strong_convexity": self.strong_convexity}


def make_material(ct2: float, cl2: float, n: int = 2) -> ElasticMaterial:
    """Validate and build a material; only ct2 > 0 and cl2 > 0 are required."""
    if not (math.isfinite(ct2) and math.isfinite(cl2)):
        raise InvalidMaterialError("wave speeds must be finite")
    if ct2 <= 0 or cl2 <= 0:
        raise InvalidMaterialError(
            f"strong ellipticity needs ct2 > 0 and cl2 > 0 (got ct2={ct2}, cl2={cl2})")
    if int(n) != n or n < 1:
        raise InvalidMaterialError(f"dimension must be a positive integer, got {n}")
    return ElasticMaterial(float(ct2), float(cl2), int(n))


def sextic(gamma: float, alpha: float) -> float:
    """gamma^6 - 8 gamma^4 + 8 (3 - 2 alpha) gamma^2 - 16 (1 - alpha)."""
    g2 = gamma * gamma
    return ((g2 - 8.0) * g2 + 8.0 * (3.0 - 2.0 * alpha)) * g2 - 16.0 * (1.0 - alpha)


@dataclass(frozen=True)
class RayleighRoots:
    alpha: float
    roots: tuple[tuple[float, int], ...]
    unit_interval_root: Optional[float]

    def residuals(self) -> list[float]:
        return [abs(sextic(g, self.alpha)) for g, _ in self.roots]

    def nonzero(self) -> list[float]:
        return [g for g, _ in self.roots if g != 0.0]


def rayleigh_roots(alpha: float) -> RayleighRoots:
    """All real roots of the Rayleigh sextic, via s = gamma^2.

    Each positive cubic root s gives the pair +-sqrt(s) with the cubic
    multiplicity; s = 0 gives gamma = 0 with twice the cubic multiplicity.
    """
    if not (alpha > 0 and math.isfinite(alpha)):
        raise InvalidMaterialError(f"alpha must be positive, got {alpha}")
    s_roots = solve_cubic_real(-8.0, 8.0 * (3.0 - 2.0 * alpha), -16.0 * (1.0 - alpha))
    out: list[tuple[float, int]] = []
    for s, mult in s_roots:
        if s == 0.0 or abs(s) <= 1e-15:
            out.append((0.0, 2 * mult))
        elif s > 0:
            g = math.sqrt(s)
            out.append((g, mult))
            out.append((-g, mult))
    out.sort()
    unit = [g for g, _ in out if 0.0 < g < 1.0]
    return RayleighRoots(alpha, tuple(out), min(unit) if unit else None)
