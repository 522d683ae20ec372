"""Built-in minimal hypersurfaces: the equatorial 6-sphere and the Clifford
family S^k(sqrt(k/6)) x S^{6-k}(sqrt((6-k)/6)) for k = 1..5.

Charts use hyperspherical angle coordinates with closed-form jacobians.
Coordinate singularities sit where a polar angle hits 0 or pi; sampled
points and grids stay at least 0.1 rad away from them.
"""

from __future__ import annotations

import numpy as np

from .hypersurface import HypersurfaceChart

__all__ = [
    "sphere_coords",
    "sphere_coords_jacobian",
    "geodesic_sphere",
    "clifford_torus",
    "surface_by_name",
    "sample_domain_point",
    "BUILTIN_EXAMPLES",
]

BUILTIN_EXAMPLES = ("s6",) + tuple(f"clifford:{k}" for k in range(1, 6))


def sphere_coords(angles) -> np.ndarray:
    """Hyperspherical map: m angles -> unit vector in R^{m+1} (vectorized)."""
    a = np.asarray(angles, dtype=float)
    s, c = np.sin(a), np.cos(a)
    ones = np.ones(a.shape[:-1] + (1,))
    prods = np.concatenate([ones, np.cumprod(s, axis=-1)], axis=-1)
    return np.concatenate([prods[..., :-1] * c, prods[..., -1:]], axis=-1)


def sphere_coords_jacobian(angles) -> np.ndarray:
    """Jacobian of sphere_coords: (..., m+1, m)."""
    a = np.asarray(angles, dtype=float)
    m = a.shape[-1]
    s, c = np.sin(a), np.cos(a)
    out = np.zeros(a.shape[:-1] + (m + 1, m))
    for i in range(m + 1):
        # x_i = (prod_{l<i} s_l) * (c_i if i < m else 1)
        for j in range(min(i + 1, m)):
            term = np.ones(a.shape[:-1])
            for l in range(min(i, m)):
                if l != j:
                    term = term * s[..., l]
            if j < i:
                term = term * c[..., j]
                if i < m:
                    term = term * c[..., i]
            else:  # j == i < m
                term = term * (-s[..., i])
            out[..., i, j] = term
    return out


_S6_CENTER = np.array([1.2, 1.0, 1.4, 0.9, 1.1, 0.8])
_CLIFFORD_CENTER = np.array([0.9, 1.2, 0.8, 1.1, 1.0, 1.3])


def geodesic_sphere() -> HypersurfaceChart:
    """The totally geodesic equator x_8 = 0 (shape operator zero)."""

    def immerse(u):
        u = np.asarray(u, dtype=float)
        x = sphere_coords(u)
        return np.concatenate([x, np.zeros(u.shape[:-1] + (1,))], axis=-1)

    def jacobian(u):
        u = np.asarray(u, dtype=float)
        J = sphere_coords_jacobian(u)
        pad = np.zeros(u.shape[:-1] + (1, 6))
        return np.concatenate([J, pad], axis=-2)

    domain = tuple((0.15, np.pi - 0.15) for _ in range(5)) + ((0.0, 2 * np.pi),)
    return HypersurfaceChart(
        name="s6",
        immerse=immerse,
        jacobian=jacobian,
        domain=domain,
        center=_S6_CENTER.copy(),
        polar_axes=tuple(range(5)),
    )


def clifford_torus(k: int) -> HypersurfaceChart:
    """Minimal Clifford hypersurface with |A|^2 = 6."""
    if not 1 <= int(k) <= 5:
        raise ValueError("k out of range (Clifford family needs 1 <= k <= 5)")
    k = int(k)
    a = np.sqrt(k / 6.0)
    b = np.sqrt((6 - k) / 6.0)

    def immerse(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate(
            [a * sphere_coords(u[..., :k]), b * sphere_coords(u[..., k:])],
            axis=-1,
        )

    def jacobian(u):
        u = np.asarray(u, dtype=float)
        J = np.zeros(u.shape[:-1] + (8, 6))
        J[..., : k + 1, :k] = a * sphere_coords_jacobian(u[..., :k])
        J[..., k + 1 :, k:] = b * sphere_coords_jacobian(u[..., k:])
        return J

    # polar angles: all but the last angle of each factor
    polar = tuple(range(k - 1)) + tuple(range(k, 5))
    domain = tuple(
        (0.15, np.pi - 0.15) if i in polar else (0.0, 2 * np.pi) for i in range(6)
    )
    return HypersurfaceChart(
        name=f"clifford:{k}",
        immerse=immerse,
        jacobian=jacobian,
        domain=domain,
        center=_CLIFFORD_CENTER.copy(),
        polar_axes=polar,
    )


def surface_by_name(name: str) -> HypersurfaceChart:
    """Resolve an example selector: "s6" or "clifford:k" with k in 1..5."""
    name = str(name).strip().lower()
    if name == "s6":
        return geodesic_sphere()
    if name.startswith("clifford:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"unknown example {name!r}") from exc
        return clifford_torus(k)
    raise ValueError(f"unknown example {name!r}")


def sample_domain_point(chart: HypersurfaceChart, rng) -> np.ndarray:
    """Uniform sample inside the chart's safe domain box."""
    lo = np.array([d[0] for d in chart.domain])
    hi = np.array([d[1] for d in chart.domain])
    return lo + (hi - lo) * rng.random(6)
