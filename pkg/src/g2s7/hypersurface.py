"""Oriented hypersurfaces of the 7-sphere through parametrized charts.

A chart immerses an open box of R^6 into the unit sphere of R^8.  From the
jacobian we build an orthonormal tangent frame (Gram-Schmidt with positive
diagonal, so deterministic), the unit normal inside the sphere's tangent
space (sign fixed so that [frame, N, p] is positively oriented in R^8,
unless the chart carries a normal hint), and the shape operator through
central differences of the normal field (Weingarten).

The induced almost complex structure is xi(X) = B(N, X); the derivative
tensor G(X, Y, Z) = (nabla_X B)(Y, Z) reduces on the round sphere to
(tau0/4) psi(X, Y, Z, .)^sharp.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .sphere import (
    TAU0,
    SpherePoint,
    _as_tangent_array,
    _cross_arrays,
    _phi_components,
    _stencil,
    make_tangent_frame,
)
from .forms import AltForm, hodge_star

__all__ = [
    "HypersurfaceChart",
    "ShapeData",
    "frame_and_normal",
    "shape_at",
    "apply_acs",
    "cross_product_derivative",
    "acs_derivative",
    "acs_derivative_fd",
    "nearly_kahler_defect",
    "umbilic_defect",
    "cross_defect",
    "acs_divergence",
    "acs_divergence_defect",
    "hyper_curvature",
    "codazzi_residual",
    "gauss_residual",
    "intrinsic_curvature_fd",
]

_RANK_TOL = 1e-8


@dataclass
class HypersurfaceChart:
    """Parametrized hypersurface patch M^6 inside the unit 7-sphere.

    immerse and jacobian must be vectorized over leading axes:
    (..., 6) -> (..., 8) and (..., 6) -> (..., 8, 6).  When jacobian is None
    it is built by central differences of the immersion.
    """

    name: str
    immerse: callable
    jacobian: callable | None = None
    domain: tuple = tuple((0.15, np.pi - 0.15) for _ in range(6))
    center: np.ndarray = field(default_factory=lambda: np.full(6, np.pi / 2))
    polar_axes: tuple = ()
    normal_hint: callable | None = None
    fd_step: float = 1e-6

    def point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        p = np.asarray(self.immerse(u), dtype=float)
        norms = np.linalg.norm(p, axis=-1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError("immersion does not land on the unit sphere")
        return p

    def jac(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(u), dtype=float)
        h = self.fd_step
        cols = []
        for a in range(6):
            e = np.zeros(6)
            e[a] = h
            cols.append((self.immerse(u + e) - self.immerse(u - e)) / (2 * h))
        return np.stack(cols, axis=-1)

    def singular_margin(self, u) -> float:
        """Distance of chart points to the coordinate singularities."""
        if not self.polar_axes:
            return np.inf
        u = np.atleast_2d(np.asarray(u, dtype=float))
        vals = u[..., list(self.polar_axes)]
        return float(np.min(np.minimum(vals, np.pi - vals)))

    def with_normal_hint(self, hint) -> "HypersurfaceChart":
        return replace(self, normal_hint=hint)


def _frames_batch(chart: HypersurfaceChart, U: np.ndarray):
    """Points, orthonormal tangent frames, unit normals for a batch (n, 6)."""
    P = chart.point(U)
    J = chart.jac(U)
    Q, R = np.linalg.qr(J)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    if np.min(np.abs(diag)) < _RANK_TOL:
        raise ValueError("immersion degenerate")
    sign = np.where(diag < 0, -1.0, 1.0)
    E = Q * sign[..., None, :]
    M = np.concatenate([P[..., None], E], axis=-1)
    Qc, _ = np.linalg.qr(M, mode="complete")
    N = Qc[..., 7]
    det = np.linalg.det(np.concatenate([E, N[..., None], P[..., None]], axis=-1))
    N = N * np.where(det < 0, -1.0, 1.0)[..., None]
    if chart.normal_hint is not None:
        hint = np.asarray(chart.normal_hint(U), dtype=float)
        hint = np.broadcast_to(hint, N.shape)
        agree = np.sum(N * hint, axis=-1)
        N = N * np.where(agree < 0, -1.0, 1.0)[..., None]
    # J = E (sign R): scale rows so that solving against the returned factor
    # yields the coordinate velocities of the frame columns
    return P, E, N, sign[..., :, None] * R


def frame_and_normal(chart: HypersurfaceChart, u):
    """Point, tangent frame (8x6), and unit normal at a single chart point."""
    P, E, N, _ = _frames_batch(chart, np.asarray(u, float)[None, :])
    return P[0], E[0], N[0]


@dataclass(frozen=True)
class ShapeData:
    """Second-order data of the hypersurface at one point."""

    point: SpherePoint
    frame: np.ndarray          # 8x6, orthonormal tangent basis of M
    normal: np.ndarray         # unit normal inside the sphere tangent space
    shape_matrix: np.ndarray   # A in the frame basis, symmetric 6x6
    mean_curvature: float      # tr A
    shape_norm2: float         # |A|^2

    def apply_shape(self, X) -> np.ndarray:
        """A X for an ambient tangent vector of M."""
        x = _as_tangent_array(X)
        return self.frame @ (self.shape_matrix @ (self.frame.T @ x))

    def tangential(self, w) -> np.ndarray:
        """Projection of an ambient vector onto the tangent space of M."""
        return self.frame @ (self.frame.T @ np.asarray(w, float))

    def random_tangent(self, rng) -> np.ndarray:
        coeff = rng.normal(size=6)
        coeff /= np.linalg.norm(coeff)
        return self.frame @ coeff


def shape_at(chart: HypersurfaceChart, u, step: float = 1e-3,
             order: int = 4) -> ShapeData:
    """Shape operator by differencing the normal field:  A X = -grad_X N.

    The normal is differenced along raw coordinate axes (the immersions have
    bounded coordinate derivatives everywhere in the chart box) and the
    result contracted with the frame velocities, which keeps the error flat
    up to the chart margins.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    u = np.asarray(u, dtype=float)
    P, E, N, R = _frames_batch(chart, u[None, :])
    p, E, N, R = P[0], E[0], N[0], R[0]
    # coordinate velocities: J c_a = E_a  =>  c_a = R^{-1} e_a
    C = np.linalg.solve(R, np.eye(6))
    offsets, weights = _stencil(order)
    axes = np.eye(6)
    batch = np.stack([u + off * step * axes[i]
                      for i in range(6) for off in offsets])
    _, _, Nb, _ = _frames_batch(chart, batch)
    Nb = Nb.reshape(6, len(offsets), 8)
    D = np.einsum("s,isj->ji", np.asarray(weights), Nb) / step  # dN/du, 8x6
    A = -(E.T @ D @ C)
    asym = np.max(np.abs(A - A.T))
    if asym > 1e-8 * max(1.0, np.max(np.abs(A))):
        raise ValueError("shape operator failed the symmetry check")
    A = (A + A.T) / 2.0
    return ShapeData(
        point=SpherePoint(p),
        frame=E,
        normal=N,
        shape_matrix=A,
        mean_curvature=float(np.trace(A)),
        shape_norm2=float(np.sum(A * A)),
    )


def _check_tangent_to_m(shape: ShapeData, x: np.ndarray):
    scale = max(1.0, float(np.linalg.norm(x)))
    if abs(float(x @ shape.point.p)) > 1e-8 * scale:
        raise ValueError("vector not tangent to the hypersurface")
    if abs(float(x @ shape.normal)) > 1e-8 * scale:
        raise ValueError("vector not tangent to the hypersurface")


def apply_acs(shape: ShapeData, X) -> np.ndarray:
    """Induced almost complex structure: xi(X) = B(N, X)."""
    x = _as_tangent_array(X)
    _check_tangent_to_m(shape, x)
    return _cross_arrays(shape.point.p, shape.normal, x)


def cross_product_derivative(p, X, Y, Z) -> np.ndarray:
    """G(X,Y,Z) = (nabla_X B)(Y,Z) = (tau0/4) psi(X,Y,Z,.)^sharp."""
    point = SpherePoint.of(p)
    frame = make_tangent_frame(point)
    psi = hodge_star(AltForm.from_dense(_phi_components(point.p, frame)))
    coords = frame.T @ np.stack(
        [_as_tangent_array(X), _as_tangent_array(Y), _as_tangent_array(Z)], axis=1
    )
    w = TAU0 / 4.0 * np.einsum(
        "abcd,a,b,c->d", psi.to_dense(), coords[:, 0], coords[:, 1], coords[:, 2]
    )
    return frame @ w


def acs_derivative(shape: ShapeData, X, Y) -> np.ndarray:
    """Closed form for (nabla_X xi)(Y):

        G(X, N, Y) - phi(N, Y, AX) N - B(AX, Y).
    """
    x, y = _as_tangent_array(X), _as_tangent_array(Y)
    p = shape.point.p
    ax = shape.apply_shape(x)
    g_term = cross_product_derivative(shape.point, x, shape.normal, y)
    phi_nyax = float(_cross_arrays(p, shape.normal, y) @ ax)
    return g_term - phi_nyax * shape.normal - _cross_arrays(p, ax, y)


def acs_derivative_fd(chart: HypersurfaceChart, u, X, Y,
                      step: float = 1e-4) -> np.ndarray:
    """Finite-difference oracle for (nabla_X xi)(Y) along the hypersurface."""
    if step <= 0:
        raise ValueError("step must be positive")
    u = np.asarray(u, dtype=float)
    p, E, N = frame_and_normal(chart, u)
    x, y = _as_tangent_array(X), _as_tangent_array(Y)
    J = chart.jac(u)
    c, *_ = np.linalg.lstsq(J, x, rcond=None)
    # step along the normalized coordinate direction and rescale, so the
    # stencil error stays bounded near the chart margins
    speed = float(np.linalg.norm(c))
    chat = c / speed

    def sample(u1):
        p1, E1, N1 = frame_and_normal(chart, u1)
        ytan = E1 @ (E1.T @ y)
        return _cross_arrays(p1, N1, ytan), ytan

    zp, yp = sample(u + step * chat)
    zm, ym = sample(u - step * chat)
    dxi = speed * (E @ (E.T @ ((zp - zm) / (2 * step))))
    dy = speed * (E @ (E.T @ ((yp - ym) / (2 * step))))
    return dxi - _cross_arrays(p, N, dy)


def umbilic_defect(shape: ShapeData) -> float:
    """Frobenius distance of A from its trace part; zero iff umbilic."""
    A = shape.shape_matrix
    return float(np.linalg.norm(A - np.trace(A) / 6.0 * np.eye(6)))


def cross_defect(shape: ShapeData, X) -> float:
    """Norm of the tangential part of B(AX, X)."""
    x = _as_tangent_array(X)
    w = _cross_arrays(shape.point.p, shape.apply_shape(x), x)
    return float(np.linalg.norm(shape.tangential(w)))


def nearly_kahler_defect(shape: ShapeData, samples: int = 64,
                         seed: int = 0) -> float:
    """max over sampled unit tangents X of |(nabla_X xi)(X)|."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = shape.random_tangent(rng)
        worst = max(worst, float(np.linalg.norm(acs_derivative(shape, x, x))))
    return worst


def acs_divergence(shape: ShapeData, v) -> float:
    """(Div xi)(v) = sum_a < (nabla_{E_a} xi)(v), E_a >."""
    varr = _as_tangent_array(v)
    total = 0.0
    for a in range(6):
        ea = shape.frame[:, a]
        total += float(acs_derivative(shape, ea, varr) @ ea)
    return total


def acs_divergence_defect(shape: ShapeData, samples: int = 16,
                          seed: int = 0) -> float:
    """max |(Div xi)(v)| over sampled unit tangents; vanishes identically."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        worst = max(worst, abs(acs_divergence(shape, shape.random_tangent(rng))))
    return worst


def hyper_curvature(shape: ShapeData):
    """Ricci (in the frame basis) and scalar curvature of a minimal M^6:

        Ric = 5 g - A^2,      S = 30 - |A|^2.
    """
    if abs(shape.mean_curvature) > 1e-8:
        raise ValueError("formula requires minimality")
    A = shape.shape_matrix
    ric = 5.0 * np.eye(6) - A @ A
    return ric, 30.0 - shape.shape_norm2


def _shape_field(chart, u1, axis):
    s = shape_at(chart, u1, order=2, step=1e-4)
    col = chart.jac(u1)[:, axis]
    return s.apply_shape(col)


def codazzi_residual(chart: HypersurfaceChart, u, i: int, j: int,
                     step: float = 1e-4) -> float:
    """| nabla_i (A d_j) - nabla_j (A d_i) |  for coordinate fields.

    Coordinate fields commute, so the bracket term vanishes exactly.
    """
    u = np.asarray(u, dtype=float)
    _, E, _ = frame_and_normal(chart, u)
    ei, ej = np.zeros(6), np.zeros(6)
    ei[i], ej[j] = step, step
    d_i = (_shape_field(chart, u + ei, j) - _shape_field(chart, u - ei, j)) / (2 * step)
    d_j = (_shape_field(chart, u + ej, i) - _shape_field(chart, u - ej, i)) / (2 * step)
    resid = E @ (E.T @ (d_i - d_j))
    return float(np.linalg.norm(resid))


def intrinsic_curvature_fd(chart: HypersurfaceChart, u, X, Y, Z,
                           step: float = 1e-3) -> np.ndarray:
    """Rm(X,Y)Z of the induced metric from coordinate finite differences."""
    u = np.asarray(u, dtype=float)

    def metric(u1):
        J = chart.jac(u1)
        return J.T @ J

    def christoffel(u1):
        dG = np.empty((6, 6, 6))
        for a in range(6):
            e = np.zeros(6)
            e[a] = step
            dG[a] = (metric(u1 + e) - metric(u1 - e)) / (2 * step)
        Gi = np.linalg.inv(metric(u1))
        # Gamma^l_{ij} = 1/2 g^{lm} (d_i g_{mj} + d_j g_{mi} - d_m g_{ij})
        sym = np.einsum("imj->ijm", dG) + np.einsum("jmi->ijm", dG) - np.einsum("mij->ijm", dG)
        return 0.5 * np.einsum("lm,ijm->lij", Gi, sym)

    Gamma = christoffel(u)
    dGamma = np.empty((6, 6, 6, 6))
    for a in range(6):
        e = np.zeros(6)
        e[a] = step
        dGamma[a] = (christoffel(u + e) - christoffel(u - e)) / (2 * step)
    # R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    #             + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
    R = (np.einsum("iljk->lkij", dGamma) - np.einsum("jlik->lkij", dGamma)
         + np.einsum("lim,mjk->lkij", Gamma, Gamma)
         - np.einsum("ljm,mik->lkij", Gamma, Gamma))
    J = chart.jac(u)
    xc, *_ = np.linalg.lstsq(J, _as_tangent_array(X), rcond=None)
    yc, *_ = np.linalg.lstsq(J, _as_tangent_array(Y), rcond=None)
    zc, *_ = np.linalg.lstsq(J, _as_tangent_array(Z), rcond=None)
    out = np.einsum("lkij,i,j,k->l", R, xc, yc, zc)
    return J @ out


def gauss_residual(chart: HypersurfaceChart, u, X, Y, Z,
                   step: float = 1e-3) -> float:
    """Intrinsic FD curvature against the sphere Gauss equation

        Rm(X,Y)Z = <Y,Z> X - <X,Z> Y + <AY,Z> AX - <AX,Z> AY.
    """
    shape = shape_at(chart, u)
    x, y, z = (_as_tangent_array(v) for v in (X, Y, Z))
    ax, ay = shape.apply_shape(x), shape.apply_shape(y)
    rhs = ((y @ z) * x - (x @ z) * y + (ay @ z) * ax - (ax @ z) * ay)
    lhs = intrinsic_curvature_fd(chart, u, x, y, z, step=step)
    return float(np.linalg.norm(lhs - rhs))
