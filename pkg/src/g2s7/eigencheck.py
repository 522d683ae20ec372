"""Conformal vector fields restricted to a hypersurface and the eigenvalue
verification of  laplacian(h) = -(|A|^2 + 6) h.

A constant ambient vector Y splits along the sphere as Y = V + f p with
V = Y - <Y,p> p tangent and f = <Y,p>; V is a conformal field.  Restricted
to the hypersurface, V = W + s N.  For two generators the function

    h = < xi(W), W~ >

is, on a minimal hypersurface, an eigenfunction of the Laplace-Beltrami
operator with eigenvalue |A|^2 + 6.  The module provides the closed-form
gradient, finite-difference checks of the five divergence identities
feeding that computation, and a chart-grid Laplacian to verify the
eigenvalue relation numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hypersurface import (
    HypersurfaceChart,
    ShapeData,
    _frames_batch,
    cross_product_derivative,
    frame_and_normal,
    shape_at,
)
from .sphere import TAU0, SpherePoint, TangentVector, _cross_arrays
from .surfaces import surface_by_name

__all__ = [
    "conformal_on_sphere",
    "RestrictedField",
    "restrict_field",
    "eigenfunction_value",
    "eigenfunction_values",
    "eigenfunction_gradient",
    "divergence_fd",
    "divergence_residuals",
    "laplace_assembled",
    "GridField",
    "laplace_beltrami",
    "Report",
    "eigenvalue_report",
    "convergence_study",
]


def conformal_on_sphere(Y, p):
    """Split a constant ambient field at a sphere point: (tangent part, potential)."""
    point = SpherePoint.of(p)
    Y = np.asarray(Y, dtype=float)
    f = float(Y @ point.p)
    return TangentVector(point, Y - f * point.p), f


@dataclass(frozen=True)
class RestrictedField:
    """Conformal field data restricted to the hypersurface at one point."""

    shape: ShapeData
    generator: np.ndarray      # the constant ambient vector Y
    tangential: np.ndarray     # W, tangent to M
    normal_coeff: float        # s = <V, N>
    potential: float           # f = <Y, p>


def restrict_field(chart: HypersurfaceChart, u, Y) -> RestrictedField:
    """Restrict the conformal field of a constant vector to the hypersurface."""
    shape = shape_at(chart, u)
    V, f = conformal_on_sphere(Y, shape.point)
    s = float(V.v @ shape.normal)
    W = V.v - s * shape.normal
    return RestrictedField(
        shape=shape,
        generator=np.asarray(Y, dtype=float).copy(),
        tangential=W,
        normal_coeff=s,
        potential=f,
    )


def _split_batch(P, N, Y):
    """Tangential parts and coefficients of a constant field on a batch."""
    f = P @ Y
    V = Y[None, :] - f[:, None] * P
    s = np.sum(V * N, axis=-1)
    W = V - s[:, None] * N
    return W, s, f


def eigenfunction_values(chart: HypersurfaceChart, U, Y, Yt) -> np.ndarray:
    """h = <xi(W), W~> on a batch of chart points (vectorized)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    Y = np.asarray(Y, dtype=float)
    Yt = np.asarray(Yt, dtype=float)
    P, E, N, _ = _frames_batch(chart, U)
    W, _, _ = _split_batch(P, N, Y)
    Wt, _, _ = _split_batch(P, N, Yt)
    return np.sum(_cross_arrays(P, N, W) * Wt, axis=-1)


def eigenfunction_value(chart: HypersurfaceChart, u, Y, Yt) -> float:
    return float(eigenfunction_values(chart, np.asarray(u, float)[None, :], Y, Yt)[0])


def eigenfunction_gradient(chart: HypersurfaceChart, u, Y, Yt) -> np.ndarray:
    """Closed-form gradient of h:

        -G(N,W,W~) - A B(W,W~)^T + f xi(W~) - s A xi(W~) - f~ xi(W) + s~ A xi(W)
    """
    r = restrict_field(chart, u, Y)
    rt = restrict_field(chart, u, Yt)
    shape = r.shape
    p, N = shape.point.p, shape.normal
    W, Wt = r.tangential, rt.tangential
    xiW = _cross_arrays(p, N, W)
    xiWt = _cross_arrays(p, N, Wt)
    crossT = shape.tangential(_cross_arrays(p, W, Wt))
    return (
        -cross_product_derivative(shape.point, N, W, Wt)
        - shape.apply_shape(crossT)
        + r.potential * xiWt
        - r.normal_coeff * shape.apply_shape(xiWt)
        - rt.potential * xiW
        + rt.normal_coeff * shape.apply_shape(xiW)
    )


def divergence_fd(chart: HypersurfaceChart, u, field, step: float = 1e-4) -> float:
    """FD divergence of an M-tangent field given as a chart-point callable."""
    if step <= 0:
        raise ValueError("step must be positive")
    u = np.asarray(u, dtype=float)
    _, E, _ = frame_and_normal(chart, u)
    J = chart.jac(u)
    C = np.linalg.lstsq(J, E, rcond=None)[0]
    total = 0.0
    for a in range(6):
        # normalized coordinate direction, rescaled afterwards
        speed = float(np.linalg.norm(C[:, a]))
        chat = C[:, a] / speed
        zp = field(u + step * chat)
        zm = field(u - step * chat)
        total += speed * float(((zp - zm) / (2 * step)) @ E[:, a])
    return total


def _restricted_parts(chart, u1, Y, Yt, need_shape):
    if need_shape:
        shape = shape_at(chart, u1, order=2, step=1e-4)
        p, E, N = shape.point.p, shape.frame, shape.normal
    else:
        shape = None
        p, E, N = frame_and_normal(chart, u1)
    f = float(Y @ p)
    W = Y - f * p
    W = W - float(W @ N) * N
    ft = float(Yt @ p)
    Wt = Yt - ft * p
    Wt = Wt - float(Wt @ N) * N
    s = float((Y - f * p) @ N)
    st = float((Yt - ft * p) @ N)
    return shape, p, E, N, W, Wt, s, st, f, ft


def divergence_residuals(chart: HypersurfaceChart, u, Y, Yt,
                         step: float = 1e-4) -> dict:
    """|FD divergence - closed form| for the five divergence identities.

    Keys and closed forms (xi = B(N, .), h = <xi W, W~>):
      f_xiWt   : Div(f xi W~)        = -h
      ft_xiW   : Div(f~ xi W)        = +h
      sA_xiWt  : Div(s A xi W~)      = -<AW, A xi W~>
      A_crossT : Div(A B(W,W~)^T)    = |A|^2 h + <AW, A xi W~> - <AW~, A xi W>
      G_NWWt   : Div(G(N,W,W~))      = (tau0^2/4) h
    """
    u = np.asarray(u, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Yt = np.asarray(Yt, dtype=float)
    shape = shape_at(chart, u)
    p, N = shape.point.p, shape.normal
    _, _, _, _, W, Wt, s, st, f, ft = _restricted_parts(chart, u, Y, Yt, False)
    xiW = _cross_arrays(p, N, W)
    xiWt = _cross_arrays(p, N, Wt)
    h = float(xiW @ Wt)
    AW, AWt = shape.apply_shape(W), shape.apply_shape(Wt)
    AxiW, AxiWt = shape.apply_shape(xiW), shape.apply_shape(xiWt)

    def fld_f_xiWt(u1):
        _, p1, _, N1, _, Wt1, _, _, f1, _ = _restricted_parts(chart, u1, Y, Yt, False)
        return f1 * _cross_arrays(p1, N1, Wt1)

    def fld_ft_xiW(u1):
        _, p1, _, N1, W1, _, _, _, _, ft1 = _restricted_parts(chart, u1, Y, Yt, False)
        return ft1 * _cross_arrays(p1, N1, W1)

    def fld_sA_xiWt(u1):
        sh, p1, _, N1, _, Wt1, s1, _, _, _ = _restricted_parts(chart, u1, Y, Yt, True)
        return s1 * sh.apply_shape(_cross_arrays(p1, N1, Wt1))

    def fld_A_crossT(u1):
        sh, p1, _, _, W1, Wt1, _, _, _, _ = _restricted_parts(chart, u1, Y, Yt, True)
        return sh.apply_shape(sh.tangential(_cross_arrays(p1, W1, Wt1)))

    def fld_G(u1):
        sh, p1, _, N1, W1, Wt1, _, _, _, _ = _restricted_parts(chart, u1, Y, Yt, False)
        return cross_product_derivative(SpherePoint(p1), N1, W1, Wt1)

    return {
        "f_xiWt": abs(divergence_fd(chart, u, fld_f_xiWt, step) - (-h)),
        "ft_xiW": abs(divergence_fd(chart, u, fld_ft_xiW, step) - h),
        "sA_xiWt": abs(divergence_fd(chart, u, fld_sA_xiWt, step) - (-(AW @ AxiWt))),
        "A_crossT": abs(
            divergence_fd(chart, u, fld_A_crossT, step)
            - (shape.shape_norm2 * h + AW @ AxiWt - AWt @ AxiW)
        ),
        "G_NWWt": abs(divergence_fd(chart, u, fld_G, step) - TAU0 ** 2 / 4.0 * h),
    }


def laplace_assembled(chart: HypersurfaceChart, u, Y, Yt):
    """Assemble laplacian(h) from the closed-form divergences of the gradient
    terms; returns (assembled value, -(|A|^2+6) h).  The two agree as an
    algebraic identity, which pins the wiring of the divergence suite.
    """
    shape = shape_at(chart, u)
    p, N = shape.point.p, shape.normal
    _, _, _, _, W, Wt, s, st, f, ft = _restricted_parts(chart, np.asarray(u, float), Y, Yt, False)
    xiW = _cross_arrays(p, N, W)
    xiWt = _cross_arrays(p, N, Wt)
    h = float(xiW @ Wt)
    AW, AWt = shape.apply_shape(W), shape.apply_shape(Wt)
    AxiW, AxiWt = shape.apply_shape(xiW), shape.apply_shape(xiWt)
    a2 = shape.shape_norm2
    assembled = (
        -(TAU0 ** 2 / 4.0) * h                      # -Div G(N,W,W~)
        - (a2 * h + AW @ AxiWt - AWt @ AxiW)        # -Div A B(W,W~)^T
        + (-h)                                      # +Div f xi W~
        - (-(AW @ AxiWt))                           # -Div s A xi W~
        - h                                         # -Div f~ xi W
        + (-(AWt @ AxiW))                           # +Div s~ A xi W
    )
    return assembled, -(a2 + 6.0) * h


# ---------------------------------------------------------------------------
# grid Laplace-Beltrami
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridField:
    """Scalar samples on a uniform chart lattice plus interior laplacian."""

    center: np.ndarray
    delta: float
    npts: int
    order: int
    values: np.ndarray      # shape (npts,)*6
    laplacian: np.ndarray   # shape (npts - 2*b,)*6 with b = order//2

    @property
    def box(self):
        half = (self.npts - 1) / 2.0 * self.delta
        return [(float(c - half), float(c + half)) for c in self.center]

    @property
    def interior_values(self) -> np.ndarray:
        b = self.order // 2
        sl = tuple(slice(b, self.npts - b) for _ in range(6))
        return self.values[sl]


_D1_W = {2: {1: 0.5, -1: -0.5},
         4: {1: 2 / 3, -1: -2 / 3, 2: -1 / 12, -2: 1 / 12}}
_D2_W = {2: {1: 1.0, 0: -2.0, -1: 1.0},
         4: {2: -1 / 12, 1: 4 / 3, 0: -5 / 2, -1: 4 / 3, -2: -1 / 12}}


def _shifted(arr, n, b, shifts):
    sl = [slice(b + shifts.get(ax, 0), n - b + shifts.get(ax, 0)) for ax in range(6)]
    return arr[tuple(sl)]


def laplace_beltrami(chart: HypersurfaceChart, field, center=None,
                     delta: float = 1e-2, npts: int = 5, order: int = 2,
                     margin: float = 0.1) -> GridField:
    """Laplace-Beltrami of a scalar chart field on a uniform lattice.

    Evaluates  (det g)^{-1/2} d_i( sqrt(det g) g^{ij} d_j u )  with central
    stencils of the requested order; the returned laplacian covers the
    interior nodes (stencil-width boundary excluded).  The metric factors
    come from the chart jacobian at the nodes.
    """
    if delta <= 0:
        raise ValueError("grid spacing must be positive")
    if order not in (2, 4):
        raise ValueError("stencil order must be 2 or 4")
    b = order // 2
    if npts < 2 * b + 1:
        raise ValueError("grid too small for the stencil")
    center = chart.center if center is None else np.asarray(center, dtype=float)
    offs = (np.arange(npts) - (npts - 1) / 2.0) * delta
    axes = [center[a] + offs for a in range(6)]
    mesh = np.meshgrid(*axes, indexing="ij")
    U = np.stack([m.ravel() for m in mesh], axis=-1)
    if chart.singular_margin(U) < margin:
        raise ValueError("grid touches singular region")

    vals = np.asarray(field(U), dtype=float).reshape((npts,) * 6)

    J = chart.jac(U)
    G = np.einsum("nia,nib->nab", J, J)
    Gi = np.linalg.inv(G)
    sq = np.sqrt(np.linalg.det(G))
    Wmat = (sq[:, None, None] * Gi).reshape((npts,) * 6 + (6, 6))
    sq = sq.reshape((npts,) * 6)

    n = npts
    d1w, d2w = _D1_W[order], _D2_W[order]

    def d1(arr, axis):
        out = 0.0
        for off, w in d1w.items():
            out = out + w * _shifted(arr, n, b, {axis: off})
        return out / delta

    def d2(arr, axis):
        out = 0.0
        for off, w in d2w.items():
            out = out + w * _shifted(arr, n, b, {axis: off})
        return out / delta ** 2

    def d11(arr, ax1, ax2):
        out = 0.0
        for o1, w1 in d1w.items():
            for o2, w2 in d1w.items():
                out = out + w1 * w2 * _shifted(arr, n, b, {ax1: o1, ax2: o2})
        return out / delta ** 2

    term = 0.0
    for i in range(6):
        dWi = d1(Wmat, i)  # d_i of the whole (6,6) block
        for j in range(6):
            term = term + dWi[..., i, j] * d1(vals, j)
            wij = _shifted(Wmat, n, b, {})[..., i, j]
            term = term + wij * (d2(vals, i) if i == j else d11(vals, i, j))
    lap = term / _shifted(sq, n, b, {})
    return GridField(center=np.asarray(center, float).copy(), delta=float(delta),
                     npts=int(npts), order=int(order), values=vals, laplacian=lap)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Report:
    """Eigenvalue verification summary for one example and generator pair."""

    example: str
    clifford_k: int | None
    generator1: np.ndarray
    generator2: np.ndarray
    box: list
    delta: float
    npts: int
    order: int
    lambda_expected: float
    max_abs_h: float
    max_residual: float
    rel_residual: float
    nonconstancy: float

    def to_dict(self) -> dict:
        return {
            "example": self.example,
            "k": self.clifford_k,
            "field1": [float(x) for x in self.generator1],
            "field2": [float(x) for x in self.generator2],
            "grid": {
                "box": [[float(a), float(b)] for a, b in self.box],
                "delta": self.delta,
                "npts": self.npts,
                "order": self.order,
            },
            "lambda_expected": self.lambda_expected,
            "max_abs_h": self.max_abs_h,
            "max_residual": self.max_residual,
            "rel_residual": self.rel_residual,
            "nonconstancy": self.nonconstancy,
        }


def eigenvalue_report(example, Y, Yt, delta: float = 5e-3, npts: int = 5,
                      order: int = 2, center=None) -> Report:
    """Verify  laplacian(h) = -(|A|^2 + 6) h  on a grid around a chart point."""
    chart = surface_by_name(example) if isinstance(example, str) else example
    Y = np.asarray(Y, dtype=float)
    Yt = np.asarray(Yt, dtype=float)
    gf = laplace_beltrami(
        chart, lambda U: eigenfunction_values(chart, U, Y, Yt),
        center=center, delta=delta, npts=npts, order=order,
    )
    scale = max(1.0, float(np.linalg.norm(Y) * np.linalg.norm(Yt)))
    if float(np.max(np.abs(gf.values))) < 1e-10 * scale:
        raise ValueError("degenerate field pair, choose independent generators")
    shape = shape_at(chart, gf.center)
    lam = shape.shape_norm2 + 6.0
    h_int = gf.interior_values
    residual = float(np.max(np.abs(gf.laplacian + lam * h_int)))
    max_h = float(np.max(np.abs(h_int)))
    k = None
    if chart.name.startswith("clifford:"):
        k = int(chart.name.split(":")[1])
    return Report(
        example=chart.name,
        clifford_k=k,
        generator1=Y.copy(),
        generator2=Yt.copy(),
        box=gf.box,
        delta=float(delta),
        npts=int(npts),
        order=int(order),
        lambda_expected=float(lam),
        max_abs_h=max_h,
        max_residual=residual,
        rel_residual=residual / max_h,
        nonconstancy=float(np.max(gf.values) - np.min(gf.values)),
    )


def convergence_study(example, Y, Yt, deltas=(2e-2, 1e-2, 5e-3),
                      npts: int = 5, order: int = 2, center=None):
    """Reports for several spacings plus the measured convergence rate."""
    reports = [
        eigenvalue_report(example, Y, Yt, delta=d, npts=npts, order=order,
                          center=center)
        for d in deltas
    ]
    logd = np.log([r.delta for r in reports])
    logr = np.log([r.rel_residual for r in reports])
    rate = float(np.polyfit(logd, logr, 1)[0])
    return reports, rate
