"""The round nearly-parallel structure on the unit 7-sphere.

The pointwise cross product on a tangent space is the 3-fold cross product
with the base point inserted:

    B_p(u, v) = CROSS_SIGN * cross3(p, u, v),        u, v  in  p-perp.

CROSS_SIGN = +1 together with the *normal-last* orientation (tangent frames
f_1..f_7 with det[f_1, .., f_7, p] > 0) makes the induced 3-form positive
at every point and pins the torsion scalar to tau0 = +4.  With this choice
the restriction at the real unit octonion is the *negative* of the flat
cross product on the imaginary units; the opposite sign choice would flip
tau0 to -4.  Both facts are regression-tested.

Finite differences run along great circles q(t) = cos(t) p + sin(t) X with
the frame transported by tangential projection, which agrees with parallel
transport to the order of the central stencils.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import AltForm, MetricTensor, hodge_star, project2, sym2_from_3form, sym2_to_3form
from .octonion import cross3

__all__ = [
    "CROSS_SIGN",
    "TAU0",
    "SpherePoint",
    "TangentVector",
    "TorsionTensor",
    "tangent_project",
    "cross_s7",
    "make_tangent_frame",
    "frame_orientation_sign",
    "phi_psi_at",
    "sphere_nabla",
    "covariant_phi_derivative",
    "covariant_psi_derivative",
    "torsion_at",
    "torsion_forms",
    "torsion_from_forms",
    "nearly_curvature",
    "ricci_from_constant_torsion",
]

#: Sign relating the tangent-space cross product to cross3(p, ., .).
CROSS_SIGN = 1.0

#: Torsion scalar of the round structure (regression-tested, not re-derived).
TAU0 = 4.0

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector in R^8."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float).copy()
        if arr.shape != (8,):
            raise ValueError("sphere point needs 8 components")
        if abs(np.linalg.norm(arr) - 1.0) > _UNIT_TOL:
            raise ValueError("sphere point must have unit norm")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @classmethod
    def of(cls, arr) -> "SpherePoint":
        return arr if isinstance(arr, SpherePoint) else cls(np.asarray(arr, float))


@dataclass(frozen=True)
class TangentVector:
    """Vector in R^8 orthogonal to its base point."""

    base: SpherePoint
    v: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.v, dtype=float).copy()
        if arr.shape != (8,):
            raise ValueError("tangent vector needs 8 components")
        tol = _UNIT_TOL * max(1.0, float(np.linalg.norm(arr)))
        if abs(float(arr @ self.base.p)) > tol:
            raise ValueError("tangent vector must be orthogonal to its base point")
        arr.setflags(write=False)
        object.__setattr__(self, "v", arr)

    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


def _as_point_array(p) -> np.ndarray:
    return p.p if isinstance(p, SpherePoint) else np.asarray(p, dtype=float)


def _as_tangent_array(x) -> np.ndarray:
    return x.v if isinstance(x, TangentVector) else np.asarray(x, dtype=float)


def _check_base(p: SpherePoint, *vecs):
    for x in vecs:
        if isinstance(x, TangentVector):
            if np.max(np.abs(x.base.p - p.p)) > _UNIT_TOL:
                raise ValueError("tangent vectors based at different points")


def tangent_project(p, v) -> TangentVector:
    """Orthogonal projection of an ambient vector onto the tangent space."""
    point = SpherePoint.of(p)
    arr = np.asarray(v, dtype=float)
    return TangentVector(point, arr - (arr @ point.p) * point.p)


def _cross_arrays(p, u, v) -> np.ndarray:
    """Tangent-space cross product on raw arrays; broadcasts."""
    return CROSS_SIGN * cross3(p, u, v)


def cross_s7(p, u, v) -> TangentVector:
    """Cross product of two tangent vectors at a sphere point."""
    point = SpherePoint.of(p)
    _check_base(point, u, v)
    out = _cross_arrays(point.p, _as_tangent_array(u), _as_tangent_array(v))
    # orthogonal to p by the cross-product axioms; re-attach exactly
    out = out - (out @ point.p) * point.p
    return TangentVector(point, out)


def frame_orientation_sign(p, frame) -> float:
    """Sign of det[f_1 .. f_7, p] (normal-last orientation convention)."""
    parr = _as_point_array(p)
    m = np.column_stack([np.asarray(frame, float), parr])
    return float(np.sign(np.linalg.det(m)))


def make_tangent_frame(p) -> np.ndarray:
    """Deterministic positively-oriented orthonormal frame of p-perp (8x7)."""
    parr = _as_point_array(p)
    drop = int(np.argmax(np.abs(parr)))
    cols = [parr] + [np.eye(8)[j] for j in range(8) if j != drop]
    q, r = np.linalg.qr(np.stack(cols, axis=1))
    q = q * np.sign(np.diag(r))
    frame = q[:, 1:].copy()
    if frame_orientation_sign(parr, frame) < 0:
        frame[:, 6] = -frame[:, 6]
    return frame


def _phi_components(parr: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """phi_p(vecs_a, vecs_b, vecs_c) for the columns of an 8xm matrix."""
    m = vecs.shape[1]
    crosses = _cross_arrays(parr, vecs.T[:, None, :], vecs.T[None, :, :])
    comp = np.einsum("abk,kc->abc", crosses, vecs)
    return (comp - np.swapaxes(comp, 0, 1)) / 2.0  # kill roundoff asymmetry


def phi_psi_at(p, frame=None):
    """Fundamental 3-form, 4-form and metric at a point, in a given frame.

    The frame must be orthonormal and positively oriented (normal-last);
    the returned metric is then the identity and psi = star(phi).
    """
    point = SpherePoint.of(p)
    if frame is None:
        frame = make_tangent_frame(point)
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (8, 7):
        raise ValueError("frame must be 8x7 with tangent columns")
    gram = frame.T @ frame
    if (np.max(np.abs(gram - np.eye(7))) > 1e-10
            or np.max(np.abs(point.p @ frame)) > 1e-10):
        raise ValueError("frame must be orthonormal and tangent")
    if frame_orientation_sign(point, frame) <= 0:
        raise ValueError("frame must be positively oriented (normal last)")
    phi = AltForm.from_dense(_phi_components(point.p, frame))
    psi = hodge_star(phi)
    return phi, psi, MetricTensor.identity()


_STENCILS = {
    2: ((1.0, -1.0), (0.5, -0.5)),
    4: ((1.0, 2.0, -1.0, -2.0), (2.0 / 3.0, -1.0 / 12.0, -2.0 / 3.0, 1.0 / 12.0)),
}


def _stencil(order: int):
    if order not in _STENCILS:
        raise ValueError("stencil order must be 2 or 4")
    offsets, weights = _STENCILS[order]
    return offsets, weights


def sphere_nabla(field, p, X, step: float = 1e-4, order: int = 2) -> TangentVector:
    """Covariant derivative of a tangent field along X by central differences.

    The field is sampled along the great circle through p in direction X and
    the flat derivative is projected back to the tangent space at p.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    point = SpherePoint.of(p)
    _check_base(point, X)
    xarr = _as_tangent_array(X)
    speed = float(np.linalg.norm(xarr))
    if speed == 0.0:
        return TangentVector(point, np.zeros(8))
    xhat = xarr / speed
    offsets, weights = _stencil(order)
    acc = np.zeros(8)
    for off, w in zip(offsets, weights):
        t = off * step
        q = np.cos(t) * point.p + np.sin(t) * xhat
        val = field(SpherePoint(q / np.linalg.norm(q)))
        acc += w * _as_tangent_array(val)
    deriv = speed * acc / step
    return TangentVector(point, deriv - (deriv @ point.p) * point.p)


def _projected_frame(q: np.ndarray, frame: np.ndarray) -> np.ndarray:
    return frame - np.outer(q, q @ frame)


def covariant_phi_derivative(p, step: float = 1e-4, order: int = 2,
                             frame=None) -> tuple[np.ndarray, np.ndarray]:
    """(nabla phi)_{l,abc} in an orthonormal frame, plus the frame used.

    Central differences along great circles; the frame is transported by
    tangential projection, which matches parallel transport to the stencil
    order for even stencils.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    point = SpherePoint.of(p)
    frame = make_tangent_frame(point) if frame is None else np.asarray(frame, float)
    offsets, weights = _stencil(order)
    grad = np.zeros((7, 7, 7, 7))
    for l in range(7):
        d = frame[:, l]
        acc = np.zeros((7, 7, 7))
        for off, w in zip(offsets, weights):
            t = off * step
            q = np.cos(t) * point.p + np.sin(t) * d
            q = q / np.linalg.norm(q)
            acc += w * _phi_components(q, _projected_frame(q, frame))
        grad[l] = acc / step
    return grad, frame


def _psi_components_at(q: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """psi_q evaluated on the columns of vecs via an auxiliary frame."""
    aux = make_tangent_frame(SpherePoint(q))
    psi = hodge_star(AltForm.from_dense(_phi_components(q, aux))).to_dense()
    coords = aux.T @ vecs
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", psi, coords, coords, coords, coords)


def covariant_psi_derivative(p, step: float = 1e-4, order: int = 2,
                             frame=None) -> tuple[np.ndarray, np.ndarray]:
    """(nabla psi)_{m,ijkl} in an orthonormal frame, plus the frame used."""
    if step <= 0:
        raise ValueError("step must be positive")
    point = SpherePoint.of(p)
    frame = make_tangent_frame(point) if frame is None else np.asarray(frame, float)
    offsets, weights = _stencil(order)
    grad = np.zeros((7, 7, 7, 7, 7))
    for m in range(7):
        d = frame[:, m]
        acc = np.zeros((7, 7, 7, 7))
        for off, w in zip(offsets, weights):
            t = off * step
            q = np.cos(t) * point.p + np.sin(t) * d
            q = q / np.linalg.norm(q)
            acc += w * _psi_components_at(q, _projected_frame(q, frame))
        grad[m] = acc / step
    return grad, frame


@dataclass(frozen=True)
class TorsionTensor:
    """Full torsion 2-tensor in a chosen orthonormal tangent frame."""

    point: SpherePoint
    frame: np.ndarray
    tensor: np.ndarray


def torsion_at(p, step: float = 1e-4, order: int = 2, frame=None) -> TorsionTensor:
    """Full torsion T_{lm} = (1/24) (nabla_l phi_{abc}) psi_{m abc}.

    For the round structure T is the identity matrix (tau0/4 = 1) up to the
    finite-difference error of the stencil.
    """
    point = SpherePoint.of(p)
    grad, frame = covariant_phi_derivative(point, step=step, order=order, frame=frame)
    _, psi, _ = phi_psi_at(point, frame)
    T = np.einsum("labc,mabc->lm", grad, psi.to_dense()) / 24.0
    return TorsionTensor(point, frame, T)


def torsion_forms(torsion, phi: AltForm, metric: MetricTensor | None = None):
    """Split a torsion 2-tensor into (tau0, tau1, tau2, tau3).

    tau0 is 4/7 of the metric trace; the symmetric traceless part gives
    -tau3 (through the symmetric-tensor embedding into 3-forms); the
    antisymmetric part splits under project2 into tau1 and -tau2/2.
    """
    T = torsion.tensor if isinstance(torsion, TorsionTensor) else np.asarray(torsion, float)
    metric = MetricTensor.identity() if metric is None else metric
    gi = metric.inverse
    tau0 = 4.0 / 7.0 * float(np.einsum("lm,ml->", T, gi))
    sym = (T + T.T) / 2.0 - (tau0 / 4.0) * metric.g
    tau3 = sym2_to_3form(-sym, phi, metric)
    anti = (T - T.T) / 2.0
    kappa = AltForm.from_dense(anti)
    tau1, rest = project2(kappa, phi, metric)
    tau2 = -2.0 * rest
    return tau0, tau1, tau2, tau3


def torsion_from_forms(tau0: float, tau1: AltForm, tau2: AltForm, tau3: AltForm,
                       phi: AltForm, metric: MetricTensor | None = None) -> np.ndarray:
    """Recompose the torsion 2-tensor from its four components."""
    metric = MetricTensor.identity() if metric is None else metric
    T = (tau0 / 4.0) * metric.g
    T = T - sym2_from_3form(tau3, phi, metric)
    T = T + tau1.to_dense()
    T = T - 0.5 * tau2.to_dense()
    return T


def nearly_curvature(tau0: float, metric: MetricTensor | None = None):
    """Ricci and scalar curvature when tau0 is the only torsion component:
    Ric = (3/8) tau0^2 g  and  S = (21/8) tau0^2."""
    metric = MetricTensor.identity() if metric is None else metric
    ric = 3.0 / 8.0 * tau0 ** 2 * metric.g
    scal = 21.0 / 8.0 * tau0 ** 2
    return ric, scal


def ricci_from_constant_torsion(T, psi: AltForm, metric: MetricTensor | None = None) -> np.ndarray:
    """General torsion-to-Ricci formula specialized to covariantly constant T:

        R_jk = -T_jl g^{li} T_ik + tr(T) T_jk
               - T_jb T_ia g^{il} g^{ap} psi_{lpqk} g^{bq}
    """
    T = np.asarray(T, dtype=float)
    metric = MetricTensor.identity() if metric is None else metric
    gi = metric.inverse
    pd = psi.to_dense()
    trT = float(np.einsum("ij,ji->", T, gi))
    term1 = -T @ gi @ T
    term2 = trT * T
    term3 = -np.einsum("jb,ia,il,ap,lpqk,bq->jk", T, T, gi, gi, pd, gi)
    return term1 + term2 + term3
