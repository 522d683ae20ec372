"""Pointwise exterior algebra on a 7-dimensional inner-product space.

Alternating forms are stored densely over strictly increasing multi-indices
(dimension fixed at 7, so all combinatorial tables are precomputed).  Public
index tuples are 1-based, matching the usual dx^{ijk} notation.

Convention notes, all pinned by exact integer computation against the
fundamental forms (see the test suite):

* ``hodge_star`` uses the orientation in which dx^1..dx^7 is positive;
  star(phi0) equals the standard 4-form psi0.
* ``metric_from_3form`` extracts g from  S(u,v) = +(1/6)(u,phi)^(v,phi)^phi,
  the sign for which phi0 recovers the identity metric.
* The operator beta -> star(phi ^ beta) on 2-forms has eigenvalue +2 on the
  7-dimensional module {X , phi} and -1 on the 14-dimensional module
  {beta : beta ^ psi = 0}.  (Some published tables carry the opposite
  overall sign convention, which swaps these to -2/+1.)
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache

import numpy as np

from .octonion import FORM3_TRIPLES, _perm_sign

__all__ = [
    "AltForm",
    "MetricTensor",
    "wedge",
    "interior",
    "hodge_star",
    "inner",
    "pullback",
    "metric_from_3form",
    "project2",
    "project3",
    "sym2_to_3form",
    "sym2_from_3form",
    "decompose_high",
    "phi0",
    "psi0",
    "volume_form",
    "load_form",
    "dump_form",
    "OMEGA2_7_EIGENVALUE",
    "OMEGA2_14_EIGENVALUE",
]

DIM = 7

#: Eigenvalues of beta -> star(phi ^ beta) on the two irreducible 2-form
#: modules, fixed once by exact evaluation on the fundamental 3-form.
OMEGA2_7_EIGENVALUE = 2.0
OMEGA2_14_EIGENVALUE = -1.0


@lru_cache(maxsize=None)
def _tuples(k: int):
    return tuple(itertools.combinations(range(DIM), k))


@lru_cache(maxsize=None)
def _pos(k: int):
    return {t: i for i, t in enumerate(_tuples(k))}


def _ncomps(k: int) -> int:
    return len(_tuples(k))


@lru_cache(maxsize=None)
def _wedge_table(p: int, q: int):
    """List of (out_pos, a_pos, b_pos, sign) for the shuffle-sum wedge."""
    table = []
    posa, posb, posk = _pos(p), _pos(q), _pos(p + q)
    for K in _tuples(p + q):
        for picks in itertools.combinations(range(p + q), p):
            I = tuple(K[i] for i in picks)
            J = tuple(K[j] for j in range(p + q) if j not in picks)
            sign = _perm_sign(I + J)
            table.append((posk[K], posa[I], posb[J], sign))
    return table


@lru_cache(maxsize=None)
def _interior_table(k: int):
    """idx[i, outpos], sgn[i, outpos] such that (X,a)_J = X_i a[idx] * sgn."""
    m = _ncomps(k - 1)
    idx = -np.ones((DIM, m), dtype=np.int64)
    sgn = np.zeros((DIM, m), dtype=np.int64)
    posk = _pos(k)
    for out, J in enumerate(_tuples(k - 1)):
        for i in range(DIM):
            if i in J:
                continue
            full = tuple(sorted((i,) + J))
            idx[i, out] = posk[full]
            sgn[i, out] = _perm_sign((i,) + J)
    return idx, sgn


@lru_cache(maxsize=None)
def _complement_table(k: int):
    """For each increasing I: position of its complement and sign eps(I, Ic)."""
    m = _ncomps(k)
    cpos = np.zeros(m, dtype=np.int64)
    csgn = np.zeros(m, dtype=np.int64)
    posc = _pos(DIM - k)
    for i, I in enumerate(_tuples(k)):
        Ic = tuple(sorted(set(range(DIM)) - set(I)))
        cpos[i] = posc[Ic]
        csgn[i] = _perm_sign(I + Ic)
    return cpos, csgn


class AltForm:
    """Alternating k-form on R^7, stored over increasing multi-indices."""

    __slots__ = ("degree", "comps")

    def __init__(self, degree: int, comps=None):
        if not 0 <= degree <= DIM:
            raise ValueError("form degree must lie in 0..7")
        self.degree = int(degree)
        n = _ncomps(self.degree)
        if comps is None:
            self.comps = np.zeros(n)
        else:
            arr = np.asarray(comps, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"degree-{degree} form needs {n} components")
            self.comps = arr.copy()

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, degree: int) -> "AltForm":
        return cls(degree)

    @classmethod
    def basis(cls, indices) -> "AltForm":
        """Basis form dx^{i1...ik} for a strictly increasing 1-based tuple."""
        f = cls(len(indices))
        f[tuple(indices)] = 1.0
        return f

    @classmethod
    def from_components(cls, degree: int, entries: dict) -> "AltForm":
        """Build from {1-based index tuple: value}; tuples may be unsorted."""
        f = cls(degree)
        for idx, val in entries.items():
            f[idx] = float(val)
        return f

    @classmethod
    def from_dense(cls, arr) -> "AltForm":
        arr = np.asarray(arr, dtype=float)
        k = arr.ndim
        f = cls(k)
        for i, I in enumerate(_tuples(k)):
            f.comps[i] = arr[I]
        return f

    # -- indexing (1-based, any order, signed) ------------------------
    @staticmethod
    def _canon(indices):
        idx0 = tuple(int(i) - 1 for i in indices)
        if any(i < 0 or i >= DIM for i in idx0):
            raise IndexError("form indices must lie in 1..7")
        if len(set(idx0)) != len(idx0):
            return None, 0
        order = tuple(sorted(idx0))
        return order, _perm_sign(idx0)

    def __getitem__(self, indices) -> float:
        if isinstance(indices, int):
            indices = (indices,)
        key, sign = self._canon(indices)
        if sign == 0:
            return 0.0
        return sign * float(self.comps[_pos(self.degree)[key]])

    def __setitem__(self, indices, value):
        if isinstance(indices, int):
            indices = (indices,)
        key, sign = self._canon(indices)
        if sign == 0:
            if value != 0.0:
                raise IndexError("repeated index in alternating form")
            return
        self.comps[_pos(self.degree)[key]] = sign * float(value)

    def terms(self):
        """Yield (increasing 1-based tuple, value) for nonzero components."""
        for i, I in enumerate(_tuples(self.degree)):
            if self.comps[i] != 0.0:
                yield tuple(j + 1 for j in I), float(self.comps[i])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((DIM,) * self.degree)
        for i, I in enumerate(_tuples(self.degree)):
            val = self.comps[i]
            if val == 0.0:
                continue
            for perm in itertools.permutations(range(self.degree)):
                out[tuple(I[j] for j in perm)] = val * _perm_sign(perm)
        return out

    # -- linear structure ---------------------------------------------
    def _like(self, comps) -> "AltForm":
        f = AltForm.__new__(AltForm)
        f.degree = self.degree
        f.comps = comps
        return f

    def __add__(self, other: "AltForm") -> "AltForm":
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        return self._like(self.comps + other.comps)

    def __sub__(self, other: "AltForm") -> "AltForm":
        if self.degree != other.degree:
            raise ValueError("cannot subtract forms of different degree")
        return self._like(self.comps - other.comps)

    def __neg__(self) -> "AltForm":
        return self._like(-self.comps)

    def __mul__(self, scalar) -> "AltForm":
        return self._like(self.comps * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "AltForm":
        return self._like(self.comps / float(scalar))

    def copy(self) -> "AltForm":
        return self._like(self.comps.copy())

    def norm(self) -> float:
        """Euclidean norm of the component vector (identity metric)."""
        return float(np.linalg.norm(self.comps))

    def __repr__(self):
        parts = [
            f"{v:+g}*e{''.join(str(i) for i in idx)}" for idx, v in self.terms()
        ]
        body = " ".join(parts[:8]) + (" ..." if len(parts) > 8 else "")
        return f"AltForm(deg={self.degree}: {body or '0'})"


class MetricTensor:
    """Symmetric positive-definite bilinear form with its volume element."""

    __slots__ = ("g", "vol", "_inv", "_gram")

    def __init__(self, g, vol=None):
        g = np.asarray(g, dtype=float)
        if g.shape != (DIM, DIM):
            raise ValueError("metric must be 7x7")
        if not np.allclose(g, g.T, atol=1e-10):
            raise ValueError("metric must be symmetric")
        eig = np.linalg.eigvalsh((g + g.T) / 2)
        if eig[0] <= 0:
            raise ValueError("metric must be positive definite")
        self.g = (g + g.T) / 2
        det = float(np.linalg.det(self.g))
        self.vol = float(vol) if vol is not None else float(np.sqrt(det))
        if self.vol <= 0 or not np.isclose(self.vol, np.sqrt(det), rtol=1e-8):
            raise ValueError("volume element must equal sqrt(det g)")
        self._inv = None
        self._gram = {}

    @classmethod
    def identity(cls) -> "MetricTensor":
        return cls(np.eye(DIM))

    @property
    def inverse(self) -> np.ndarray:
        if self._inv is None:
            self._inv = np.linalg.inv(self.g)
        return self._inv

    def __repr__(self):
        return f"MetricTensor(vol={self.vol:.6g})"


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------

def wedge(a: AltForm, b: AltForm) -> AltForm:
    """Exterior product with the shuffle (determinant) normalization."""
    k = a.degree + b.degree
    if k > DIM:
        raise ValueError("wedge degree exceeds 7")
    out = AltForm(k)
    for kp, ap, bp, s in _wedge_table(a.degree, b.degree):
        out.comps[kp] += s * a.comps[ap] * b.comps[bp]
    return out


def interior(x, a: AltForm) -> AltForm:
    """Interior product (X , a); x is a 7-vector in the reference basis."""
    if a.degree == 0:
        raise ValueError("interior product needs degree >= 1")
    x = np.asarray(x, dtype=float)
    idx, sgn = _interior_table(a.degree)
    vals = np.where(idx >= 0, a.comps[idx], 0.0) * sgn
    out = AltForm(a.degree - 1)
    out.comps = x @ vals
    return out


def _gram(metric: MetricTensor | None, k: int) -> np.ndarray | None:
    """Gram matrix of increasing basis k-forms, or None for the identity.

    Cached per metric instance; the canonical basis is orthonormal for the
    identity metric, so that case short-circuits.
    """
    if metric is None or k == 0:
        return None
    if k in metric._gram:
        return metric._gram[k]
    if np.array_equal(metric.g, np.eye(DIM)):
        metric._gram[k] = None
        return None
    ginv = metric.inverse
    tuples = _tuples(k)
    m = len(tuples)
    idx = np.array(tuples)
    blocks = ginv[idx[:, None, :, None], idx[None, :, None, :]]
    W = np.linalg.det(blocks)
    metric._gram[k] = W
    return W


def inner(a: AltForm, b: AltForm, metric: MetricTensor | None = None) -> float:
    """Pointwise inner product of two k-forms."""
    if a.degree != b.degree:
        raise ValueError("inner product needs equal degrees")
    W = _gram(metric, a.degree)
    if W is None:
        return float(a.comps @ b.comps)
    return float(a.comps @ W @ b.comps)


def hodge_star(a: AltForm, metric: MetricTensor | None = None) -> AltForm:
    """Hodge star for the given metric; dx^1..dx^7 positively oriented."""
    k = a.degree
    cpos, csgn = _complement_table(k)
    if metric is None:
        raised = a.comps
        vol = 1.0
    else:
        W = _gram(metric, k)
        raised = W @ a.comps if W is not None else a.comps
        vol = metric.vol
    out = AltForm(DIM - k)
    out.comps[cpos] = csgn * vol * raised
    return out


def pullback(a: AltForm, rho) -> AltForm:
    """Pullback by a linear map: (rho* a)(v1..vk) = a(rho v1, .., rho vk)."""
    rho = np.asarray(rho, dtype=float)
    k = a.degree
    if k == 0:
        return a.copy()
    out = AltForm(k)
    posk = _pos(k)
    for j, J in enumerate(_tuples(k)):
        # minor expansion: sum over increasing I of a_I det(rho[I, J])
        total = 0.0
        for i, I in enumerate(_tuples(k)):
            if a.comps[i] == 0.0:
                continue
            total += a.comps[i] * np.linalg.det(rho[np.ix_(I, J)])
        out.comps[posk[J]] = total
    return out


# ---------------------------------------------------------------------------
# fundamental forms
# ---------------------------------------------------------------------------

def phi0() -> AltForm:
    """The fundamental positive 3-form."""
    f = AltForm(3)
    for idx, s in FORM3_TRIPLES:
        f[idx] = s
    return f


def psi0() -> AltForm:
    """The fundamental 4-form, star(phi0) for the identity metric."""
    return hodge_star(phi0())


def volume_form(metric: MetricTensor | None = None) -> AltForm:
    f = AltForm(DIM)
    f.comps[0] = 1.0 if metric is None else metric.vol
    return f


# ---------------------------------------------------------------------------
# metric extraction and the irreducible projections
# ---------------------------------------------------------------------------

def metric_from_3form(phi: AltForm) -> MetricTensor:
    """Recover the metric and volume of a positive 3-form.

    Uses S(u,v) = (1/6) (u,phi) ^ (v,phi) ^ phi = B_uv dx^{1..7} and the
    recovery vol = det(B)^{1/9}, g = B/vol (det B = det(g) vol^7 = vol^9).
    Raises ValueError if the form is not positive.
    """
    if phi.degree != 3:
        raise ValueError("metric extraction needs a 3-form")
    eye = np.eye(DIM)
    iphi = [interior(eye[u], phi) for u in range(DIM)]
    B = np.empty((DIM, DIM))
    for u in range(DIM):
        for v in range(u, DIM):
            s = wedge(wedge(iphi[u], iphi[v]), phi)
            B[u, v] = B[v, u] = s.comps[0] / 6.0
    detB = float(np.linalg.det(B))
    if detB <= 0:
        raise ValueError("not a G2 structure")
    vol = detB ** (1.0 / 9.0)
    g = B / vol
    if np.linalg.eigvalsh((g + g.T) / 2)[0] <= 0:
        raise ValueError("not a G2 structure")
    return MetricTensor(g, vol)


def _resolve_metric(phi: AltForm, metric: MetricTensor | None) -> MetricTensor:
    return metric if metric is not None else metric_from_3form(phi)


def project2(beta: AltForm, phi: AltForm,
             metric: MetricTensor | None = None):
    """Split a 2-form into its 7- and 14-dimensional irreducible parts.

    Implemented through the eigenvalue characterization of the operator
    L(beta) = star(phi ^ beta): the 7-part is the eigenvalue-(+2) piece,
    the 14-part the eigenvalue-(-1) piece.
    """
    if beta.degree != 2:
        raise ValueError("project2 needs a 2-form")
    metric = _resolve_metric(phi, metric)
    L = hodge_star(wedge(phi, beta), metric)
    a, b = OMEGA2_7_EIGENVALUE, OMEGA2_14_EIGENVALUE
    b7 = (L - b * beta) / (a - b)
    return b7, beta - b7


def _vector_from_27(beta: AltForm, phi: AltForm, metric: MetricTensor) -> np.ndarray:
    """X with beta = X , phi for beta in the 7-dim module (index formula)."""
    bd = beta.to_dense()
    pd = phi.to_dense()
    gi = metric.inverse
    x_low = np.einsum("jk,mbc,jb,kc->m", bd, pd, gi, gi) / 6.0
    return gi @ x_low


def project3(gamma: AltForm, phi: AltForm,
             metric: MetricTensor | None = None):
    """Split a 3-form into its 1-, 7- and 27-dimensional parts."""
    if gamma.degree != 3:
        raise ValueError("project3 needs a 3-form")
    metric = _resolve_metric(phi, metric)
    psi = hodge_star(phi, metric)
    # 1-part: |phi|^2 = 7 for every positive form with its own metric
    g1 = (inner(gamma, phi, metric) / 7.0) * phi
    # 7-part via the psi-contraction (psi.psi = 24 g): X_m = gamma.psi / 24
    gd = gamma.to_dense()
    pd = psi.to_dense()
    gi = metric.inverse
    x_low = np.einsum("jkl,mabc,ja,kb,lc->m", gd, pd, gi, gi, gi) / 24.0
    g7 = interior(gi @ x_low, psi)
    return g1, g7, gamma - g1 - g7


def sym2_to_3form(h, phi: AltForm, metric: MetricTensor | None = None) -> AltForm:
    """Map a symmetric 2-tensor into 3-forms:  h_{ij} g^{jl} dx^i ^ (e_l , phi).

    The identity tensor maps to 3*phi; traceless tensors land in the
    27-dimensional module.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (DIM, DIM) or not np.allclose(h, h.T, atol=1e-9):
        raise ValueError("sym2_to_3form needs a symmetric 7x7 tensor")
    metric = _resolve_metric(phi, metric)
    hmix = h @ metric.inverse  # h_i^l
    eye = np.eye(DIM)
    out = AltForm(3)
    for i in range(DIM):
        dxi = AltForm(1)
        dxi.comps[i] = 1.0
        row = np.zeros(_ncomps(2))
        for l in range(DIM):
            if hmix[i, l] != 0.0:
                row += hmix[i, l] * interior(eye[l], phi).comps
        two = AltForm(2)
        two.comps = row
        out = out + wedge(dxi, two)
    return out


def sym2_from_3form(gamma: AltForm, phi: AltForm,
                    metric: MetricTensor | None = None) -> np.ndarray:
    """Least-squares inverse of sym2_to_3form (exact on its image)."""
    if gamma.degree != 3:
        raise ValueError("sym2_from_3form needs a 3-form")
    metric = _resolve_metric(phi, metric)
    basis = []
    cols = []
    for i in range(DIM):
        for j in range(i, DIM):
            h = np.zeros((DIM, DIM))
            h[i, j] = h[j, i] = 1.0
            basis.append(h)
            cols.append(sym2_to_3form(h, phi, metric).comps)
    M = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(M, gamma.comps, rcond=None)
    out = np.zeros((DIM, DIM))
    for c, h in zip(coef, basis):
        out += c * h
    return out


def decompose_high(a: AltForm, phi: AltForm,
                   metric: MetricTensor | None = None):
    """Irreducible parts of a 4- or 5-form, via the star of the low split."""
    metric = _resolve_metric(phi, metric)
    if a.degree == 4:
        parts = project3(hodge_star(a, metric), phi, metric)
        return tuple(hodge_star(p, metric) for p in parts)
    if a.degree == 5:
        parts = project2(hodge_star(a, metric), phi, metric)
        return tuple(hodge_star(p, metric) for p in parts)
    raise ValueError("decompose_high expects degree 4 or 5")


# ---------------------------------------------------------------------------
# form file format
# ---------------------------------------------------------------------------

def dump_form(form: AltForm, path) -> None:
    """Write a form as structured text: degree, dim, sparse components."""
    doc = {
        "degree": form.degree,
        "dim": DIM,
        "components": [
            {"indices": list(idx), "value": val} for idx, val in form.terms()
        ],
    }
    if hasattr(path, "write"):
        json.dump(doc, path, indent=2, sort_keys=True)
    else:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_form(path) -> AltForm:
    """Read a form written by dump_form; unlisted components are zero."""
    if hasattr(path, "read"):
        doc = json.load(path)
    else:
        with open(path) as fh:
            doc = json.load(fh)
    if doc.get("dim", DIM) != DIM:
        raise ValueError("form files must have dim = 7")
    form = AltForm(int(doc["degree"]))
    for entry in doc.get("components", []):
        idx = tuple(int(i) for i in entry["indices"])
        if list(idx) != sorted(idx) or len(set(idx)) != len(idx):
            raise ValueError("component indices must be strictly increasing")
        form[idx] = float(entry["value"])
    return form
