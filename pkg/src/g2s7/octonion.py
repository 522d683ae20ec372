"""Octonion arithmetic and the 2- and 3-fold vector cross products.

Everything downstream is generated by a single integer table: the seven
signed index triples of the fundamental 3-form on R^7.  The imaginary unit
products are *derived* from that table via

    e_i e_j = -delta_ij + sum_k  c_{ijk} e_k,

so the cross product and the 3-form agree by construction, and the algebra
axioms (alternativity, norm multiplicativity) are verified by the tests
rather than assumed from an external convention.

Index conventions: octonion components are 8-vectors with slot 0 the real
part and slots 1..7 the imaginary units e_1..e_7.  Plain 7-vectors are
identified with imaginary octonions.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = [
    "FORM3_TRIPLES",
    "PHI7",
    "MULT_TABLE",
    "Octonion",
    "oct_mul",
    "oct_conj",
    "cross2",
    "cross3",
    "embed_imaginary",
    "imaginary_part",
    "unit",
]

# Signed triples of the fundamental 3-form, 1-based indices, strictly
# increasing: e123 - e145 - e167 - e246 + e257 - e347 - e356.
FORM3_TRIPLES = (
    ((1, 2, 3), 1),
    ((1, 4, 5), -1),
    ((1, 6, 7), -1),
    ((2, 4, 6), -1),
    ((2, 5, 7), 1),
    ((3, 4, 7), -1),
    ((3, 5, 6), -1),
)


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def _build_phi7() -> np.ndarray:
    phi = np.zeros((7, 7, 7), dtype=np.int64)
    for (a, b, c), s in FORM3_TRIPLES:
        base = (a - 1, b - 1, c - 1)
        for perm in itertools.permutations(range(3)):
            phi[tuple(base[i] for i in perm)] = s * _perm_sign(perm)
    return phi


def _build_mult_table(phi: np.ndarray) -> np.ndarray:
    table = np.zeros((8, 8, 8), dtype=np.int64)
    table[0, 0, 0] = 1
    for i in range(1, 8):
        table[0, i, i] = 1
        table[i, 0, i] = 1
        table[i, i, 0] = -1
    table[1:, 1:, 1:] += phi
    return table


#: Dense antisymmetric structure constants c_{ijk} of the 3-form (0-based).
PHI7 = _build_phi7()
PHI7.setflags(write=False)

#: 8x8x8 multiplication table: (x y)_k = x_i y_j MULT_TABLE[i, j, k].
MULT_TABLE = _build_mult_table(PHI7)
MULT_TABLE.setflags(write=False)

_MT_FLOAT = MULT_TABLE.astype(float)
_PHI_FLOAT = PHI7.astype(float)


def oct_mul(a, b) -> np.ndarray:
    """Octonion product of 8-vectors; broadcasts over leading axes."""
    return np.einsum("...i,...j,ijk->...k", a, b, _MT_FLOAT)


def oct_conj(a) -> np.ndarray:
    """Octonion conjugate: negate the imaginary part."""
    out = -np.asarray(a, dtype=float).copy()
    out[..., 0] = np.asarray(a)[..., 0]
    return out


def cross2(u, v) -> np.ndarray:
    """2-fold cross product on R^7: the imaginary part of the product
    of the corresponding imaginary octonions."""
    return np.einsum("...i,...j,ijk->...k", u, v, _PHI_FLOAT)


def cross3(u, v, w) -> np.ndarray:
    """3-fold cross product on R^8:  (u (v~ w) - w (v~ u)) / 2."""
    vb = oct_conj(v)
    return 0.5 * (oct_mul(u, oct_mul(vb, w)) - oct_mul(w, oct_mul(vb, u)))


def embed_imaginary(v7) -> np.ndarray:
    """Embed a 7-vector as an imaginary octonion."""
    v7 = np.asarray(v7, dtype=float)
    out = np.zeros(v7.shape[:-1] + (8,))
    out[..., 1:] = v7
    return out


def imaginary_part(v8) -> np.ndarray:
    return np.asarray(v8, dtype=float)[..., 1:].copy()


def unit(i: int) -> np.ndarray:
    """Basis octonion: unit(0) is the real unit, unit(1..7) = e_1..e_7."""
    out = np.zeros(8)
    out[i] = 1.0
    return out


class Octonion:
    """Thin wrapper over an 8-component array with algebra operators."""

    __slots__ = ("components",)

    def __init__(self, components):
        arr = np.asarray(components, dtype=float)
        if arr.shape != (8,):
            raise ValueError("octonion needs exactly 8 components")
        self.components = arr.copy()

    @classmethod
    def basis(cls, i: int) -> "Octonion":
        return cls(unit(i))

    @classmethod
    def from_imaginary(cls, v7) -> "Octonion":
        return cls(embed_imaginary(v7))

    @property
    def real(self) -> float:
        return float(self.components[0])

    @property
    def imag(self) -> np.ndarray:
        return self.components[1:].copy()

    def conjugate(self) -> "Octonion":
        return Octonion(oct_conj(self.components))

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __add__(self, other):
        return Octonion(self.components + other.components)

    def __sub__(self, other):
        return Octonion(self.components - other.components)

    def __neg__(self):
        return Octonion(-self.components)

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return Octonion(oct_mul(self.components, other.components))
        return Octonion(self.components * float(other))

    def __rmul__(self, other):
        return Octonion(self.components * float(other))

    def __eq__(self, other):
        return isinstance(other, Octonion) and np.array_equal(
            self.components, other.components
        )

    def __repr__(self):
        names = ["1"] + [f"e{i}" for i in range(1, 8)]
        parts = [
            f"{c:+g}*{n}" for c, n in zip(self.components, names) if c != 0.0
        ]
        return "Octonion(" + (" ".join(parts) if parts else "0") + ")"
