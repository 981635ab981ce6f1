"""
Octonions, the 3- and 7-dimensional cross products and the associative 3-form.

The octonions are realised as pairs of quaternions with the Cayley-Dickson
product ``(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))``.  Component 0 is
the real part; components 1..3 are the quaternion units i, j, k and
components 4..7 are ``(0, 1), (0, i), (0, j), (0, k)``.  With this choice
``e1 e2 = e3``, ``e1 e4 = e5``, ``e2 e4 = e6`` and ``e3 e4 = e7``.

Vectors are plain numpy arrays.  Functions accept a leading batch shape and
work on the last axis, so a loop of N samples in R^7 is an ``(N, 7)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

__all__ = [
    "Octonion",
    "ThreeForm",
    "assoc_form",
    "commutator",
    "conj",
    "cross",
    "dot",
    "embed",
    "imag",
    "multiplication_table",
    "norm2",
    "oct_mul",
    "quat_mul",
    "standard_three_form",
    "trace",
]


# ---------------------------------------------------------------------------
# quaternions and the Cayley-Dickson product


def quat_mul(p, q):
    """Hamilton product of quaternions stored as ``(..., 4)`` arrays."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


_QCONJ = np.array([1.0, -1.0, -1.0, -1.0])


def _cayley_dickson(x, y):
    a, b = x[..., :4], x[..., 4:]
    c, d = y[..., :4], y[..., 4:]
    first = quat_mul(a, c) - quat_mul(d * _QCONJ, b)
    second = quat_mul(d, a) + quat_mul(b, c * _QCONJ)
    return np.concatenate([first, second], axis=-1)


def _structure_constants():
    basis = np.eye(8)
    table = np.zeros((8, 8, 8))
    for i in range(8):
        for j in range(8):
            table[i, j] = _cayley_dickson(basis[i], basis[j])
    return table


# _MUL[i, j, k]: coefficient of e_k in e_i e_j.  Every entry is 0 or +-1.
_MUL = _structure_constants()
_MUL.setflags(write=False)


def oct_mul(a, b):
    """Octonion product of ``(..., 8)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.einsum("...i,...j,ijk->...k", a, b, _MUL)


def conj(a):
    a = np.array(a, dtype=float)
    a[..., 1:] *= -1.0
    return a


def trace(a):
    """Real part ``(a + conj(a)) / 2`` read off as a scalar."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + conj(a))[..., 0]


def dot(a, b):
    """Euclidean inner product on components; equals ``trace(a conj(b))``."""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def norm2(a):
    return dot(a, a)


def embed(v):
    """Imaginary 7-vector(s) as octonions with zero real part."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 7:
        raise ValueError(f"expected 7 components, got {v.shape[-1]}")
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def imag(a):
    return np.asarray(a, dtype=float)[..., 1:]


def commutator(a, b):
    """Raw commutator ``ab - ba`` of octonions."""
    return oct_mul(a, b) - oct_mul(b, a)


def multiplication_table():
    """Signed basis table: ``e_i e_j = sign[i][j] * e_{index[i][j]}``.

    Returned as plain nested lists of ints, ready for JSON.
    """
    index = np.argmax(np.abs(_MUL), axis=-1)
    sign = np.take_along_axis(_MUL, index[..., None], axis=-1)[..., 0]
    return {
        "basis": ["1"] + [f"e{i}" for i in range(1, 8)],
        "index": index.astype(int).tolist(),
        "sign": sign.astype(int).tolist(),
    }


# ---------------------------------------------------------------------------
# cross products


def _cross7_tensor():
    basis = np.eye(7)
    tensor = np.zeros((7, 7, 7))
    for i in range(7):
        for j in range(7):
            half = 0.5 * commutator(embed(basis[i]), embed(basis[j]))
            tensor[i, j] = imag(half)
    return tensor


# _CROSS7[i, j, k]: coefficient of e_{k+1} in cross(e_{i+1}, e_{j+1}).
_CROSS7 = _cross7_tensor()
_CROSS7.setflags(write=False)
_CROSS7_FLAT = _CROSS7.reshape(49, 7)


def cross(u, v):
    """Vector product on R^3 or R^7 (chosen by the length of the last axis).

    In 7-D this is the normalised commutator ``(uv - vu) / 2`` of imaginary
    octonions, which makes ``u x (u x v) = -|u|^2 v + (u.v) u`` hold with the
    Euclidean metric.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError("cross: dimension mismatch")
    if u.shape[-1] == 3:
        return np.cross(u, v)
    if u.shape[-1] != 7:
        raise ValueError(f"cross is defined in dimension 3 or 7, not {u.shape[-1]}")
    u, v = np.broadcast_arrays(u, v)
    outer = u[..., :, None] * v[..., None, :]
    return outer.reshape(u.shape[:-1] + (49,)) @ _CROSS7_FLAT


def assoc_form(u, v, w):
    """``dot(cross(u, v), w)``; the volume form in 3-D."""
    return dot(cross(u, v), w)


# ---------------------------------------------------------------------------
# alternating 3-forms


def _parity(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class ThreeForm:
    """Alternating trilinear form with constant coefficients on R^dim.

    ``tensor`` is the full antisymmetric ``(dim, dim, dim)`` array.  Build one
    from independent coefficients with :meth:`from_coefficients`.
    """

    tensor: np.ndarray

    def __post_init__(self):
        t = np.array(self.tensor, dtype=float)
        if t.ndim != 3 or len(set(t.shape)) != 1:
            raise ValueError("a 3-form tensor must be (dim, dim, dim)")
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    @classmethod
    def from_coefficients(cls, dim, coefficients):
        """``coefficients`` maps 0-based ``(i, j, k)`` with ``i < j < k`` to values."""
        t = np.zeros((dim, dim, dim))
        for (i, j, k), value in coefficients.items():
            if not i < j < k:
                raise ValueError(f"indices must be increasing, got {(i, j, k)}")
            for perm in permutations(range(3)):
                idx = tuple((i, j, k)[p] for p in perm)
                t[idx] = _parity(perm) * value
        return cls(t)

    def coefficients(self):
        return {
            (i, j, k): float(self.tensor[i, j, k])
            for i, j, k in combinations(range(self.dim), 3)
            if self.tensor[i, j, k] != 0.0
        }

    def __call__(self, u, v, w):
        return np.einsum("ijk,...i,...j,...k->...", self.tensor, u, v, w)

    def contract(self, u):
        """The 2-form ``lambda(u, ., .)`` as a ``(..., dim, dim)`` matrix."""
        return np.einsum("ijk,...i->...jk", self.tensor, u)

    def pullback(self, a):
        """``(A* lambda)(u, v, w) = lambda(Au, Av, Aw)``."""
        a = np.asarray(a, dtype=float)
        return ThreeForm(np.einsum("abc,ai,bj,ck->ijk", self.tensor, a, a, a))

    def scaled(self, factor):
        return ThreeForm(factor * self.tensor)

    def is_alternating(self, tol=0.0):
        t = self.tensor
        return all(
            np.max(np.abs(t - _parity(p) * np.transpose(t, p))) <= tol
            for p in permutations(range(3))
        )


def standard_three_form(dim=7):
    """The form ``(cross(a, b), c)``: the associative form in 7-D, det in 3-D."""
    if dim == 7:
        return ThreeForm(_CROSS7.copy())
    if dim == 3:
        return ThreeForm.from_coefficients(3, {(0, 1, 2): 1.0})
    raise ValueError(f"no standard 3-form in dimension {dim}")


# ---------------------------------------------------------------------------
# value type


class Octonion:
    """Immutable octonion ``c0 + c1 e1 + ... + c7 e7``."""

    __slots__ = ("_c",)

    def __init__(self, *components):
        if len(components) == 1:
            components = components[0]
        c = np.array(components, dtype=float).reshape(-1)
        if c.shape != (8,):
            raise ValueError("an octonion has 8 components")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def unit(cls, i):
        return cls(np.eye(8)[i])

    @property
    def components(self):
        return self._c

    @property
    def real(self):
        return float(self._c[0])

    @property
    def imag(self):
        return self._c[1:].copy()

    def __array__(self, dtype=None, copy=None):
        return np.array(self._c, dtype=dtype)

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return Octonion(oct_mul(self._c, other._c))
        return Octonion(self._c * float(other))

    def __rmul__(self, scalar):
        return Octonion(self._c * float(scalar))

    def __add__(self, other):
        return Octonion(self._c + other._c)

    def __sub__(self, other):
        return Octonion(self._c - other._c)

    def __neg__(self):
        return Octonion(-self._c)

    def __eq__(self, other):
        return isinstance(other, Octonion) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return "Octonion(%s)" % ", ".join(f"{x:g}" for x in self._c)

    def conj(self):
        return Octonion(conj(self._c))

    def trace(self):
        return float(trace(self._c))

    def norm2(self):
        return float(norm2(self._c))

    def dot(self, other):
        return float(dot(self._c, other._c))

    def isclose(self, other, atol=1e-12):
        return bool(np.allclose(self._c, np.asarray(other, dtype=float), rtol=0.0, atol=atol))
