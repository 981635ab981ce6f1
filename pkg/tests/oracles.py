"""Reference computations that share no code with the package.

They are slow and simple on purpose: plain Python recursion, explicit
permutation sums and dense sampling.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np


# ---------------------------------------------------------------------------
# Cayley-Dickson doubling from the reals


def _cd_conj(x):
    if len(x) == 1:
        return list(x)
    h = len(x) // 2
    return _cd_conj(x[:h]) + [-v for v in x[h:]]


def _add(x, y):
    return [a + b for a, b in zip(x, y)]


def _sub(x, y):
    return [a - b for a, b in zip(x, y)]


def cd_mul(x, y):
    """Product of two 2^k-component lists via ``(a, b)(c, d) = (ac - conj(d) b, da + b conj(c))``."""
    if len(x) == 1:
        return [x[0] * y[0]]
    h = len(x) // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    return _sub(cd_mul(a, c), cd_mul(_cd_conj(d), b)) + _add(cd_mul(d, a), cd_mul(b, _cd_conj(c)))


def basis_table():
    """``(index, sign)`` with ``e_i e_j = sign * e_index`` from the recursive product."""
    index = [[0] * 8 for _ in range(8)]
    sign = [[0] * 8 for _ in range(8)]
    for i in range(8):
        for j in range(8):
            ei = [0.0] * 8
            ej = [0.0] * 8
            ei[i] = 1.0
            ej[j] = 1.0
            prod = cd_mul(ei, ej)
            k = max(range(8), key=lambda m: abs(prod[m]))
            index[i][j] = k
            sign[i][j] = int(round(prod[k]))
    return index, sign


def cross7(u, v):
    """Half commutator of imaginary octonions, via the recursive product."""
    a = [0.0] + list(map(float, u))
    b = [0.0] + list(map(float, v))
    ab, ba = cd_mul(a, b), cd_mul(b, a)
    return np.array([(p - q) / 2 for p, q in zip(ab[1:], ba[1:])])


def three_form_tensor():
    """``lambda_ijk = (cross(e_i, e_j), e_k)`` tabulated through :func:`cross7`."""
    t = np.zeros((7, 7, 7))
    eye = np.eye(7)
    for i in range(7):
        for j in range(7):
            t[i, j] = cross7(eye[i], eye[j])
    return t


# ---------------------------------------------------------------------------
# exterior algebra by permutation sums


def _parity(p):
    p = list(p)
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


_PERMS7 = [(p, _parity(p)) for p in permutations(range(7))]


def wedge_bilinear(t):
    """``(lam(e_m) ^ lam(e_n) ^ lam)(e_1, ..., e_7)`` for every pair, by the shuffle formula.

    For a 2-form a, 2-form b and 3-form c the value on e_1..e_7 is the
    signed sum over all permutations divided by 2! 2! 3!.
    """
    out = np.zeros((7, 7))
    for m in range(7):
        for n in range(7):
            total = 0.0
            a, b = t[m], t[n]
            for p, s in _PERMS7:
                total += s * a[p[0], p[1]] * b[p[2], p[3]] * t[p[4], p[5], p[6]]
            out[m, n] = total / 24.0
    return out


# ---------------------------------------------------------------------------
# windings


def det2_winding(unitary_of_t, samples=4096):
    """Winding of ``det(U(t))^2`` over ``t in [0, 1]`` by dense phase unwrapping."""
    ts = np.linspace(0.0, 1.0, samples + 1)
    phases = np.array([np.angle(np.linalg.det(unitary_of_t(t)) ** 2) for t in ts])
    total = np.sum(np.angle(np.exp(1j * np.diff(phases))))
    return int(round(total / (2 * math.pi)))


# ---------------------------------------------------------------------------
# closed forms


def circle_after_flow(n, radius, dim, time):
    """Arc-length circle of radius r translated by ``time / r`` along e3."""
    period = 2 * math.pi * radius
    z = period * np.arange(n) / n
    pts = np.zeros((n, dim))
    pts[:, 0] = radius * np.cos(z / radius)
    pts[:, 1] = radius * np.sin(z / radius)
    pts[:, 2] = time / radius
    return pts


def parabola_index_desk(rho, dim=3):
    """Relative index of the rotated-parabola pair from the boundary angles.

    Along the Sigma_1 side the marking is ``diag(e^{i w b})`` with slope angle
    ``b(r) = -atan(2 (r - 1))`` and weights ``w = (1,)`` or ``(1, 1, -2)``;
    the Sigma_2 marking is ``R^n``.  At each curve the connecting path turns
    every angle positively to the next multiple of pi; gamma_2's turn is
    traversed forwards, gamma_1's backwards.
    """
    weights = (1.0,) if dim == 3 else (1.0, 1.0, -2.0)
    r1, r2 = 1 - math.sqrt(rho), 1 + math.sqrt(rho)

    def slope(r):
        return -math.atan(2 * (r - 1))

    total = 0.0
    for w in weights:
        b1, b2 = w * slope(r1), w * slope(r2)
        total += b2 - b1  # along Sigma_1 from gamma_1 to gamma_2
        turn2 = (0.0 - b2) % math.pi
        turn1 = (0.0 - b1) % math.pi
        total += turn2 - turn1
    return total / math.pi
