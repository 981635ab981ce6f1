"""
Geometry recovered from a 3-form: metric, vector product, G2 membership,
isotropic 4-planes and the adapted octonion bases used to move between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np
from scipy.stats import qmc, norm as _normal

from . import cayley
from .cayley import ThreeForm
from .errors import BadTriple, DegenerateForm, SingularMetric

__all__ = [
    "IsotropicPlane",
    "NondegeneracyReport",
    "adapted_basis",
    "automorphism_from_triples",
    "cross_from_form",
    "form_bilinear",
    "is_g2_element",
    "is_isotropic",
    "isotropic_plane",
    "maximality_probe",
    "metric_from_form",
    "nondegeneracy_check",
    "rank",
    "sphere_sample",
    "structure_constants",
]

RANK_RTOL = 1e-8
TRIPLE_TOL = 1e-10


def rank(m, rtol=RANK_RTOL):
    """Numerical rank: singular values above ``rtol`` times the largest."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def sphere_sample(n, dim, seed=0):
    """Deterministic quasi-uniform points on the unit sphere in R^dim.

    Scrambled Sobol points pushed through the normal quantile, then normalised.
    """
    sobol = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = sobol.random(n)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    x = _normal.ppf(u)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# metric and bracket reconstruction


@lru_cache(maxsize=None)
def _levi_civita(dim):
    eps = np.zeros((dim,) * dim)
    for perm in permutations(range(dim)):
        eps[perm] = cayley._parity(perm)
    eps.setflags(write=False)
    return eps


def form_bilinear(lam: ThreeForm):
    """Coefficient of ``lam(m,.,.) ^ lam(n,.,.) ^ lam`` on ``e^1 ^ ... ^ e^7``.

    Returned as a symmetric 7x7 matrix over basis pairs ``(m, n)``.
    """
    if lam.dim != 7:
        raise ValueError("the wedge construction needs a 3-form on R^7")
    t = lam.tensor
    eps = _levi_civita(7)
    # a wedge b wedge c on 2+2+3 slots: full contraction with eps / (2! 2! 3!)
    tail = np.tensordot(eps, t, axes=([4, 5, 6], [0, 1, 2]))  # (a, b, c, d)
    inner = np.einsum("mab,abcd->mcd", t, tail)
    return np.einsum("mcd,ncd->mn", inner, t) / 24.0


def cross_from_form(lam: ThreeForm, g):
    """Bracket defined by ``g(bracket(a, b), c) = lam(a, b, c)``.

    Returns a function of two ``(..., dim)`` arrays.
    """
    g = np.asarray(g, dtype=float)
    if np.linalg.cond(g) > 1e12:
        raise SingularMetric("metric is not invertible")
    ginv = np.linalg.inv(g)
    # raised[i, j, k] = lam_{ij l} g^{l k}
    raised = np.einsum("ijl,lk->ijk", lam.tensor, ginv)

    def bracket(a, b):
        return np.einsum("ijk,...i,...j->...k", raised, a, b)

    return bracket


def _double_cross_ratio(lam, g, m, n):
    """Scalar r with bracket(m, bracket(m, n)) = r * (-(m,m) n + (m,n) m)."""
    br = cross_from_form(lam, g)
    lhs = br(m, br(m, n))
    rhs = -(m @ g @ m) * n + (m @ g @ n) * m
    return float(lhs @ rhs / (rhs @ rhs)), lhs, rhs


def metric_from_form(lam: ThreeForm, verify_pairs=50, tol=1e-8, seed=0):
    """Metric whose vector product, rebuilt from ``lam``, obeys the double-cross identity.

    In 3-D the form is a multiple ``c`` of the volume form and the answer is
    ``c^(2/3)`` times the identity.
    """
    if lam.dim == 3:
        c = lam.tensor[0, 1, 2]
        if abs(c) < 1e-300:
            raise DegenerateForm("zero 3-form")
        b = np.eye(3) * abs(c) ** (2.0 / 3.0)
        _verify_double_cross(lam, b, verify_pairs, tol, seed)
        return b
    b = form_bilinear(lam)
    b = 0.5 * (b + b.T)
    w = np.linalg.eigvalsh(b)
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0 or np.min(np.abs(w)) <= 1e-10 * scale:
        raise DegenerateForm("conformal representative is degenerate")
    if np.all(w < 0):
        # opposite orientation of the reference volume
        b = -b
    elif not np.all(w > 0):
        raise DegenerateForm("conformal representative is indefinite")
    e = np.eye(7)
    r, _, _ = _double_cross_ratio(lam, b, e[0], e[1])
    # with g = t B the double-cross ratio scales as t^-3
    if not np.isfinite(r) or r <= 0:
        raise DegenerateForm("no positive rescaling satisfies the double-cross identity")
    g = b * r ** (1.0 / 3.0)
    _verify_double_cross(lam, g, verify_pairs, tol, seed)
    return g


def _verify_double_cross(lam, g, pairs, tol, seed):
    rng = np.random.default_rng(seed)
    br = cross_from_form(lam, g)
    dim = lam.dim
    for _ in range(pairs):
        m, n = rng.standard_normal((2, dim))
        lhs = br(m, br(m, n))
        rhs = -(m @ g @ m) * n + (m @ g @ n) * m
        if np.linalg.norm(lhs - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
            raise DegenerateForm("double-cross identity fails for the rescaled metric")


# ---------------------------------------------------------------------------
# nondegeneracy and automorphisms


@dataclass(frozen=True)
class NondegeneracyReport:
    ok: bool
    worst_kernel_dim: int
    samples: int
    failures: int


def nondegeneracy_check(lam: ThreeForm, samples=2048, seed=0):
    """Check that ``lam(l, ., .)`` has kernel exactly ``span{l}`` for sampled unit ``l``."""
    dim = lam.dim
    dirs = sphere_sample(samples, dim, seed=seed)
    mats = lam.contract(dirs)
    s = np.linalg.svd(mats, compute_uv=False)
    top = s[:, :1]
    ranks = np.sum(s > RANK_RTOL * np.where(top > 0, top, np.inf), axis=1)
    kernel = dim - ranks
    failures = int(np.sum(ranks != dim - 1))
    return NondegeneracyReport(
        ok=failures == 0,
        worst_kernel_dim=int(kernel.max()),
        samples=samples,
        failures=failures,
    )


def is_g2_element(a, lam: ThreeForm | None = None, tol=1e-10):
    """True iff ``A`` preserves ``lam`` on every basis triple."""
    lam = cayley.standard_three_form(7) if lam is None else lam
    moved = lam.pullback(a).tensor
    return bool(np.max(np.abs(moved - lam.tensor)) < tol)


# ---------------------------------------------------------------------------
# adapted bases and isotropic planes


def _check_triple(i, j, l, tol=TRIPLE_TOL):
    vecs = [np.asarray(x, dtype=float).reshape(-1) for x in (i, j, l)]
    if any(v.shape != (7,) for v in vecs):
        raise BadTriple("triple vectors must be imaginary 7-vectors")
    norms = [np.linalg.norm(v) for v in vecs]
    if min(norms) <= tol:
        raise BadTriple("triple contains a zero vector")
    i, j, l = (v / n for v, n in zip(vecs, norms))
    k = cayley.cross(i, j)
    for name, val in (("i.j", i @ j), ("i.l", i @ l), ("j.l", j @ l), ("k.l", k @ l)):
        if abs(val) > tol:
            raise BadTriple(f"triple is not admissible: {name} = {val:.3g}")
    return i, j, l


def adapted_basis(i, j, l):
    """Ordered orthonormal basis ``1, i, j, k, l, il, jl, kl`` (8x8, rows are octonions)."""
    i, j, l = _check_triple(i, j, l)
    k = cayley.cross(i, j)
    imag = np.array([i, j, k, l, cayley.cross(i, l), cayley.cross(j, l), cayley.cross(k, l)])
    imag /= np.linalg.norm(imag, axis=1, keepdims=True)
    basis = np.zeros((8, 8))
    basis[0, 0] = 1.0
    basis[1:, 1:] = imag
    return basis


def structure_constants(basis):
    """``C[a, b, c]``: coefficient of ``basis[c]`` in ``basis[a] basis[b]``."""
    basis = np.asarray(basis, dtype=float)
    prods = cayley.oct_mul(basis[:, None, :], basis[None, :, :])
    return np.einsum("abk,ck->abc", prods, basis)


@dataclass(frozen=True, eq=False)
class IsotropicPlane:
    """Four orthonormal vectors (rows of ``basis``) spanning an isotropic 4-plane."""

    basis: np.ndarray

    def projector(self):
        return self.basis.T @ self.basis

    def complement(self):
        """Orthonormal basis (rows) of the orthogonal complement."""
        _, _, vh = np.linalg.svd(self.basis)
        return vh[4:]

    def contains(self, v, tol=1e-10):
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(v - self.projector() @ v) <= tol * max(1.0, np.linalg.norm(v)))

    def to_json(self):
        return {"basis": self.basis.tolist()}


def is_isotropic(vectors, lam: ThreeForm | None = None, tol=1e-10):
    """True iff ``lam`` vanishes on every triple drawn from ``vectors``."""
    lam = cayley.standard_three_form(7) if lam is None else lam
    vectors = np.asarray(vectors, dtype=float)
    return all(
        abs(lam(vectors[a], vectors[b], vectors[c])) < tol
        for a, b, c in combinations(range(len(vectors)), 3)
    )


def maximality_probe(plane: IsotropicPlane, directions=64, seed=0, tol=1e-10):
    """Smallest ``max |lam|`` over triples of ``L + w``, across sampled unit ``w`` in L-perp.

    The plane is maximal when this stays above ``tol`` for every probe.
    """
    lam = cayley.standard_three_form(7)
    perp = plane.complement()
    ws = sphere_sample(directions, 3, seed=seed) @ perp
    worst = math.inf
    for w in ws:
        pair_values = [abs(lam(plane.basis[a], plane.basis[b], w)) for a, b in combinations(range(4), 2)]
        worst = min(worst, max(pair_values))
    return worst


def isotropic_plane(i, j, l):
    """The maximal isotropic plane ``span{i, j, l, cross(cross(i, j), l)}``."""
    i, j, l = _check_triple(i, j, l)
    kl = cayley.cross(cayley.cross(i, j), l)
    q, _ = np.linalg.qr(np.array([i, j, l, kl]).T)
    # QR may flip signs; keep the orientation of the input vectors
    signs = np.sign(np.diag(q.T @ np.array([i, j, l, kl]).T))
    return IsotropicPlane((q * signs).T)


def automorphism_from_triples(t1, t2):
    """Linear map of Im O carrying ``adapted_basis(*t1)`` onto ``adapted_basis(*t2)``."""
    b1 = adapted_basis(*t1)[1:, 1:]
    b2 = adapted_basis(*t2)[1:, 1:]
    return b2.T @ b1
