"""
Maslov index of loops of Lagrangian planes and the relative index of two
intersection curves of a pair of isotropic submanifolds.

Lagrangian planes in C^n are carried by unitary frames ``U`` (the plane is
``U R^n``) and the Maslov class is the winding number of ``det(U)^2``.

Homotopy data live on a grid ``(tau, t, z)`` of shape ``(A+1, B+1, C)``:

* ``tau`` runs along the connecting arcs, from the curve gamma_1 (``tau = 0``)
  to gamma_2 (``tau = 1``); these two faces do not depend on ``t``;
* ``t`` runs across, from the face lying in Sigma_1 (``t = 0``) to the face
  lying in Sigma_2 (``t = 1``);
* ``z`` is the periodic loop parameter.

Each node carries a point of M, the loop tangent there and a unitary frame
of the fibre of I (the orthogonal complement of the tangent, with complex
structure ``J = cross(unit tangent, .)``).  The ``t = 0`` face carries an
orthonormal basis of the Lagrangian marking of Sigma_1 and the ``t = 1``
face one of Sigma_2.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import schur

from . import cayley
from .errors import BadCycle, NonTrivializable, NoIntersection, NyquistViolation, OddSTwist

__all__ = [
    "GaugedHomotopy",
    "HomotopyData",
    "InvariantT",
    "LagrangianLoop",
    "ParabolaExample",
    "RelativeIndex",
    "boundary_loop",
    "constant_homotopy",
    "invariant_T",
    "lagrangian_angles",
    "maslov_index",
    "normalize_S",
    "parabola_example",
    "random_gauge",
    "relative_index",
    "retwist",
    "swap_curves",
    "swap_surfaces",
    "trivialize",
    "unitary_fiber_frame",
]

NYQUIST_ANGLE = math.pi / 4
ALIGN_TOL = 0.5
DEFAULT_GRID = (16, 16, 64)
RHO_MAX = 0.5


# ---------------------------------------------------------------------------
# Lagrangian loops


def lagrangian_angles(u1, u2):
    """Angles ``theta_j`` in ``(-pi/2, pi/2]`` with ``U2 R^n = U1 diag(e^{i theta}) O R^n``.

    They are half the arguments of the eigenvalues of ``W W^T``, ``W = U1^H U2``.
    Works on stacks of matrices.
    """
    w = np.swapaxes(np.conj(u1), -1, -2) @ u2
    eig = np.linalg.eigvals(w @ np.swapaxes(w, -1, -2))
    return 0.5 * np.angle(eig)


@dataclass(frozen=True, eq=False)
class LagrangianLoop:
    """Closed path of Lagrangian planes; ``frames`` is an ``(M, n, n)`` stack of unitaries."""

    frames: np.ndarray

    def __post_init__(self):
        f = np.array(self.frames, dtype=complex)
        if f.ndim != 3 or f.shape[1] != f.shape[2]:
            raise ValueError("frames must be an (M, n, n) array")
        if f.shape[0] < 8:
            raise ValueError(f"a Lagrangian loop needs at least 8 samples, got {f.shape[0]}")
        eye = np.eye(f.shape[1])
        dev = np.abs(np.swapaxes(np.conj(f), 1, 2) @ f - eye).max()
        if dev > 1e-10:
            raise ValueError(f"frames are not unitary (deviation {dev:.2g})")
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    @property
    def n(self) -> int:
        return self.frames.shape[1]

    def __len__(self):
        return self.frames.shape[0]

    def reversed(self):
        return LagrangianLoop(self.frames[::-1])

    def rolled(self, shift):
        return LagrangianLoop(np.roll(self.frames, shift, axis=0))

    def angle_increments(self):
        nxt = np.roll(self.frames, -1, axis=0)
        return lagrangian_angles(self.frames, nxt)


def maslov_index(loop: LagrangianLoop) -> int:
    """Winding number of ``det(U)^2`` along the closed loop.

    Each step contributes the sum of the Lagrangian angles between consecutive
    planes; every angle must stay below pi/4 in magnitude.
    """
    angles = loop.angle_increments()
    worst = float(np.abs(angles).max())
    if worst >= NYQUIST_ANGLE:
        raise NyquistViolation(f"neighbouring planes differ by {worst:.3f} rad (limit pi/4)")
    winding = float(angles.sum()) / math.pi
    k = round(winding)
    if abs(winding - k) > 1e-6:
        raise NyquistViolation(f"accumulated winding {winding:.6f} is not an integer")
    return int(k)


# ---------------------------------------------------------------------------
# fibre algebra


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _j_rows(tangents, frames):
    """``J f_j`` as rows: ``(..., n, dim)``."""
    that = _unit(tangents)
    rows = np.swapaxes(frames, -1, -2)
    return cayley.cross(np.broadcast_to(that[..., None, :], rows.shape), rows)


def _coords(tangents, frames, vectors):
    """Complex coordinates of real fibre vectors (columns of ``vectors``) in a unitary frame."""
    rows = np.swapaxes(frames, -1, -2)
    return rows @ vectors + 1j * (_j_rows(tangents, frames) @ vectors)


def _polar_unitary(q):
    u, _, vh = np.linalg.svd(q)
    return u @ vh


def _real_action(tangents, frames, g):
    """Frame vectors after the complex gauge ``g``: ``f'_k = sum_j Re g_jk f_j + Im g_jk J f_j``."""
    jf = np.swapaxes(_j_rows(tangents, frames), -1, -2)
    return frames @ g.real + jf @ g.imag


def unitary_fiber_frame(tangent, seeds):
    """Unitary frame of ``(tangent-perp, J)`` built by complex Gram-Schmidt from ``seeds``.

    ``seeds`` is a sequence of candidate vectors; the first ``(dim-1)/2`` that
    are independent are used.
    """
    tangent = np.asarray(tangent, dtype=float)
    that = tangent / np.linalg.norm(tangent)
    n = (tangent.shape[0] - 1) // 2
    basis = []
    for s in seeds:
        v = np.asarray(s, dtype=float)
        v = v - (v @ that) * that
        for f in basis:
            jf = cayley.cross(that, f)
            v = v - (v @ f) * f - (v @ jf) * jf
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
        if len(basis) == n:
            return np.array(basis).T
    raise ValueError("seeds do not span the fibre")


# ---------------------------------------------------------------------------
# homotopy data


@dataclass(frozen=True, eq=False)
class HomotopyData:
    """Discretised handlebody map with fibre frames and Lagrangian markings.

    Shapes: ``points``, ``tangents``: ``(A+1, B+1, C, dim)``; ``frames``:
    ``(A+1, B+1, C, dim, n)``; ``lag1``, ``lag2``: ``(A+1, C, dim, n)``.
    """

    points: np.ndarray
    tangents: np.ndarray
    frames: np.ndarray
    lag1: np.ndarray
    lag2: np.ndarray
    label: str = "a"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = {}
        for name in ("points", "tangents", "frames", "lag1", "lag2"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        p = arrays["points"]
        if p.ndim != 4 or p.shape[-1] not in (3, 7):
            raise ValueError("points must be (A+1, B+1, C, dim) with dim 3 or 7")
        a1, b1, c, dim = p.shape
        n = (dim - 1) // 2
        if arrays["tangents"].shape != p.shape:
            raise ValueError("tangents must match points")
        if arrays["frames"].shape != (a1, b1, c, dim, n):
            raise ValueError(f"frames must have shape {(a1, b1, c, dim, n)}")
        for name in ("lag1", "lag2"):
            if arrays[name].shape != (a1, c, dim, n):
                raise ValueError(f"{name} must have shape {(a1, c, dim, n)}")
        if min(a1, b1) < 2 or c < 8:
            raise ValueError("grid too small")

    @property
    def shape(self):
        return self.points.shape[:3]

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    def validate(self, tol=1e-8):
        """Raise ``ValueError`` if the data violate the structural invariants."""
        v = self.tangents
        if np.linalg.norm(v, axis=-1).min() <= 1e-12:
            raise ValueError("zero tangent vector")
        for face in (0, -1):
            for name in ("points", "tangents"):
                arr = getattr(self, name)[face]
                if np.abs(arr - arr[:1]).max() > tol:
                    raise ValueError(f"curve face tau={face} depends on t ({name})")
        that = _unit(v)
        f = self.frames
        if np.abs(np.einsum("abzd,abzdn->abzn", that, f)).max() > tol:
            raise ValueError("frames are not orthogonal to the tangent")
        jf = np.swapaxes(_j_rows(v, f), -1, -2)
        full = np.concatenate([f, jf], axis=-1)
        gram = np.swapaxes(full, -1, -2) @ full
        if np.abs(gram - np.eye(2 * self.n)).max() > tol:
            raise ValueError("frames are not unitary")
        lam = cayley.standard_three_form(self.dim)
        for name, b in (("lag1", 0), ("lag2", -1)):
            w = getattr(self, name)
            t = that[:, b]
            if np.abs(np.einsum("azd,azdn->azn", t, w)).max() > tol:
                raise ValueError(f"{name} is not in the fibre")
            gram = np.swapaxes(w, -1, -2) @ w
            if np.abs(gram - np.eye(self.n)).max() > tol:
                raise ValueError(f"{name} basis is not orthonormal")
            omega = np.einsum("ijk,azi,azjm,azkn->azmn", lam.tensor, t, w, w)
            if np.abs(omega).max() > tol:
                raise ValueError(f"{name} is not Lagrangian")
        return self

    # -- serialisation ----------------------------------------------------

    FORMAT = "g2loops.homotopy"
    VERSION = 1

    def to_json(self):
        a1, b1, c = self.shape
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "dim": self.dim,
            "n": self.n,
            "grid": {"A": a1 - 1, "B": b1 - 1, "C": c},
            "label": self.label,
            "meta": self.meta,
            "points": self.points.tolist(),
            "tangents": self.tangents.tolist(),
            "frames": self.frames.tolist(),
            "lag1": self.lag1.tolist(),
            "lag2": self.lag2.tolist(),
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, doc):
        if doc.get("format") != cls.FORMAT:
            raise ValueError(f"not a homotopy document (format={doc.get('format')!r})")
        if doc.get("version") != cls.VERSION:
            raise ValueError(f"unsupported homotopy document version {doc.get('version')}")
        return cls(
            points=doc["points"],
            tangents=doc["tangents"],
            frames=doc["frames"],
            lag1=doc["lag1"],
            lag2=doc["lag2"],
            label=doc.get("label", "a"),
            meta=doc.get("meta", {}),
        )


def constant_homotopy(curve_points, grid=DEFAULT_GRID, label="a"):
    """Product homotopy from a planar curve in the e1 e2 plane to itself.

    ``curve_points`` is a function of ``z`` (array) returning ``(C, dim)``
    points.  The frame at each node is built from the in-plane normal; the
    markings are that normal (Sigma_1) and its image under J (Sigma_2), so
    the two surfaces meet orthogonally along the curve.
    """
    a_steps, b_steps, c = grid
    z = 2 * np.pi * np.arange(c) / c
    pts = np.asarray(curve_points(z), dtype=float)
    dim = pts.shape[1]
    from .loopspace import spectral_derivative

    tang = spectral_derivative(pts, 2 * np.pi, 1)
    normal = np.zeros_like(tang)
    normal[:, 0], normal[:, 1] = tang[:, 1], -tang[:, 0]
    frames = _fibre_frames(tang, dim, normal)
    n = (dim - 1) // 2
    shape = (a_steps + 1, b_steps + 1)
    lag1 = _marking(tang, frames, np.zeros((c, n)))
    lag2 = _marking(tang, frames, np.full((c, n), np.pi / 2))
    return HomotopyData(
        np.broadcast_to(pts, shape + pts.shape),
        np.broadcast_to(tang, shape + tang.shape),
        np.broadcast_to(frames, shape + frames.shape),
        np.broadcast_to(lag1, (a_steps + 1,) + lag1.shape),
        np.broadcast_to(lag2, (a_steps + 1,) + lag2.shape),
        label=label,
        meta={"example": "constant"},
    )


def swap_surfaces(h: HomotopyData) -> HomotopyData:
    """Exchange the roles of Sigma_1 and Sigma_2 (reverses ``t``)."""
    return replace(
        h,
        points=h.points[:, ::-1],
        tangents=h.tangents[:, ::-1],
        frames=h.frames[:, ::-1],
        lag1=h.lag2,
        lag2=h.lag1,
    )


def swap_curves(h: HomotopyData) -> HomotopyData:
    """Exchange gamma_1 and gamma_2 (reverses ``tau``)."""
    return replace(
        h,
        points=h.points[::-1],
        tangents=h.tangents[::-1],
        frames=h.frames[::-1],
        lag1=h.lag1[::-1],
        lag2=h.lag2[::-1],
    )


def random_gauge(h: HomotopyData, seed=0, amplitude=1.0, modes=2) -> HomotopyData:
    """Rotate every input frame by a smooth, z-periodic U(n)-valued gauge.

    The gauge is ``exp(i H)`` with ``H`` a low-order trigonometric polynomial
    in ``(tau, t, z)`` with Hermitian coefficients.
    """
    rng = np.random.default_rng(seed)
    a1, b1, c = h.shape
    n = h.n
    tau = np.linspace(0.0, 1.0, a1)[:, None, None]
    t = np.linspace(0.0, 1.0, b1)[None, :, None]
    z = (2 * np.pi * np.arange(c) / c)[None, None, :]
    herm = np.zeros((a1, b1, c, n, n), dtype=complex)
    for p in range(modes + 1):
        for q in range(modes + 1):
            for k in range(-modes, modes + 1):
                m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                m = 0.5 * (m + m.conj().T) * amplitude / (1 + p + q + abs(k))
                basis = np.cos(np.pi * p * tau) * np.cos(np.pi * q * t) * np.cos(k * z + rng.uniform(0, 2 * np.pi))
                herm += basis[..., None, None] * m
    w, vecs = np.linalg.eigh(herm)
    g = vecs @ (np.exp(1j * w)[..., None] * np.swapaxes(vecs.conj(), -1, -2))
    return replace(h, frames=_real_action(h.tangents, h.frames, g))


# ---------------------------------------------------------------------------
# trivialisation


@dataclass(frozen=True, eq=False)
class GaugedHomotopy:
    """Homotopy data together with a unitary gauge making the frame field a trivialisation.

    ``u1[a, z]`` / ``u2[a, z]`` are the unitary coordinates of the markings on
    the ``t = 0`` / ``t = 1`` faces.  ``twist`` counts applied retwists.
    """

    data: HomotopyData
    gauge: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    align_residual: float
    face_residual: float
    twist: int = 0

    @property
    def n(self):
        return self.data.n

    @property
    def shape(self):
        return self.data.shape

    def gauged_frames(self):
        return _real_action(self.data.tangents, self.data.frames, self.gauge)

    def corner_straightening(self, face):
        """Symplectic shears ``S`` (real ``2n x 2n``, one per z) at curve ``face`` in {0, -1}.

        In the chart ``S U1^H`` the markings become ``R^n`` and ``i R^n``.
        """
        _, a = _graph_matrix(self.u1[face], self.u2[face])
        n = self.n
        s = np.zeros(a.shape[:-2] + (2 * n, 2 * n))
        s[..., :n, :n] = np.eye(n)
        s[..., n:, n:] = np.eye(n)
        s[..., :n, n:] = -a
        return s

    def corner_residual(self):
        """Max over both curves of the gap between ``Phi(L1)`` and ``i Phi(L2)`` in the straightened chart."""
        worst = 0.0
        n = self.n
        for face in (0, -1):
            u1, u2 = self.u1[face], self.u2[face]
            s = self.corner_straightening(face)
            rel = np.swapaxes(u1.conj(), -1, -2) @ u2
            for mat, k in ((np.broadcast_to(np.eye(n, dtype=complex), rel.shape), 0), (rel, 1)):
                real = np.concatenate([mat.real, mat.imag], axis=-2)
                moved = s @ real
                plane = moved[..., :n, :] + 1j * moved[..., n:, :]
                if k == 1:
                    plane = 1j * plane
                # i * S(L2) should be R^n: imaginary part vanishes after orthonormalising
                q = _orthonormal_lagrangian(plane)
                worst = max(worst, float(np.abs(lagrangian_angles(np.eye(n), q)).max()))
        return worst


def _graph_matrix(u1, u2):
    """Write ``U2 R^n`` as ``{A y + i y}`` in the chart ``U1^H``; returns ``(W, A)``."""
    w = np.swapaxes(u1.conj(), -1, -2) @ u2
    x, y = w.real, w.imag
    sv = np.linalg.svd(y, compute_uv=False)
    if np.any(sv[..., -1] < 1e-8 * np.maximum(sv[..., 0], 1e-300)):
        raise BadCycle("the two markings are not transversal on an intersection curve")
    a = x @ np.linalg.inv(y)
    return w, 0.5 * (a + np.swapaxes(a, -1, -2))


def _orthonormal_lagrangian(m):
    """Unitary frame of the real span of the columns of ``m``."""
    gram = (np.swapaxes(m.conj(), -1, -2) @ m).real
    w, v = np.linalg.eigh(gram)
    inv_sqrt = v @ (w[..., None] ** -0.5 * np.swapaxes(v, -1, -2))
    return m @ inv_sqrt


def _overlap(tangents_a, frames_a, tangents_b, frames_b):
    """Complex-linear part of the orthogonal projection from fibre ``b`` to fibre ``a``.

    Entry ``(j, k)`` is the coordinate of ``f^b_k`` along ``f^a_j``; using only
    the complex-linear part makes the result transform as ``g_a^H O g_b``
    under gauge changes at the two ends, exactly.
    """
    rows_a = np.swapaxes(frames_a, -1, -2)
    jrows_a = _j_rows(tangents_a, frames_a)
    jf_b = np.swapaxes(_j_rows(tangents_b, frames_b), -1, -2)
    re = rows_a @ frames_b + jrows_a @ jf_b
    im = jrows_a @ frames_b - rows_a @ jf_b
    return 0.5 * (re + 1j * im)


def _align(tangents_a, frames_a, gauge_a, tangents_b, frames_b):
    """Gauge at ``b`` aligning its frame with the gauged frame at ``a``; also the residual."""
    overlap = _overlap(tangents_a, frames_a, tangents_b, frames_b)
    q = np.swapaxes(gauge_a.conj(), -1, -2) @ overlap
    n = q.shape[-1]
    resid = np.abs(np.swapaxes(q.conj(), -1, -2) @ q - np.eye(n)).max(axis=(-1, -2))
    sv = np.linalg.svd(q, compute_uv=False)
    if np.any(sv[..., -1] < ALIGN_TOL):
        raise NonTrivializable("neighbouring fibres are too far apart to align frames")
    return np.swapaxes(_polar_unitary(q).conj(), -1, -2), resid


def _unitary_power(u, s):
    """``u^s`` with eigen-angles taken in ``(-pi, pi]``.

    Angles at ``-pi`` (up to rounding) are moved to ``+pi`` so that the
    result depends only on ``u`` and not on the eigenbasis chosen inside a
    degenerate eigenspace.
    """
    t, z = schur(u, output="complex")
    phases = np.angle(np.diag(t))
    phases = np.where(phases <= -np.pi + 1e-9, phases + 2 * np.pi, phases)
    return z @ np.diag(np.exp(1j * s * phases)) @ z.conj().T


def trivialize(h: HomotopyData) -> GaugedHomotopy:
    """Discrete parallel transport of the frames over the grid.

    The gauge is the identity at node ``(0, 0, 0)``.  It is transported along
    ``z`` at the corner ``tau = t = 0`` (the holonomy of that circle is spread
    uniformly so the result is periodic), then along ``tau`` on the ``t = 0``
    face, then along ``t`` at every ``(tau, z)``.  Each step takes the
    unitary polar factor of the frame overlap.
    """
    a1, b1, c = h.shape
    n = h.n
    v, f = h.tangents, h.frames
    gauge = np.zeros((a1, b1, c, n, n), dtype=complex)
    gauge[0, 0, 0] = np.eye(n)
    worst = 0.0
    for k in range(1, c + 1):
        g, r = _align(v[0, 0, k - 1], f[0, 0, k - 1], gauge[0, 0, k - 1], v[0, 0, k % c], f[0, 0, k % c])
        worst = max(worst, float(r))
        if k < c:
            gauge[0, 0, k] = g
        else:
            closing = g
    correction = np.conj(closing).T
    for k in range(c):
        gauge[0, 0, k] = gauge[0, 0, k] @ _unitary_power(correction, k / c)
    for a in range(1, a1):
        g, r = _align(v[a - 1, 0], f[a - 1, 0], gauge[a - 1, 0], v[a, 0], f[a, 0])
        gauge[a, 0] = g
        worst = max(worst, float(r.max()))
    for b in range(1, b1):
        g, r = _align(v[:, b - 1], f[:, b - 1], gauge[:, b - 1], v[:, b], f[:, b])
        gauge[:, b] = g
        worst = max(worst, float(r.max()))
    u1 = np.swapaxes(gauge[:, 0].conj(), -1, -2) @ _coords(v[:, 0], f[:, 0], h.lag1)
    u2 = np.swapaxes(gauge[:, -1].conj(), -1, -2) @ _coords(v[:, -1], f[:, -1], h.lag2)
    gh = GaugedHomotopy(h, gauge, u1, u2, worst, 0.0)
    frames = gh.gauged_frames()
    face = max(float(np.abs(frames[x] - frames[x][:1]).max()) for x in (0, -1))
    return replace(gh, face_residual=face)


def retwist(gh: GaugedHomotopy, k: int) -> GaugedHomotopy:
    """Compose the gauge with ``diag(e^{-i k z}, 1, ..., 1)``; mu(S) changes by ``2k``."""
    if k == 0:
        return gh
    c = gh.shape[2]
    z = 2 * np.pi * np.arange(c) / c
    d = np.ones((c, gh.n), dtype=complex)
    d[:, 0] = np.exp(-1j * k * z)
    gauge = gh.gauge * d[None, None, :, None, :]
    # coordinates transform by the inverse gauge
    u1 = np.conj(d)[None, :, :, None] * gh.u1
    u2 = np.conj(d)[None, :, :, None] * gh.u2
    return replace(gh, gauge=gauge, u1=u1, u2=u2, twist=gh.twist + k)


# ---------------------------------------------------------------------------
# boundary cycles


def _corner_path(u1, u2, sign=+1.0, samples=16, max_refine=12):
    """Path from ``U1 R^n`` to ``U2 R^n``: ``e^{i sign pi s/2}`` in the straightened chart, pulled back.

    Sampled at ``s`` values refined until neighbouring planes are within pi/8.
    Endpoints included.
    """
    _, a = _graph_matrix(u1, u2)
    n = a.shape[-1]

    def frame(s):
        c, sn = math.cos(math.pi * s / 2), math.sin(math.pi * s / 2)
        m = (c * np.eye(n) + sign * sn * a) + 1j * sign * sn * np.eye(n)
        return u1 @ _orthonormal_lagrangian(m)

    ss = list(np.linspace(0.0, 1.0, samples + 1))
    frames = [frame(s) for s in ss]
    for _ in range(max_refine):
        new_s, new_f, refined = [ss[0]], [frames[0]], False
        for i in range(1, len(ss)):
            if np.abs(lagrangian_angles(frames[i - 1], frames[i])).max() > math.pi / 8:
                mid = 0.5 * (ss[i - 1] + ss[i])
                new_s.append(mid)
                new_f.append(frame(mid))
                refined = True
            new_s.append(ss[i])
            new_f.append(frames[i])
        ss, frames = new_s, new_f
        if not refined:
            break
    return np.array(frames)


def boundary_loop(gh: GaugedHomotopy, which="P", z0=0, corner_samples=None) -> LagrangianLoop:
    """Loop of Lagrangian planes over ``S = {0}x{0}xS^1`` or ``P = boundary([0,1]^2) x {z0}``.

    The P loop runs counterclockwise: along the Sigma_1 face (``t = 0``), up the
    gamma_2 face, back along the Sigma_2 face, and down the gamma_1 face.  On
    the curve faces the plane turns from the Sigma_1 marking to the Sigma_2
    marking by ``e^{i pi s / 2}`` in the chart where the markings sit at
    ``R^n`` and ``i R^n``.
    """
    if which == "S":
        return LagrangianLoop(gh.u1[0])
    if which != "P":
        raise BadCycle(f"unknown cycle {which!r}; expected 'S' or 'P'")
    c = gh.shape[2]
    if not 0 <= z0 < c:
        raise BadCycle(f"z0 index {z0} outside 0..{c - 1}")
    samples = corner_samples or max(gh.shape[1] - 1, 8)
    bottom = gh.u1[:, z0]
    right = _corner_path(gh.u1[-1, z0], gh.u2[-1, z0], samples=samples)
    top = gh.u2[::-1, z0]
    left = _corner_path(gh.u1[0, z0], gh.u2[0, z0], samples=samples)[::-1]
    frames = np.concatenate([bottom, right[1:], top[1:], left[1:-1]])
    return LagrangianLoop(frames)


def normalize_S(gh: GaugedHomotopy) -> GaugedHomotopy:
    """Retwist so that the Maslov index of the S cycle is zero."""
    mu_s = maslov_index(boundary_loop(gh, "S"))
    if mu_s % 2:
        raise OddSTwist(f"mu(S) = {mu_s} is odd; the markings are not orientable along gamma_1")
    out = retwist(gh, -mu_s // 2)
    return out


@dataclass(frozen=True)
class RelativeIndex:
    value: int
    profile: tuple
    mu_s: int
    dim: int
    label: str = "a"

    @property
    def z0_independent(self) -> bool:
        return len(set(self.profile)) == 1

    @property
    def mod4(self) -> int:
        return self.value % 4

    def to_json(self):
        out = {
            "format": "g2loops.relative_index",
            "version": 1,
            "label": self.label,
            "dim": self.dim,
            "index": self.value,
            "mu_S_before_normalization": self.mu_s,
            "z0_independent": self.z0_independent,
            "profile": list(self.profile),
        }
        if self.dim == 3:
            out["index_mod4"] = self.mod4
        return out


def relative_index(h: HomotopyData, z0=0, workers=1) -> RelativeIndex:
    """Relative index ``m(gamma_1, gamma_2) = mu(P)`` after ``mu(S)`` is normalised to 0.

    ``mu(P(z0))`` is evaluated for every grid value ``z0``; ``value`` is the
    one at the requested index.
    """
    gh = trivialize(h)
    mu_s = maslov_index(boundary_loop(gh, "S"))
    gh = normalize_S(gh)
    c = gh.shape[2]

    def at(k):
        return maslov_index(boundary_loop(gh, "P", k))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            profile = tuple(pool.map(at, range(c)))
    else:
        profile = tuple(at(k) for k in range(c))
    return RelativeIndex(profile[z0], profile, mu_s, h.dim, h.label)


@dataclass(frozen=True)
class InvariantT:
    """``|#even - #odd|`` with the sign obtained when the reference curve counts as even."""

    value: int
    sign: int
    even: int
    odd: int

    def to_json(self):
        return {"T": self.value, "sign": self.sign, "even": self.even, "odd": self.odd}


def invariant_T(indices) -> InvariantT:
    """Count curves by parity of their relative index to a reference curve.

    ``indices`` lists ``m(reference, gamma)`` for every curve of one component
    class, the reference itself included with index 0.
    """
    indices = [int(i) for i in indices]
    even = sum(1 for i in indices if i % 2 == 0)
    odd = len(indices) - even
    diff = even - odd
    return InvariantT(abs(diff), 1 if diff >= 0 else -1, even, odd)


# ---------------------------------------------------------------------------
# the rotated parabola


@dataclass(frozen=True, eq=False)
class ParabolaExample:
    rho: float
    radii: tuple
    curves: tuple
    homotopy: HomotopyData | None


def _fibre_frames(tangents, dim, radial):
    """Unitary frames from the seeds ``e_r`` (and e4, e7 in 7-D) at every node."""
    flat_t = tangents.reshape(-1, dim)
    flat_r = np.broadcast_to(radial, tangents.shape).reshape(-1, dim)
    n = (dim - 1) // 2
    out = np.empty((flat_t.shape[0], dim, n))
    extra = [] if dim == 3 else [np.eye(7)[3], np.eye(7)[6], np.eye(7)[4], np.eye(7)[5], np.eye(7)[2]]
    for i, (t, r) in enumerate(zip(flat_t, flat_r)):
        out[i] = unitary_fiber_frame(t, [r] + extra)
    return out.reshape(tangents.shape + (n,))


def _marking(tangents, frames, angles):
    """Real basis of ``F diag(e^{i angles}) R^n``: columns ``cos a f_j + sin a J f_j``."""
    jf = np.swapaxes(_j_rows(tangents, frames), -1, -2)
    return frames * np.cos(angles)[..., None, :] + jf * np.sin(angles)[..., None, :]


def parabola_example(rho, grid=DEFAULT_GRID, dim=3, filling=0, label="ccw"):
    """Surface of revolution of ``z = x(x-2) + 1 - rho`` against the plane ``z = 0``.

    For ``rho > 0`` the two meet transversally in circles of radii
    ``1 -+ sqrt(rho)``, both oriented counterclockwise.  The connecting
    homotopy sweeps the annulus between them inside each surface; ``filling``
    selects the interpolation through the interior (0: straight, 1: wavy).

    In 7-D the picture sits in the associative 3-plane ``e1 e2 e3``; the
    Sigma_2 marking is the coassociative plane ``e1 e2 e4 e7`` and the Sigma_1
    marking is tilted by the SU(3) rotation ``diag(e^{ib}, e^{ib}, e^{-2ib})``
    with ``b`` the slope angle of the parabola, which keeps it coassociative.
    """
    if dim not in (3, 7):
        raise ValueError("dim must be 3 or 7")
    if rho < 0:
        raise NoIntersection(f"rho = {rho} < 0: the surfaces do not meet")
    if rho > RHO_MAX:
        raise ValueError(f"rho must be at most {RHO_MAX} (the inner circle shrinks to the axis as rho -> 1)")
    a_steps, b_steps, c = grid
    z = 2 * np.pi * np.arange(c) / c

    def loop_points(r):
        pts = np.zeros((c, dim))
        pts[:, 0] = r * np.cos(z)
        pts[:, 1] = r * np.sin(z)
        return pts

    if rho == 0:
        from .loopspace import DiscreteLoop

        return ParabolaExample(rho, (1.0,), (DiscreteLoop(loop_points(1.0)),), None)

    from .loopspace import DiscreteLoop

    r1, r2 = 1.0 - math.sqrt(rho), 1.0 + math.sqrt(rho)
    tau = np.linspace(0.0, 1.0, a_steps + 1)
    t = np.linspace(0.0, 1.0, b_steps + 1)
    r = r1 + (r2 - r1) * tau
    height = (r - 1.0) ** 2 - rho
    slope = 2.0 * (r - 1.0)

    wave_h, wave_r = {0: (0.0, 0.0), 1: (0.3, 0.2)}.get(filling, (0.15 * filling, 0.1 * filling))
    R, T, Z = np.meshgrid(r, t, z, indexing="ij")
    Tau = np.broadcast_to(tau[:, None, None], R.shape)
    H = np.broadcast_to(height[:, None, None], R.shape)
    # interior-only deformation: vanishes on all four faces of the square
    bump = 16 * T * (1 - T) * Tau * (1 - Tau)
    rad = R * (1 + bump * wave_r * np.cos(3 * Z))
    hgt = (1 - T) * H + bump * wave_h * np.sin(2 * Z)
    drad = R * bump * wave_r * (-3 * np.sin(3 * Z))
    dhgt = bump * wave_h * 2 * np.cos(2 * Z)

    points = np.zeros(R.shape + (dim,))
    points[..., 0] = rad * np.cos(Z)
    points[..., 1] = rad * np.sin(Z)
    points[..., 2] = hgt
    tangents = np.zeros_like(points)
    tangents[..., 0] = drad * np.cos(Z) - rad * np.sin(Z)
    tangents[..., 1] = drad * np.sin(Z) + rad * np.cos(Z)
    tangents[..., 2] = dhgt
    radial = np.zeros(R.shape + (dim,))
    radial[..., 0] = np.cos(Z)
    radial[..., 1] = np.sin(Z)
    frames = _fibre_frames(tangents, dim, radial)

    n = (dim - 1) // 2
    # slope angle of the Sigma_1 tangent e_r + h' e3 in the frame (f = e_r, J f = -e3)
    beta = -np.arctan(slope)
    if n == 1:
        ang1 = np.broadcast_to(beta[:, None, None], (a_steps + 1, c, 1))
    else:
        ang1 = np.broadcast_to((beta[:, None, None] * np.array([1.0, 1.0, -2.0])), (a_steps + 1, c, 3))
    lag1 = _marking(tangents[:, 0], frames[:, 0], ang1)
    lag2 = _marking(tangents[:, -1], frames[:, -1], np.zeros((a_steps + 1, c, n)))
    h = HomotopyData(
        points, tangents, frames, lag1, lag2, label=label,
        meta={"example": "parabola", "rho": float(rho), "filling": int(filling), "radii": [r1, r2]},
    )
    curves = (DiscreteLoop(loop_points(r1)), DiscreteLoop(loop_points(r2)))
    return ParabolaExample(rho, (r1, r2), curves, h)
