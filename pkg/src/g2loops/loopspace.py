"""
Discretised loops in R^3 / R^7, normal fields, the transgressed 2-form and
the almost complex structure acting on normal fields.

A loop is stored as N samples at uniform parameter values
``z_k = period * k / N``; the default period is ``2 pi``.  Derivatives and
integrals are spectral, so everything is exact for band-limited loops below
the Nyquist frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cayley
from .cayley import ThreeForm
from .errors import DimensionMismatch, NotImmersed, TooFewSamples

__all__ = [
    "DiscreteLoop",
    "NormalField",
    "arclength_parametrize",
    "complex_structure",
    "compatibility_pairing",
    "fourier_eval",
    "loop_derivative",
    "nondegeneracy_probe",
    "periodic_integral",
    "project_normal",
    "reparametrize",
    "spectral_derivative",
    "transgressed_form",
]

MIN_SAMPLES = 8
EPS_IMMERSION = 1e-8


def _wavenumbers(n, period):
    return 2.0 * np.pi / period * np.fft.rfftfreq(n, d=1.0 / n)


def spectral_derivative(samples, period=2 * np.pi, order=1, dealias=False):
    """Derivative along axis 0 of periodic samples via the real FFT.

    The Nyquist mode is dropped for odd orders (its derivative is not real).
    ``dealias`` zeroes the top third of the spectrum (2/3 rule).
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    coef = np.fft.rfft(samples, axis=0)
    k = _wavenumbers(n, period)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    if dealias:
        mult[np.arange(k.size) > n // 3] = 0.0
    mult = mult.reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.fft.irfft(coef * mult, n=n, axis=0)


def periodic_integral(values, period=2 * np.pi):
    """Integral over one period of periodic samples (spectral: mean times period)."""
    values = np.asarray(values, dtype=float)
    return period * values.mean(axis=0)


def fourier_eval(samples, z, period=2 * np.pi, order=0):
    """Evaluate the trigonometric interpolant of ``samples`` (or its derivative) at ``z``."""
    samples = np.asarray(samples, dtype=float)
    z = np.asarray(z, dtype=float)
    n = samples.shape[0]
    coef = np.fft.rfft(samples, axis=0) / n
    k = _wavenumbers(n, period)
    weight = np.full(k.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
        if order % 2 == 1:
            weight[-1] = 0.0
    phase = np.exp(1j * np.outer(z.reshape(-1), k)) * (1j * k) ** order * weight
    flat = coef.reshape(k.size, -1)
    out = np.real(phase @ flat)
    return out.reshape(z.shape + samples.shape[1:])


@dataclass(frozen=True, eq=False)
class DiscreteLoop:
    """Uniform periodic samples of a closed curve."""

    points: np.ndarray
    period: float = 2 * np.pi
    eps_immersion: float = EPS_IMMERSION
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (3, 7):
            raise DimensionMismatch("a loop is an (N, 3) or (N, 7) array")
        if pts.shape[0] < MIN_SAMPLES:
            raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {pts.shape[0]}")
        if not self.period > 0:
            raise ValueError("period must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_function(cls, func, n, period=2 * np.pi, **kw):
        z = period * np.arange(n) / n
        return cls(np.asarray(func(z), dtype=float), period=period, **kw)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def z(self):
        return self.period * np.arange(self.n) / self.n

    @property
    def dz(self) -> float:
        return self.period / self.n

    def derivative(self, order=1):
        if order not in self._cache:
            d = spectral_derivative(self.points, self.period, order)
            d.setflags(write=False)
            self._cache[order] = d
        return self._cache[order]

    def tangent(self):
        return self.derivative(1)

    def speed(self):
        return np.linalg.norm(self.tangent(), axis=1)

    def length(self):
        return float(periodic_integral(self.speed(), self.period))

    def is_immersed(self):
        return bool(self.speed().min() > self.eps_immersion)

    def require_immersed(self):
        smin = self.speed().min()
        if not smin > self.eps_immersion:
            raise NotImmersed(f"min |gamma'| = {smin:.3g} <= {self.eps_immersion:g}")

    def unit_tangent(self):
        self.require_immersed()
        t = self.tangent()
        return t / np.linalg.norm(t, axis=1, keepdims=True)


def loop_derivative(loop: DiscreteLoop, order=1):
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return loop.derivative(order)


@dataclass(frozen=True, eq=False)
class NormalField:
    """Vector field along a loop, pointwise orthogonal to the tangent."""

    loop: DiscreteLoop
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.loop.points.shape:
            raise DimensionMismatch(f"field shape {vals.shape} does not match loop {self.loop.points.shape}")
        t = self.loop.tangent()
        dots = np.abs(np.sum(vals * t, axis=1))
        scale = np.linalg.norm(t, axis=1) * np.linalg.norm(vals, axis=1)
        if np.any(dots > 1e-10 * scale + 1e-300):
            raise ValueError("field is not normal to the loop")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def project_normal(loop: DiscreteLoop, v) -> NormalField:
    """Remove the tangential component of ``v`` pointwise."""
    loop.require_immersed()
    v = np.asarray(v, dtype=float)
    if v.shape != loop.points.shape:
        raise DimensionMismatch(f"field shape {v.shape} does not match loop {loop.points.shape}")
    t = loop.tangent()
    coeff = np.sum(v * t, axis=1) / np.sum(t * t, axis=1)
    x = v - coeff[:, None] * t
    # one more pass removes the rounding residue of the first
    x = x - (np.sum(x * t, axis=1) / np.sum(t * t, axis=1))[:, None] * t
    return NormalField(loop, x)


def _check_fields(loop, *fields):
    for f in fields:
        if f.loop is not loop and not np.array_equal(f.loop.points, loop.points):
            raise DimensionMismatch("normal field belongs to a different loop")


def transgressed_form(loop: DiscreteLoop, x: NormalField, y: NormalField, lam: ThreeForm | None = None,
                      quadrature="spectral"):
    """``omega(x, y)``: the integral over the loop of ``lam(gamma', x, y) dz``.

    ``quadrature="trapezoid"`` closes the periodic trapezoid rule explicitly;
    on uniform periodic samples both rules coincide up to rounding.
    """
    loop.require_immersed()
    lam = cayley.standard_three_form(loop.dim) if lam is None else lam
    if lam.dim != loop.dim:
        raise DimensionMismatch(f"{lam.dim}-form on a loop in R^{loop.dim}")
    _check_fields(loop, x, y)
    density = lam(loop.tangent(), x.values, y.values)
    if quadrature == "spectral":
        return float(periodic_integral(density, loop.period))
    if quadrature == "trapezoid":
        closed = np.append(density, density[0])
        return float(np.trapezoid(closed, dx=loop.dz))
    raise ValueError(f"unknown quadrature {quadrature!r}")


def complex_structure(loop: DiscreteLoop, x: NormalField) -> NormalField:
    """``J x = cross(unit tangent, x)`` pointwise."""
    _check_fields(loop, x)
    jx = cayley.cross(loop.unit_tangent(), x.values)
    t = loop.tangent()
    jx = jx - (np.sum(jx * t, axis=1) / np.sum(t * t, axis=1))[:, None] * t
    return NormalField(loop, jx)


def compatibility_pairing(loop: DiscreteLoop, x: NormalField, y: NormalField, measure="arclength"):
    """The integral of ``(J x, y)`` against arc length ``|gamma'| dz`` or plain ``dz``.

    With the arc-length measure this equals :func:`transgressed_form` for any
    parametrisation; with ``measure="parameter"`` it does so on unit-speed loops.
    """
    density = np.sum(complex_structure(loop, x).values * y.values, axis=1)
    if measure == "arclength":
        density = density * loop.speed()
    elif measure != "parameter":
        raise ValueError(f"unknown measure {measure!r}")
    return float(periodic_integral(density, loop.period))


def nondegeneracy_probe(loop: DiscreteLoop, lam: ThreeForm | None = None):
    """Rank of ``lam(t_k, ., .)`` restricted to the normal space, at each sample."""
    lam = cayley.standard_three_form(loop.dim) if lam is None else lam
    t = loop.unit_tangent()
    ranks = np.empty(loop.n, dtype=int)
    for k, tk in enumerate(t):
        _, _, vh = np.linalg.svd(tk[None, :])
        normal = vh[1:]
        m = normal @ lam.contract(tk) @ normal.T
        s = np.linalg.svd(m, compute_uv=False)
        ranks[k] = int(np.sum(s > 1e-8 * s[0])) if s[0] > 0 else 0
    return ranks


# ---------------------------------------------------------------------------
# reparametrisation


def reparametrize(loop: DiscreteLoop, phi, *fields, period=None):
    """Resample ``loop`` (and fields along it) at ``phi(z_k)`` using the Fourier interpolant.

    ``phi`` maps the new parameter grid to old parameter values.  Returns the
    new loop followed by the resampled field arrays.
    """
    period = loop.period if period is None else period
    znew = period * np.arange(loop.n) / loop.n
    zold = np.asarray(phi(znew), dtype=float)
    new_loop = DiscreteLoop(fourier_eval(loop.points, zold, loop.period), period=period,
                            eps_immersion=loop.eps_immersion)
    moved = [fourier_eval(np.asarray(getattr(f, "values", f)), zold, loop.period) for f in fields]
    return (new_loop, *moved)


def arclength_parametrize(loop: DiscreteLoop, n_out=None, newton_steps=30, tol=1e-14):
    """Resample ``loop`` at equal arc-length spacing; the result has unit speed and period = length.

    ``n_out`` sets the number of output samples (default: same as input).  The
    resampled curve is no longer band-limited, so a finer output grid
    resolves its unit speed more accurately.
    """
    loop.require_immersed()
    n, period = loop.n, loop.period
    n_out = n if n_out is None else int(n_out)
    speed = loop.speed()
    total = float(periodic_integral(speed, period))
    # s(z) = mean_speed * z + periodic part, integrated term by term
    coef = np.fft.rfft(speed) / n
    k = _wavenumbers(n, period)
    weight = np.full(k.size, 2.0)
    weight[0] = 0.0
    if n % 2 == 0:
        weight[-1] = 1.0
    ksafe = np.where(k == 0, 1.0, k)

    def arc(z):
        periodic = np.real((np.exp(1j * np.outer(z, k)) - 1.0) / (1j * ksafe) @ (coef * weight))
        return coef[0].real * z + periodic

    targets = total * np.arange(n_out) / n_out
    z = targets * period / total
    for _ in range(newton_steps):
        sp = np.linalg.norm(fourier_eval(loop.points, z, period, order=1), axis=1)
        step = (arc(z) - targets) / sp
        z = z - step
        if np.max(np.abs(step)) < tol:
            break
    points = fourier_eval(loop.points, z, period)
    return DiscreteLoop(points, period=total, eps_immersion=loop.eps_immersion)
