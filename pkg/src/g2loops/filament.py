"""
Filament flow ``d gamma/dt = cross(gamma', gamma'')`` on closed loops in R^3 or R^7.

In 3-D this is the binormal (localized induction) flow of a vortex filament;
in 7-D the octonionic cross product takes the place of the vector product.
Time stepping is classical RK4 on the spectrally discretised system.  The
three conserved densities are monitored, not enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cayley
from .errors import NotImmersed, StepRejected
from .loopspace import DiscreteLoop, arclength_parametrize, periodic_integral, spectral_derivative

__all__ = [
    "CFL_SAFETY",
    "ConservedReport",
    "FilamentState",
    "cfl_limit",
    "circle",
    "conserved",
    "density_law_residual",
    "perturbed_circle",
    "rhs",
    "simulate",
    "step",
    "steps_for_horizon",
    "tangent_evolution_residual",
]

CFL_SAFETY = 0.25


@dataclass(frozen=True, eq=False)
class FilamentState:
    loop: DiscreteLoop
    time: float = 0.0
    dealias: bool = False

    @property
    def points(self):
        return self.loop.points

    def tangent(self):
        return self.loop.tangent()

    def with_points(self, points, time):
        return FilamentState(
            DiscreteLoop(points, period=self.loop.period, eps_immersion=self.loop.eps_immersion),
            time,
            self.dealias,
        )


def circle(n, radius=1.0, dim=3, arclength=True):
    """Circle of given radius in the e1 e2 plane.

    With ``arclength`` the parameter runs over ``[0, 2 pi r)`` at unit speed,
    otherwise over ``[0, 2 pi)``.
    """
    period = 2 * np.pi * radius if arclength else 2 * np.pi
    z = period * np.arange(n) / n
    theta = z / radius if arclength else z
    pts = np.zeros((n, dim))
    pts[:, 0] = radius * np.cos(theta)
    pts[:, 1] = radius * np.sin(theta)
    return DiscreteLoop(pts, period=period)


def perturbed_circle(n, dim=3, amplitude=0.05, modes=(2, 3, 4), seed=42, arclength=True):
    """Unit circle plus a random band-limited perturbation in the normal directions.

    With ``arclength`` the result is resampled to unit speed, which the flow
    needs for the third integral to be conserved.
    """
    rng = np.random.default_rng(seed)
    z = 2 * np.pi * np.arange(n) / n
    radial = np.stack([np.cos(z), np.sin(z)] + [np.zeros(n)] * (dim - 2), axis=1)
    tangent = np.stack([-np.sin(z), np.cos(z)] + [np.zeros(n)] * (dim - 2), axis=1)
    pts = radial.copy()
    scale = amplitude / len(modes)
    for k in modes:
        a, b = rng.standard_normal((2, dim))
        wave = np.outer(np.cos(k * z), a) + np.outer(np.sin(k * z), b)
        # keep only the part normal to the unperturbed tangent
        wave -= np.sum(wave * tangent, axis=1, keepdims=True) * tangent
        pts += scale * wave
    loop = DiscreteLoop(pts)
    return arclength_parametrize(loop) if arclength else loop


def _derivatives(state):
    loop = state.loop
    d1 = spectral_derivative(loop.points, loop.period, 1, state.dealias)
    d2 = spectral_derivative(loop.points, loop.period, 2, state.dealias)
    return d1, d2


def rhs(state: FilamentState):
    """Velocity ``cross(gamma', gamma'')`` at every sample."""
    d1, d2 = _derivatives(state)
    speed = np.linalg.norm(d1, axis=1)
    if not speed.min() > state.loop.eps_immersion:
        raise NotImmersed(f"min |gamma'| = {speed.min():.3g}")
    return cayley.cross(d1, d2)


def _velocity(points, period, dealias):
    d1 = spectral_derivative(points, period, 1, dealias)
    d2 = spectral_derivative(points, period, 2, dealias)
    return cayley.cross(d1, d2), np.linalg.norm(d1, axis=1)


def cfl_limit(state: FilamentState, safety=CFL_SAFETY):
    """Largest admissible ``dt = safety * dz^2 / max|gamma'|``."""
    return safety * state.loop.dz ** 2 / float(state.loop.speed().max())


def step(state: FilamentState, dt, safety=CFL_SAFETY, check_cfl=True):
    """One classical RK4 step."""
    if not dt > 0:
        raise StepRejected(f"dt must be positive, got {dt}")
    if check_cfl:
        limit = cfl_limit(state, safety)
        if dt >= limit:
            raise StepRejected(f"dt = {dt:g} violates the dispersive CFL limit {limit:g}")
    x = state.points
    period, dealias, eps = state.loop.period, state.dealias, state.loop.eps_immersion
    k1, s = _velocity(x, period, dealias)
    if not s.min() > eps:
        raise StepRejected(f"loop stopped being immersed (min |gamma'| = {s.min():.3g})")
    k2, _ = _velocity(x + 0.5 * dt * k1, period, dealias)
    k3, _ = _velocity(x + 0.5 * dt * k2, period, dealias)
    k4, _ = _velocity(x + dt * k3, period, dealias)
    new = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = state.with_points(new, state.time + dt)
    if not out.loop.speed().min() > eps:
        raise StepRejected("loop stopped being immersed")
    return out


# ---------------------------------------------------------------------------
# conserved quantities


def _densities(loop, lam=None):
    lam = cayley.standard_three_form(loop.dim) if lam is None else lam
    t = loop.derivative(1)
    t1 = spectral_derivative(t, loop.period, 1)
    t2 = spectral_derivative(t, loop.period, 2)
    return (
        np.sum(t * t, axis=1),
        0.5 * np.sum(t1 * t1, axis=1),
        lam(t, t1, t2),
    )


@dataclass
class ConservedReport:
    """Rows of ``t, I1, I2, I3`` plus drifts relative to the first row.

    Drift of I3 is measured against the integral of ``|lam(T, T', T'')|`` at
    the first row, since I3 itself may vanish.
    """

    rows: list = field(default_factory=list)
    scales: tuple | None = None

    columns = ("t", "I1", "I2", "I3", "d1", "d2", "d3")

    def append(self, t, values, scales):
        if self.scales is None:
            self.scales = tuple(float(s) for s in scales)
            self._first = tuple(float(v) for v in values)
        drifts = tuple(
            (v - v0) / s if s > 0 else 0.0 for v, v0, s in zip(values, self._first, self.scales)
        )
        self.rows.append((float(t), *map(float, values), *drifts))

    def max_drift(self):
        if not self.rows:
            return (0.0, 0.0, 0.0)
        d = np.abs(np.array(self.rows)[:, 4:])
        return tuple(float(x) for x in d.max(axis=0))

    def to_csv(self):
        lines = ["# format: g2loops.conserved/1", ",".join(self.columns)]
        lines += [",".join(repr(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def conserved(state: FilamentState | DiscreteLoop, lam=None):
    """``(I1, I2, I3)`` and the scales used for relative drift."""
    loop = state.loop if isinstance(state, FilamentState) else state
    loop.require_immersed()
    dens = _densities(loop, lam)
    values = tuple(float(periodic_integral(d, loop.period)) for d in dens)
    scales = (abs(values[0]), abs(values[1]), float(periodic_integral(np.abs(dens[2]), loop.period)))
    return values, scales


def tangent_evolution_residual(state: FilamentState):
    """Max of ``|d/dz rhs - cross(T, T'')|`` relative to ``max |cross(T, T'')|``."""
    loop = state.loop
    t = loop.derivative(1)
    lhs = spectral_derivative(rhs(state), loop.period, 1)
    rhs_t = cayley.cross(t, spectral_derivative(t, loop.period, 2))
    return float(np.abs(lhs - rhs_t).max() / max(np.abs(rhs_t).max(), 1e-300))


def density_law_residual(before: FilamentState, after: FilamentState, flux_derivatives=1, lam=None):
    """Compare the time derivative of ``(T', T')/2`` with ``-d^m/dz^m lam(T, T', T'')``.

    The time derivative is the difference quotient of the two states,
    assigned to their midpoint; the flux side is averaged over both states.
    Returns the max residual relative to the max of the time derivative.
    """
    dt = after.time - before.time
    if not dt > 0:
        raise ValueError("states must be in increasing time order")
    _, e0, f0 = _densities(before.loop, lam)
    _, e1, f1 = _densities(after.loop, lam)
    dedt = (e1 - e0) / dt
    period = before.loop.period
    flux = -0.5 * (
        spectral_derivative(f0, period, flux_derivatives) + spectral_derivative(f1, period, flux_derivatives)
    )
    return float(np.abs(dedt - flux).max() / max(np.abs(dedt).max(), 1e-300))


def simulate(state: FilamentState, dt, n_steps, report_every=1, keep_snapshots=True, lam=None,
             safety=CFL_SAFETY):
    """Advance ``n_steps`` RK4 steps; returns ``(snapshots, report)``.

    Snapshots and report rows are taken at step 0 and every ``report_every``
    steps, and at the final step.
    """
    if n_steps < 0 or report_every < 1:
        raise ValueError("n_steps must be >= 0 and report_every >= 1")
    report = ConservedReport()
    snaps = []

    def record(s):
        values, scales = conserved(s, lam)
        report.append(s.time, values, scales)
        if keep_snapshots:
            snaps.append(s)

    record(state)
    for i in range(1, n_steps + 1):
        state = step(state, dt, safety)
        if i % report_every == 0 or i == n_steps:
            record(state)
    if not keep_snapshots:
        snaps.append(state)
    return snaps, report


def steps_for_horizon(horizon, dt):
    """Number of steps and the adjusted dt that land exactly on ``horizon``."""
    n = max(1, math.ceil(horizon / dt - 1e-9))
    return n, horizon / n
