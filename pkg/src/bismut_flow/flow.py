"""Pluriclosed flow ``d omega/dt = -(rho^B)^{(1,1)}`` for left-invariant metrics.

In coefficients ``i x' = -rho_{1 1b}``, ``i y' = -rho_{2 2b}``, ``i z' = -rho_{1 2b}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import GeometryId, GeometrySpec
from .curvature import InadmissibleMetricError, MetricCoefficients, bismut_ricci
from .integrator import IntegrationError, dopri54

REALITY_TOL = 1e-11
DEGENERACY_TOL = 1e-14


class ConventionError(RuntimeError):
    """Generic right-hand side produced complex dx or dy."""


@dataclass(frozen=True)
class FlowState:
    t: float
    g: MetricCoefficients


@dataclass(frozen=True)
class IntegratorOptions:
    t_end: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 500_000
    sample_times: tuple[float, ...] | None = None
    rhs: str = "closed"  # or "generic"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.rhs not in ("closed", "generic"):
            raise ValueError("rhs must be 'closed' or 'generic'")

    def resolved_samples(self) -> np.ndarray:
        if self.sample_times is None:
            lo = min(1e-2, self.t_end / 10)
            ts = np.geomspace(lo, self.t_end, 200)
        else:
            ts = np.asarray(self.sample_times, dtype=float)
            ts = ts[(ts > 0) & (ts <= self.t_end)]
        ts = np.unique(np.concatenate([[0.0], ts, [self.t_end]]))
        return ts


@dataclass
class Trajectory:
    geometry: GeometrySpec
    t: np.ndarray
    states: np.ndarray  # rows of (x, y, re z, im z)
    stats: dict = field(default_factory=dict)
    options: IntegratorOptions | None = None
    truncated: bool = False

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def z(self) -> np.ndarray:
        return self.states[:, 2] + 1j * self.states[:, 3]

    @property
    def det(self) -> np.ndarray:
        return self.x * self.y - np.abs(self.z) ** 2

    @property
    def samples(self) -> list[FlowState]:
        return [FlowState(float(t), MetricCoefficients.from_vector(u)) for t, u in zip(self.t, self.states)]

    @property
    def initial(self) -> MetricCoefficients:
        return MetricCoefficients.from_vector(self.states[0])

    @property
    def final(self) -> MetricCoefficients:
        return MetricCoefficients.from_vector(self.states[-1])

    def at(self, t) -> np.ndarray:
        """States at times inside the sampled range, by linear interpolation in each component."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise ValueError(f"time outside trajectory range [{self.t[0]}, {self.t[-1]}]")
        return np.stack([np.interp(t, self.t, self.states[:, i]) for i in range(4)], axis=1)


def rhs_closed_form(spec: GeometrySpec, g: MetricCoefficients) -> tuple[float, float, complex]:
    x, y, z = g.x, g.y, g.z
    zb = z.conjugate()
    n2 = abs(z) ** 2
    D = g.det
    gid = spec.id

    if gid is GeometryId.TORUS:
        return 0.0, 0.0, 0j
    if gid is GeometryId.HYPERELLIPTIC:
        return 0.0, 0.0, -x * z / D
    if gid is GeometryId.HOPF:
        al = spec.params.alpha
        dy = 2 * (x * ((al**2 + 1) * x - y) + 2 * n2) / D
        return 0.0, dy, (al * 1j * x * z - z * (x + y)) / D
    if gid is GeometryId.PROPERLY_ELLIPTIC:
        al = spec.params.alpha
        dx = 2 * (1 + ((1 + al**2) * y**2 - n2) / D)
        return dx, 0.0, (-1j * al * y * z + z * (y - x)) / D
    if gid is GeometryId.KODAIRA_NIL:
        return 2 * y**2 / D, 0.0, 0j
    if gid is GeometryId.KODAIRA_NIL_SEMIDIRECT:
        return 2 * y**2 / D, 0.0, -(x + 1j * y) * z / D
    if gid is GeometryId.INOUE_SOLVABLE:
        a, b = spec.params.a, spec.params.b
        dy = 12 * a**2 * (1 + n2 / D)
        return 0.0, dy, -(3 * a**2 + b**2 + 2j * a * b) * x * z / D
    if gid is GeometryId.SOL1:
        s = (z + zb).real
        return (4 * x * y - s**2) / D, 0.0, y * (zb - z) / D
    if gid is GeometryId.SOL1_PRIME:
        s = (z + zb).real
        dx = (4 * x * y - y * s - s**2 + 2 * y**2) / D
        return dx, 0.0, (y * (zb - z) - y**2) / D
    raise ValueError(f"no closed-form flow for {gid!r}")


def rhs_generic(spec: GeometrySpec, g: MetricCoefficients) -> tuple[float, float, complex]:
    rho = bismut_ricci(spec, g)
    dx = 1j * rho["11b"]
    dy = 1j * rho["22b"]
    dz = 1j * rho["12b"]
    scale = max(1.0, abs(dx), abs(dy))
    if abs(dx.imag) > REALITY_TOL * scale or abs(dy.imag) > REALITY_TOL * scale:
        raise ConventionError(f"non-real diagonal derivative: dx={dx}, dy={dy}")
    return dx.real, dy.real, dz


_RHS = {"closed": rhs_closed_form, "generic": rhs_generic}


def _vector_field(spec: GeometrySpec, which: str):
    rhs = _RHS[which]

    def f(t, u):
        # MetricCoefficients raises InadmissibleMetricError (a ValueError) off the cone
        dx, dy, dz = rhs(spec, MetricCoefficients(u[0], u[1], complex(u[2], u[3])))
        return np.array([dx, dy, dz.real, dz.imag])

    return f


def _det(u) -> float:
    return u[0] * u[1] - u[2] ** 2 - u[3] ** 2


def _admissible(u) -> bool:
    return u[0] > 0 and u[1] > 0 and u[0] * u[1] - u[2] ** 2 - u[3] ** 2 > 0


def integrate(spec: GeometrySpec, g0: MetricCoefficients, opts: IntegratorOptions) -> Trajectory:
    """Flow ``g0`` to ``opts.t_end``.

    Raises :class:`IntegrationError` on step-size underflow or when
    ``max_steps`` is exhausted; ``err.trajectory`` then holds the samples
    reached so far.
    """
    if g0.det <= DEGENERACY_TOL * g0.x * g0.y:
        raise InadmissibleMetricError(f"initial metric too close to degenerate: {g0}")
    ts = opts.resolved_samples()
    try:
        res = dopri54(
            _vector_field(spec, opts.rhs),
            g0.as_vector(),
            opts.t_end,
            ts,
            rtol=opts.rel_tol,
            atol=opts.abs_tol,
            max_steps=opts.max_steps,
            admissible=_admissible,
            track=_det,
            interpolate=False,
        )
    except IntegrationError as err:
        partial = err.result
        err.trajectory = Trajectory(
            spec, partial.t, partial.u, _stats(partial), opts, truncated=True
        )
        raise
    return Trajectory(spec, res.t, res.u, _stats(res), opts)


def _stats(res) -> dict:
    return {
        "steps": res.steps,
        "rejected": res.rejected,
        "guard_rejections": res.guard_rejections,
        "evaluations": res.evaluations,
        "min_det": float(res.stats.get("track_min", float("nan"))),
    }


def solve_default(spec: GeometrySpec, g0: MetricCoefficients, **kw) -> Trajectory:
    opts = IntegratorOptions(t_end=1e4, sample_times=tuple(np.geomspace(1e-2, 1e4, 200)), **kw)
    return integrate(spec, g0, opts)
