"""Long-time behaviour of flow trajectories.

Fits growth laws to coefficients, estimates the rescaled Gromov-Hausdorff
limits, and evaluates blowdown limits ``s^-1 omega(s t)`` in the real coframe
``sigma^1..sigma^4`` where ``zeta^1 = (sigma^1 + i sigma^2)/2`` and
``zeta^2 = (sigma^3 + i sigma^4)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import GeometryId, GeometrySpec
from .curvature import MetricCoefficients
from .flow import IntegratorOptions, Trajectory, integrate

# real 2-forms are stored in this order
REAL_PAIRS = ((0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2))
REAL_NAMES = ("s12", "s34", "s13", "s24", "s14", "s23")
DIAGONAL = (0, 1)

# coordinates held fixed by the flow
CONSERVED = {
    GeometryId.TORUS: ("x", "y", "re_z", "im_z"),
    GeometryId.HYPERELLIPTIC: ("x", "y"),
    GeometryId.HOPF: ("x",),
    GeometryId.PROPERLY_ELLIPTIC: ("y",),
    GeometryId.KODAIRA_NIL: ("y", "re_z", "im_z"),
    GeometryId.KODAIRA_NIL_SEMIDIRECT: ("y",),
    GeometryId.INOUE_SOLVABLE: ("x",),
    GeometryId.SOL1: ("y", "re_z"),
    GeometryId.SOL1_PRIME: ("y",),
}
STATE_COLUMN = {"x": 0, "y": 1, "re_z": 2, "im_z": 3}


class InsufficientSamplesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# real frame


@dataclass(frozen=True)
class RealFrameForm:
    s12: float
    s34: float
    s13: float
    s24: float
    s14: float
    s23: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s12, self.s34, self.s13, self.s24, self.s14, self.s23])

    @classmethod
    def from_array(cls, arr) -> "RealFrameForm":
        return cls(*(float(v) for v in arr))


def _real_frame_array(states: np.ndarray) -> np.ndarray:
    states = np.atleast_2d(states)
    x, y, rz, iz = states.T
    return 0.5 * np.stack([x, y, -iz, -iz, rz, -rz], axis=1)


def to_real_frame(g: MetricCoefficients) -> RealFrameForm:
    return RealFrameForm.from_array(_real_frame_array(g.as_vector())[0])


# ---------------------------------------------------------------------------
# asymptotic fits


@dataclass(frozen=True)
class CoefficientFit:
    kind: str  # constant | linear | sqrt | log_bounded | exp_decay
    value: float  # level, slope, sqrt coefficient, log coefficient or decay rate
    intercept: float
    residual: float
    window: tuple[float, float]
    candidates: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AsymptoticsReport:
    geometry: str
    fits: dict[str, CoefficientFit]
    window: tuple[float, float]

    def __getitem__(self, name: str) -> CoefficientFit:
        return self.fits[name]


_BASES = {
    "linear": lambda t: t,
    "sqrt": np.sqrt,
    "log_bounded": np.log,
}


def _linear_fit(basis: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """Least squares ``values ~ A + B basis``; residual is RMS(resid)/std(values)."""
    M = np.stack([np.ones_like(basis), basis], axis=1)
    (A, B), *_ = np.linalg.lstsq(M, values, rcond=None)
    resid = values - (A + B * basis)
    spread = np.std(values)
    r = float(np.sqrt(np.mean(resid**2)) / spread) if spread > 0 else 0.0
    return float(A), float(B), r


def fit_coefficient(
    t: np.ndarray,
    c: np.ndarray,
    window: tuple[float, float],
    floor: float = 0.0,
    constant_tol: float = 1e-9,
    min_samples: int = 5,
) -> CoefficientFit:
    """Classify the behaviour of ``c(t)`` on ``window``.

    Exponential decay is fitted on the samples above ``floor`` (the
    integrator's resolution), using the last decade of those samples.
    """
    lo, hi = window
    m = (t >= lo) & (t <= hi)
    if m.sum() < min_samples:
        raise InsufficientSamplesError(f"only {m.sum()} samples in window {window}")
    tw, cw = t[m], c[m]
    scale = float(np.max(np.abs(cw)))
    spread = float(np.ptp(cw))
    if scale == 0 or spread <= constant_tol * scale:
        return CoefficientFit("constant", float(np.mean(cw)), 0.0, spread / scale if scale else 0.0, window)

    candidates = {}
    for kind, basis in _BASES.items():
        A, B, r = _linear_fit(basis(tw), cw)
        candidates[kind] = (B, A, r)

    resolved = (t > 0) & (c > floor)
    if resolved.sum() >= min_samples and np.all(c[resolved] > 0):
        tr = t[resolved]
        last = tr >= max(tr[-1] / 10, tr[0])
        if last.sum() >= min_samples:
            te, ce = tr[last], c[resolved][last]
            if ce[0] > 10 * ce[-1]:
                A, B, r = _linear_fit(te, np.log(ce))
                candidates["exp_decay"] = (-B, A, r)

    kind = min(candidates, key=lambda k: candidates[k][2])
    value, intercept, r = candidates[kind]
    if kind == "exp_decay":
        used = (float(te[0]), float(te[-1]))
    else:
        used = window
    return CoefficientFit(kind, value, intercept, r, used, {k: v[2] for k, v in candidates.items()})


def estimate_asymptotics(traj: Trajectory, window: tuple[float, float] | None = None) -> AsymptoticsReport:
    """Fit x, y and |z| over the last decade of the trajectory (or ``window``)."""
    t = traj.t
    positive = t[t > 0]
    if positive.size < 2 or positive[-1] / positive[0] < 100:
        raise InsufficientSamplesError("trajectory must span at least two decades of time")
    if window is None:
        window = (float(t[-1] / 10), float(t[-1]))
    abs_tol = traj.options.abs_tol if traj.options else 1e-12
    floor = 1e3 * abs_tol
    fits = {
        "x": fit_coefficient(t, traj.x, window),
        "y": fit_coefficient(t, traj.y, window),
        "abs_z": fit_coefficient(t, np.abs(traj.z), window, floor=floor),
    }
    return AsymptoticsReport(traj.geometry.name, fits, window)


def decay_rate(t: np.ndarray, c: np.ndarray, floor: float = 0.0) -> tuple[float, float]:
    """Fit ``|c| ~ K exp(-rate t)`` on samples above ``floor``; returns ``(rate, K)``."""
    m = np.abs(c) > floor
    if m.sum() < 3:
        raise InsufficientSamplesError("too few resolved samples for a decay fit")
    A, B, _ = _linear_fit(t[m], np.log(np.abs(c[m])))
    return -B, float(np.exp(A))


def log_growth_bound(t: np.ndarray, c: np.ndarray, t_min: float = 10.0) -> tuple[float, float]:
    """``(A, B)`` with ``|c(t)| <= A + B log(1 + t)`` for all ``t >= t_min``.

    ``B`` is the least-squares slope; ``A`` is then the smallest offset that makes
    the bound hold on the samples.
    """
    m = t >= t_min
    if m.sum() < 3:
        raise InsufficientSamplesError("too few samples for a log-growth fit")
    basis = np.log1p(t[m])
    vals = np.abs(c[m])
    _, B, _ = _linear_fit(basis, vals)
    A = float(np.max(vals - B * basis))
    return A, B


# ---------------------------------------------------------------------------
# Gromov-Hausdorff limits


@dataclass(frozen=True)
class GHLimit:
    kind: str  # point | fixed | circle | base-curve
    value: float
    target: float | None
    t: float


def gh_limit(traj: Trajectory, lambda_quotient: float | None = None, inoue_type: str = "plus") -> GHLimit:
    """Rescaled (``g/t``) limit estimated at the final time of ``traj``.

    For Sol1 / Sol1' the circle length needs the eigenvalue ``lambda_quotient``
    of the lattice monodromy; ``inoue_type="minus"`` (Sol1 only) uses the
    ``lambda^2`` quotient.
    """
    spec = traj.geometry
    gid = spec.id
    t = float(traj.t[-1])
    x, y, z = traj.x[-1], traj.y[-1], traj.z[-1]

    if gid in (GeometryId.TORUS, GeometryId.HYPERELLIPTIC, GeometryId.KODAIRA_NIL,
               GeometryId.KODAIRA_NIL_SEMIDIRECT):
        return GHLimit("point", float(max(x, y, abs(z)) / t), 0.0, t)
    if gid is GeometryId.HOPF:
        # no collapse: the metric itself converges, y/x -> 1 + alpha^2
        return GHLimit("fixed", float(y / x), 1 + spec.params.alpha**2, t)
    if gid is GeometryId.PROPERLY_ELLIPTIC:
        return GHLimit("base-curve", float(x / t), 2.0, t)
    if gid is GeometryId.INOUE_SOLVABLE:
        return GHLimit("circle", float(np.sqrt(y / (2 * t))), float(np.sqrt(6) * abs(spec.params.a)), t)
    if gid in (GeometryId.SOL1, GeometryId.SOL1_PRIME):
        if lambda_quotient is None:
            raise ValueError(f"{gid.value} circle length needs lambda_quotient")
        if not lambda_quotient > 0 or lambda_quotient == 1:
            raise ValueError("lambda_quotient must be positive and different from 1")
        if inoue_type not in ("plus", "minus"):
            raise ValueError("inoue_type must be 'plus' or 'minus'")
        if inoue_type == "minus" and gid is not GeometryId.SOL1:
            raise ValueError("S^- quotients only arise from sol1")
        log_lam = abs(np.log(lambda_quotient)) * (2 if inoue_type == "minus" else 1)
        return GHLimit("circle", float(np.sqrt(x / (2 * t)) * log_lam), float(np.sqrt(2) * log_lam), t)
    raise ValueError(f"no GH limit for {gid!r}")


# ---------------------------------------------------------------------------
# blowdown limits


@dataclass(frozen=True)
class BlowdownWeights:
    w: tuple[float, float, float, float]

    def exponent(self, i: int, j: int) -> float:
        """A ``sigma^{ij}`` coefficient is multiplied by ``s**exponent``."""
        return self.w[i] + self.w[j] - 1

    def exponents(self) -> np.ndarray:
        return np.array([self.exponent(i, j) for i, j in REAL_PAIRS])


_WEIGHTS = {
    GeometryId.TORUS: (0.5, 0.5, 0.5, 0.5),
    GeometryId.HYPERELLIPTIC: (0.5, 0.5, 0.5, 0.5),
    GeometryId.PROPERLY_ELLIPTIC: (0.0, 0.0, 0.5, 0.5),
    GeometryId.KODAIRA_NIL: (0.25, 0.25, 0.5, 0.5),
    GeometryId.KODAIRA_NIL_SEMIDIRECT: (0.25, 0.25, 0.5, 0.5),
    GeometryId.INOUE_SOLVABLE: (0.5, 0.5, 0.0, 0.0),
    GeometryId.SOL1: (0.0, 0.0, 0.5, 0.5),
    GeometryId.SOL1_PRIME: (0.0, 0.0, 0.5, 0.5),
}


def blowdown_weights(gid: GeometryId | str) -> BlowdownWeights:
    gid = GeometryId.parse(gid)
    if gid not in _WEIGHTS:
        raise ValueError(f"{gid.value} converges without rescaling; no blowdown weights")
    return BlowdownWeights(_WEIGHTS[gid])


def blowdown_target(spec: GeometrySpec, g0: MetricCoefficients, t: float) -> RealFrameForm:
    """Expected limit ``omega_inf(t)`` in the real coframe."""
    gid = spec.id
    x0, y0 = g0.x, g0.y
    if gid is GeometryId.TORUS:
        return to_real_frame(g0)
    if gid is GeometryId.HYPERELLIPTIC:
        d = (x0, y0)
    elif gid is GeometryId.PROPERLY_ELLIPTIC:
        d = (2 * t, y0)
    elif gid in (GeometryId.KODAIRA_NIL, GeometryId.KODAIRA_NIL_SEMIDIRECT):
        d = (2 * np.sqrt(y0 * t), y0)
    elif gid is GeometryId.INOUE_SOLVABLE:
        d = (x0, 12 * spec.params.a**2 * t)
    elif gid in (GeometryId.SOL1, GeometryId.SOL1_PRIME):
        d = (4 * t, y0)
    else:
        raise ValueError(f"no blowdown limit for {gid.value}")
    return RealFrameForm(d[0] / 2, d[1] / 2, 0.0, 0.0, 0.0, 0.0)


@dataclass
class BlowdownResult:
    geometry: str
    weights: BlowdownWeights
    s_values: tuple[float, ...]
    t_grid: tuple[float, ...]
    slices: dict[float, np.ndarray]  # s -> (len(t_grid), 6) rescaled coefficients
    target: np.ndarray  # (len(t_grid), 6)
    errors: dict[float, float]  # s -> sup over t of relative deviation from target
    off_diagonal: dict[float, float]  # s -> sup over t of largest rescaled z-derived coefficient

    @property
    def s_max(self) -> float:
        return max(self.s_values)

    @property
    def limit(self) -> np.ndarray:
        return self.slices[self.s_max]

    @property
    def error(self) -> float:
        return self.errors[self.s_max]


def blowdown_sample_times(s_values, t_grid) -> tuple[float, ...]:
    return tuple(sorted({float(s) * float(t) for s in s_values for t in t_grid}))


def _lookup(traj: Trajectory, times: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(traj.t, times)
    idx = np.clip(idx, 0, len(traj.t) - 1)
    ok = np.isclose(traj.t[idx], times, rtol=1e-12, atol=0)
    if not np.all(ok):
        missing = times[~ok][:3]
        raise ValueError(f"trajectory has no samples at t={missing}; integrate with blowdown_sample_times()")
    return traj.states[idx]


def blowdown_limit(traj: Trajectory, s_values, t_grid) -> BlowdownResult:
    """Rescaled real-frame coefficients ``s^{w_i + w_j - 1} c_ij(s t)`` for each ``s``.

    The deviation from :func:`blowdown_target` is measured relative to the
    largest target coefficient at each ``t``.
    """
    s_values = tuple(sorted(float(s) for s in s_values))
    t_grid = tuple(float(t) for t in t_grid)
    if not s_values or not t_grid or min(s_values) <= 0 or min(t_grid) <= 0:
        raise ValueError("s_values and t_grid must be non-empty and positive")
    needed = max(s_values) * max(t_grid)
    if traj.t[-1] < needed * (1 - 1e-12):
        raise ValueError(f"trajectory ends at t={traj.t[-1]:g}, blowdown needs t={needed:g}")

    spec = traj.geometry
    weights = blowdown_weights(spec.id)
    exps = weights.exponents()
    g0 = traj.initial
    target = np.array([blowdown_target(spec, g0, t).as_array() for t in t_grid])
    scale = np.max(np.abs(target), axis=1)

    slices, errors, off = {}, {}, {}
    for s in s_values:
        states = _lookup(traj, s * np.array(t_grid))
        coeffs = _real_frame_array(states) * s**exps
        slices[s] = coeffs
        errors[s] = float(np.max(np.max(np.abs(coeffs - target), axis=1) / scale))
        off[s] = float(np.max(np.max(np.abs(coeffs[:, 2:]), axis=1) / scale))
    return BlowdownResult(spec.name, weights, s_values, t_grid, slices, target, errors, off)


def run_blowdown(spec: GeometrySpec, g0: MetricCoefficients, s_values=(1e1, 1e2, 1e3, 1e4),
                 t_grid=(0.5, 1.0, 2.0), **opts) -> BlowdownResult:
    """Integrate far enough and with the right samples, then evaluate the blowdown."""
    samples = blowdown_sample_times(s_values, t_grid)
    traj = integrate(spec, g0, IntegratorOptions(t_end=samples[-1], sample_times=samples, **opts))
    return blowdown_limit(traj, s_values, t_grid)


def soliton_check(result: BlowdownResult, scale: float, exponent_tol: float = 0.1) -> float:
    """Self-similarity residual of the limiting slice.

    Each coefficient should satisfy ``c(a t) = a^{1 - w_i - w_j} c(t)``: linear
    coefficients scale with ``a`` and the automorphism absorbs the rest.  The
    residual is the sup over grid pairs ``(t, a t)`` of the deviation relative
    to the largest coefficient at ``a t``.
    """
    a = float(scale)
    if not a > 0:
        raise ValueError("scale must be positive")
    grid = np.array(result.t_grid)
    pairs = []
    for i, t in enumerate(grid):
        j = np.flatnonzero(np.isclose(grid, a * t, rtol=1e-12, atol=0))
        if j.size:
            pairs.append((i, int(j[0])))
    if not pairs:
        raise ValueError(f"t_grid has no pairs (t, {a:g} t)")

    powers = -result.weights.exponents()  # 1 - w_i - w_j
    c = result.limit
    residual = 0.0
    for i, j in pairs:
        big = np.max(np.abs(c[j]))
        for k in range(6):
            if np.abs(c[j, k]) > 1e-2 * big and np.abs(c[i, k]) > 0 and a != 1:
                observed = np.log(np.abs(c[j, k] / c[i, k])) / np.log(a)
                if abs(observed - powers[k]) > exponent_tol:
                    raise ValueError(
                        f"coefficient {REAL_NAMES[k]} scales like a^{observed:.3f}, expected a^{powers[k]:g}"
                    )
        residual = max(residual, float(np.max(np.abs(c[j] - a**powers * c[i])) / big))
    return residual
