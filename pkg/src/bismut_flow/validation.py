"""Self-checks run by ``bismut-flow validate``.

Each check returns a :class:`CheckResult`; the suite passes iff every check does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import CONSERVED, STATE_COLUMN
from .catalog import GeometryId, GeometryParams, build_geometry, verify_coframe
from .curvature import MetricCoefficients, bismut_ricci, closed_form_ricci
from .flow import rhs_closed_form, rhs_generic
from .forms import check_structure_constants

CATALOG_TOL = 1e-14
EQUIVALENCE_TOL = 1e-11

# parameter grid for the catalog checks
ALPHAS = (-2.0, 0.0, 1.0, 3.0)
INOUE_AB = ((1.0, 0.0), (0.5, 1.0), (2.0, -1.0))
EPSILONS = (1, -1)


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}


def parameter_grid():
    """Every catalog entry with each parameter value of the test grid."""
    for gid in GeometryId:
        if gid in (GeometryId.HOPF, GeometryId.PROPERLY_ELLIPTIC):
            for al in ALPHAS:
                yield gid, GeometryParams(alpha=al)
        elif gid is GeometryId.INOUE_SOLVABLE:
            for a, b in INOUE_AB:
                yield gid, GeometryParams(a=a, b=b)
        elif gid is GeometryId.KODAIRA_NIL_SEMIDIRECT:
            for e in EPSILONS:
                yield gid, GeometryParams(epsilon=e)
        else:
            yield gid, None


def random_metrics(rng: np.random.Generator, n: int) -> list[MetricCoefficients]:
    """x, y log-uniform in [0.1, 10]; |z|^2 up to 0.9 x y with uniform phase."""
    x = np.exp(rng.uniform(np.log(0.1), np.log(10), n))
    y = np.exp(rng.uniform(np.log(0.1), np.log(10), n))
    r = np.sqrt(rng.uniform(0, 0.9, n) * x * y)
    phase = rng.uniform(0, 2 * np.pi, n)
    return [MetricCoefficients(xi, yi, ri * np.exp(1j * p)) for xi, yi, ri, p in zip(x, y, r, phase)]


def relative_rhs_error(spec, g: MetricCoefficients) -> float:
    closed = np.array(rhs_closed_form(spec, g), dtype=complex)
    generic = np.array(rhs_generic(spec, g), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(closed))))
    return float(np.max(np.abs(generic - closed)) / scale)


def check_catalog() -> list[CheckResult]:
    out = []
    for gid, params in parameter_grid():
        spec = build_geometry(gid, params)
        label = gid.value if params is None else f"{gid.value}{_params_label(params)}"
        problems = check_structure_constants(spec.constants, CATALOG_TOL) + verify_coframe(spec, CATALOG_TOL)
        out.append(CheckResult(f"catalog:{label}", not problems, 0.0, "; ".join(problems)))
    return out


def check_equivalence(samples: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Generic Bismut-Ricci right-hand side against the closed forms."""
    rng = np.random.default_rng(seed)
    out = []
    for gid in GeometryId:
        spec = build_geometry(gid)
        metrics = random_metrics(rng, samples)
        rhs_err = max(relative_rhs_error(spec, g) for g in metrics)
        rho_err = 0.0
        for g in metrics[: max(1, samples // 10)]:
            a = bismut_ricci(spec, g).components
            b = closed_form_ricci(spec, g).components
            rho_err = max(rho_err, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))))
        worst = max(rhs_err, rho_err)
        out.append(CheckResult(f"equivalence:{gid.value}", worst <= EQUIVALENCE_TOL, worst,
                               f"{samples} metrics"))
    return out


def check_conserved(samples: int = 200, seed: int = 1) -> list[CheckResult]:
    """Coordinates listed in CONSERVED have exactly zero derivative."""
    rng = np.random.default_rng(seed)
    out = []
    for gid, names in CONSERVED.items():
        spec = build_geometry(gid)
        worst = 0.0
        for g in random_metrics(rng, samples):
            dx, dy, dz = rhs_generic(spec, g)
            deriv = np.array([dx, dy, dz.real, dz.imag])
            worst = max(worst, max(abs(deriv[STATE_COLUMN[n]]) for n in names))
        out.append(CheckResult(f"conserved:{gid.value}:{','.join(names)}", worst <= EQUIVALENCE_TOL, worst))
    return out


def check_monotone(samples: int = 200, seed: int = 2) -> list[CheckResult]:
    """Sign conditions of the flow: D' > 0 for properly elliptic, (|z|^2)' <= 0 for sol1."""
    rng = np.random.default_rng(seed)
    out = []
    pell = build_geometry(GeometryId.PROPERLY_ELLIPTIC, GeometryParams(alpha=1.0))
    sol1 = build_geometry(GeometryId.SOL1)
    worst_d, worst_z = np.inf, -np.inf
    for g in random_metrics(rng, samples):
        dx, dy, dz = rhs_closed_form(pell, g)
        worst_d = min(worst_d, dx * g.y + g.x * dy - 2 * (g.z.conjugate() * dz).real)
        dx, dy, dz = rhs_closed_form(sol1, g)
        worst_z = max(worst_z, 2 * (g.z.conjugate() * dz).real)
    out.append(CheckResult("monotone:properly-elliptic:D", worst_d > 0, float(worst_d)))
    out.append(CheckResult("monotone:sol1:|z|^2", worst_z <= 1e-15, float(worst_z)))
    return out


def run_validation(samples: int = 1000, seed: int = 0) -> list[CheckResult]:
    return (
        check_catalog()
        + check_equivalence(samples, seed)
        + check_conserved(max(1, samples // 5), seed + 1)
        + check_monotone(max(1, samples // 5), seed + 2)
    )


def _params_label(p: GeometryParams) -> str:
    parts = [f"{k}={v:g}" for k, v in vars(p).items() if v is not None]
    return "(" + ",".join(parts) + ")"


__all__ = [
    "CheckResult",
    "check_catalog",
    "check_conserved",
    "check_equivalence",
    "check_monotone",
    "parameter_grid",
    "random_metrics",
    "relative_rhs_error",
    "run_validation",
]
