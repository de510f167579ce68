"""Catalog of the homogeneous complex surfaces with left-invariant complex structure.

Each entry records the brackets of a ``T^{1,0}`` frame ``Z1, Z2`` and the
differentials of the dual coframe.  The two descriptions are redundant on
purpose: :func:`verify_coframe` checks one against the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .forms import (
    InvariantTwoForm,
    StructureConstants,
    check_structure_constants,
    exterior_derivative,
)

COFRAME_TOL = 1e-14

H1, H2, A1, A2 = 0, 1, 2, 3


class GeometryId(str, Enum):
    TORUS = "torus"
    HYPERELLIPTIC = "hyperelliptic"
    HOPF = "hopf"
    PROPERLY_ELLIPTIC = "properly-elliptic"
    KODAIRA_NIL = "kodaira-nil"
    KODAIRA_NIL_SEMIDIRECT = "kodaira-nil-semidirect"
    INOUE_SOLVABLE = "inoue"
    SOL1 = "sol1"
    SOL1_PRIME = "sol1-prime"

    @classmethod
    def parse(cls, name: "str | GeometryId") -> "GeometryId":
        if isinstance(name, GeometryId):
            return name
        key = name.strip().lower().replace("_", "-")
        for member in cls:
            if key in (member.value, member.name.lower().replace("_", "-")):
                return member
        raise ValueError(f"unknown geometry {name!r}; choose from {[m.value for m in cls]}")


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class GeometryParams:
    alpha: float | None = None
    a: float | None = None
    b: float | None = None
    epsilon: int | None = None

    @property
    def lam(self) -> complex:
        """``-b + i a`` for the solvable (Inoue S_A) family."""
        return complex(-self.b, self.a)


_DEFAULTS = {
    GeometryId.HOPF: {"alpha": 0.0},
    GeometryId.PROPERLY_ELLIPTIC: {"alpha": 0.0},
    GeometryId.KODAIRA_NIL_SEMIDIRECT: {"epsilon": 1},
    GeometryId.INOUE_SOLVABLE: {"a": 1.0, "b": 0.0},
}


def _normalize_params(gid: GeometryId, params: GeometryParams | None) -> GeometryParams:
    given = {} if params is None else {k: v for k, v in vars(params).items() if v is not None}
    allowed = set(_DEFAULTS.get(gid, {}))
    extra = set(given) - allowed
    if extra:
        raise GeometryError(f"{gid.value} takes no parameter(s) {sorted(extra)}")
    merged = {**_DEFAULTS.get(gid, {}), **given}
    if gid is GeometryId.INOUE_SOLVABLE:
        merged["a"], merged["b"] = float(merged["a"]), float(merged["b"])
        if merged["a"] == 0:
            raise GeometryError("inoue requires a != 0")
    if gid is GeometryId.KODAIRA_NIL_SEMIDIRECT and merged["epsilon"] not in (1, -1):
        raise GeometryError("epsilon must be +1 or -1")
    if "alpha" in merged:
        merged["alpha"] = float(merged["alpha"])
    for v in merged.values():
        if not np.isfinite(v):
            raise GeometryError("geometry parameters must be finite")
    return GeometryParams(**merged)


@dataclass(frozen=True)
class GeometrySpec:
    id: GeometryId
    params: GeometryParams
    constants: StructureConstants
    coframe: tuple[InvariantTwoForm, InvariantTwoForm]

    @property
    def name(self) -> str:
        return self.id.value


def _brackets(gid: GeometryId, p: GeometryParams) -> dict:
    if gid is GeometryId.TORUS:
        return {}
    if gid is GeometryId.HYPERELLIPTIC:
        return {(H1, H2): (1, 0, 0, 0), (H1, A2): (-1, 0, 0, 0)}
    if gid is GeometryId.HOPF:
        al = p.alpha
        return {
            (H1, H2): (0, 1, 0, 0),
            (H1, A2): (0, 0, 0, -1),
            (H2, A2): (1j * al - 1, 0, 1j * al + 1, 0),
        }
    if gid is GeometryId.PROPERLY_ELLIPTIC:
        al = p.alpha
        return {
            (H1, H2): (1j, 0, 0, 0),
            (H1, A2): (1j, 0, 0, 0),
            (H1, A1): (0, 1j - al, 0, 1j + al),
        }
    if gid is GeometryId.KODAIRA_NIL:
        return {(H1, A1): (0, 1j, 0, 1j)}
    if gid is GeometryId.KODAIRA_NIL_SEMIDIRECT:
        e = p.epsilon
        return {
            (H1, H2): (e, 0, 0, 0),
            (H1, A2): (-e, 0, 0, 0),
            (H1, A1): (0, -1j * e, 0, -1j * e),
        }
    if gid is GeometryId.INOUE_SOLVABLE:
        lam, a = p.lam, p.a
        return {
            (H1, H2): (lam, 0, 0, 0),
            (H1, A2): (-lam, 0, 0, 0),
            (H2, A2): (0, 2j * a, 0, 2j * a),
        }
    if gid is GeometryId.SOL1:
        return {
            (H1, H2): (0, -1, 0, 0),
            (H1, A2): (0, -1, 0, 0),
            (H1, A1): (-1, 0, 1, 0),
        }
    if gid is GeometryId.SOL1_PRIME:
        return {
            (H1, H2): (0, -1, 0, 0),
            (H1, A2): (0, -1, 0, 0),
            (H1, A1): (-1, 1, 1, -1),
        }
    raise GeometryError(f"unknown geometry {gid!r}")


def _coframe(gid: GeometryId, p: GeometryParams) -> tuple[dict, dict]:
    """``(d zeta^1, d zeta^2)`` as printed for each adapted frame."""
    if gid is GeometryId.TORUS:
        return {}, {}
    if gid is GeometryId.HYPERELLIPTIC:
        return {"12": -1, "12b": 1}, {}
    if gid is GeometryId.HOPF:
        return {"22b": 1 - 1j * p.alpha}, {"12": -1, "21b": -1}
    if gid is GeometryId.PROPERLY_ELLIPTIC:
        return {"12": -1j, "12b": -1j}, {"11b": p.alpha - 1j}
    if gid is GeometryId.KODAIRA_NIL:
        return {}, {"11b": -1j}
    if gid is GeometryId.KODAIRA_NIL_SEMIDIRECT:
        e = p.epsilon
        return {"12": -e, "12b": e}, {"11b": 1j * e}
    if gid is GeometryId.INOUE_SOLVABLE:
        lam = p.lam
        return {"12": -lam, "12b": lam}, {"22b": -2j * p.a}
    if gid is GeometryId.SOL1:
        return {"11b": 1}, {"12": 1, "12b": 1}
    if gid is GeometryId.SOL1_PRIME:
        return {"11b": 1}, {"11b": -1, "12b": 1, "12": 1}
    raise GeometryError(f"unknown geometry {gid!r}")


def verify_coframe(spec: GeometrySpec, tol: float = COFRAME_TOL) -> list[str]:
    """Compare the catalog coframe differentials with those implied by the brackets."""
    report = []
    for k in (0, 1):
        unit = np.zeros(4, dtype=complex)
        unit[k] = 1
        implied = exterior_derivative(spec.constants, unit).components
        err = float(np.max(np.abs(implied - spec.coframe[k].components)))
        if err > tol:
            report.append(f"coframe: d zeta^{k + 1} mismatch {err:.3e}")
    return report


def build_geometry(gid: "GeometryId | str", params: GeometryParams | None = None) -> GeometrySpec:
    gid = GeometryId.parse(gid)
    p = _normalize_params(gid, params)
    constants = StructureConstants.from_brackets(_brackets(gid, p))
    d1, d2 = _coframe(gid, p)
    spec = GeometrySpec(
        id=gid,
        params=p,
        constants=constants,
        coframe=(InvariantTwoForm.from_terms(d1), InvariantTwoForm.from_terms(d2)),
    )
    problems = check_structure_constants(constants) + verify_coframe(spec)
    if problems:
        raise GeometryError(f"{gid.value}: " + "; ".join(problems))
    return spec


def all_geometries() -> list[GeometrySpec]:
    """One spec per catalog entry, with default parameters."""
    return [build_geometry(gid) for gid in GeometryId]
