"""Bismut-Ricci form of left-invariant Hermitian metrics.

A left-invariant metric is ``omega = i (x z^{11b} + y z^{22b} + z z^{12b} + conj(z) z^{21b})``
with ``x = g(Z1, conj Z1)``, ``y = g(Z2, conj Z2)``, ``z = g(Z1, conj Z2)``.
Its Bismut-Ricci form is ``d eta`` where, with ``g^{jb k}`` the inverse metric,

    eta_i = i c_{ij}^j - i g^{jb k} c_{k jb}^{lb} g_{i lb}

and ``j, k, l`` range over the holomorphic indices.  :func:`closed_form_ricci`
holds the per-geometry expressions written out by hand; the two must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import GeometryId, GeometrySpec
from .forms import InvariantOneForm, InvariantTwoForm, exterior_derivative


class InadmissibleMetricError(ValueError):
    """The coefficients do not define a positive-definite Hermitian metric."""


@dataclass(frozen=True)
class MetricCoefficients:
    x: float
    y: float
    z: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", complex(self.z))
        if not (np.isfinite(self.x) and np.isfinite(self.y) and np.isfinite(self.z)):
            raise InadmissibleMetricError(f"non-finite metric coefficients {self}")
        if self.x <= 0 or self.y <= 0 or self.det <= 0:
            raise InadmissibleMetricError(
                f"need x > 0, y > 0, xy - |z|^2 > 0; got x={self.x}, y={self.y}, z={self.z}"
            )

    @property
    def det(self) -> float:
        return self.x * self.y - abs(self.z) ** 2

    def matrix(self) -> np.ndarray:
        """``G[i, l] = g(Z_i, conj Z_l)``."""
        return np.array([[self.x, self.z], [np.conj(self.z), self.y]], dtype=complex)

    def scaled(self, k: float) -> "MetricCoefficients":
        return MetricCoefficients(k * self.x, k * self.y, k * self.z)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z.real, self.z.imag])

    @classmethod
    def from_vector(cls, u) -> "MetricCoefficients":
        return cls(u[0], u[1], complex(u[2], u[3]))


@dataclass(frozen=True)
class MetricInverse:
    """Components ``g^{jb k}`` with ``sum_k g^{jb k} g_{k lb} = delta_jl``."""

    g1b1: float
    g2b2: float
    g1b2: complex
    g2b1: complex

    def matrix(self) -> np.ndarray:
        """``H[j, k] = g^{jb k}``."""
        return np.array([[self.g1b1, self.g1b2], [self.g2b1, self.g2b2]], dtype=complex)


def metric_inverse(g: MetricCoefficients) -> MetricInverse:
    d = g.det
    if not d > 0:
        raise InadmissibleMetricError(f"degenerate metric, xy - |z|^2 = {d}")
    return MetricInverse(g1b1=g.y / d, g2b2=g.x / d, g1b2=-g.z / d, g2b1=-np.conj(g.z) / d)


def compute_eta(spec: GeometrySpec, g: MetricCoefficients) -> InvariantOneForm:
    c = spec.constants.c
    G = g.matrix()
    H = metric_inverse(g).matrix()
    trace = np.einsum("ijj->i", c[:2, :2, :2])
    mixed = c[:2, 2:, 2:]  # mixed[k, j, l] = c_{k jb}^{lb}
    contraction = np.einsum("jk,kjl,il->i", H, mixed, G)
    eta = 1j * trace - 1j * contraction
    return InvariantOneForm(complex(eta[0]), complex(eta[1]))


def bismut_ricci(spec: GeometrySpec, g: MetricCoefficients) -> InvariantTwoForm:
    # spec constants were validated by build_geometry
    form = exterior_derivative(spec.constants, compute_eta(spec, g).full())
    return InvariantTwoForm(form.components, real=True)


def _from_eta_and_frame(spec: GeometrySpec, eta1: complex, eta2: complex) -> InvariantTwoForm:
    """``eta1 d zeta^1 + eta2 d zeta^2 + conjugates`` using the catalog coframe."""
    d1, d2 = spec.coframe
    return (d1.scale(eta1) + d2.scale(eta2)).plus_conjugate()


def closed_form_ricci(spec: GeometrySpec, g: MetricCoefficients) -> InvariantTwoForm:
    """Hand-derived Bismut-Ricci form for each catalog geometry."""
    x, y, z = g.x, g.y, g.z
    zb = np.conj(z)
    n2 = abs(z) ** 2
    D = g.det
    gid = spec.id
    T = InvariantTwoForm.from_terms

    if gid is GeometryId.TORUS:
        return InvariantTwoForm.zero()
    if gid is GeometryId.HYPERELLIPTIC:
        k = 1j * z * x / D
        return T({"12": -k, "12b": k}).plus_conjugate()
    if gid is GeometryId.HOPF:
        al = spec.params.alpha
        eta1 = (al * x**2 + 1j * (x * y - x**2 - 2 * n2)) / D
        k = (-al * x * zb + 1j * zb * (x + y)) / D
        return T({"22b": (1 - 1j * al) * eta1, "12": k, "21b": k}).plus_conjugate()
    if gid is GeometryId.PROPERLY_ELLIPTIC:
        al = spec.params.alpha
        k = (-al * y * z + 1j * z * (x - y)) / D
        diag = (al - 1j) * (x * y + y**2 - 2 * n2 - 1j * al * y**2) / D
        return T({"12": k, "12b": k, "11b": diag}).plus_conjugate()
    if gid is GeometryId.KODAIRA_NIL:
        return T({"11b": -1j * y**2 / D}).plus_conjugate()
    if gid is GeometryId.KODAIRA_NIL_SEMIDIRECT:
        k = (-y * z + 1j * x * z) / D
        diag = (x * y - 2 * n2 - 1j * y**2) / D
        return T({"12": -k, "12b": k, "11b": diag}).plus_conjugate()
    if gid is GeometryId.INOUE_SOLVABLE:
        a, lam = spec.params.a, spec.params.lam
        lamb = np.conj(lam)
        k = (2 * a * z * x + 1j * lamb * z * x) / D
        diag = (2 * a * (lam + lamb) * n2 + (-4j * a**2 - 2 * a * lam) * x * y) / D
        return T({"12": -lam * k, "12b": lam * k, "22b": diag}).plus_conjugate()
    if gid in (GeometryId.SOL1, GeometryId.SOL1_PRIME):
        # (1,1) part written out; the (2,0) part follows from eta and the coframe
        s = z + zb
        if gid is GeometryId.SOL1:
            eta1 = -1j * (2 * x * y - n2 - z**2) / D
            eta2 = -1j * y * (zb - z) / D
            r11 = -1j * (4 * x * y - s**2) / D
            r12 = -1j * y * (zb - z) / D
        else:
            eta1 = -1j * (2 * x * y - y * z - n2 - z**2) / D
            eta2 = -1j * (y * (zb - z) - y**2) / D
            r11 = -1j * (4 * x * y - y * s - s**2 + 2 * y**2) / D
            r12 = -1j * (y * (zb - z) - y**2) / D
        r20 = _from_eta_and_frame(spec, eta1, eta2)["12"]
        return InvariantTwoForm.from_terms(
            {"12": r20, "11b": r11, "22b": 0, "12b": r12, "21b": -np.conj(r12), "1b2b": np.conj(r20)},
            real=True,
        )
    raise ValueError(f"no closed form for {gid!r}")
