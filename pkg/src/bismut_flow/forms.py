"""Left-invariant complexified tensors on a 4-dimensional Lie algebra.

Everything is expressed in the basis ``Z1, Z2, conj(Z1), conj(Z2)`` of the
complexified Lie algebra and its dual coframe ``zeta^1, zeta^2, ...``.

Conventions
-----------
* ``zeta^{ab}`` evaluated on ``(e_a, e_b)`` is 1, so a 2-form ``F`` is stored
  by its values ``F(e_a, e_b)`` on the six ordered pairs ``a < b``.
* For an invariant 1-form ``theta``, ``d theta(A, B) = -theta([A, B])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

JACOBI_TOL = 1e-14


class BasisIndex(IntEnum):
    H1 = 0  # Z1
    H2 = 1  # Z2
    A1 = 2  # conj(Z1)
    A2 = 3  # conj(Z2)


_CONJ = (BasisIndex.A1, BasisIndex.A2, BasisIndex.H1, BasisIndex.H2)
_CONJ_PERM = np.array([int(i) for i in _CONJ])

# Ordered basis of 2-forms: zeta^{12}, zeta^{1 1b}, zeta^{1 2b}, zeta^{2 1b}, zeta^{2 2b}, zeta^{1b 2b}
PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_NAMES = ("12", "11b", "12b", "21b", "22b", "1b2b")
_PAIR_INDEX = {p: n for n, p in enumerate(PAIRS)}


def conjugate_index(a: BasisIndex) -> BasisIndex:
    return _CONJ[int(a)]


def pair_slot(a: int, b: int) -> tuple[int, int]:
    """Return ``(slot, sign)`` locating ``zeta^{ab}`` in the ordered 2-form basis."""
    if a == b:
        raise ValueError("zeta^{aa} vanishes")
    if a < b:
        return _PAIR_INDEX[(a, b)], 1
    return _PAIR_INDEX[(b, a)], -1


class StructureConstantsError(ValueError):
    """Raised when structure constants fail validation."""


@dataclass(frozen=True)
class StructureConstants:
    """Brackets ``[e_a, e_b] = sum_k c[a, b, k] e_k`` on the complexified basis."""

    c: np.ndarray

    def __post_init__(self):
        arr = np.array(self.c, dtype=complex)
        if arr.shape != (4, 4, 4):
            raise ValueError(f"structure constants must have shape (4, 4, 4), got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "c", arr)

    @classmethod
    def from_brackets(cls, brackets: dict[tuple[int, int], tuple]) -> "StructureConstants":
        """Fill in antisymmetry and conjugate brackets from a minimal list.

        ``brackets`` maps ``(a, b)`` to the components of ``[e_a, e_b]``.
        """
        c = np.zeros((4, 4, 4), dtype=complex)
        for (a, b), comps in brackets.items():
            v = np.asarray(comps, dtype=complex)
            ca, cb = int(_CONJ[a]), int(_CONJ[b])
            vbar = np.conj(v)[_CONJ_PERM]
            c[a, b], c[b, a] = v, -v
            c[ca, cb], c[cb, ca] = vbar, -vbar
        return cls(c)

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abk->k", u, v, self.c)

    def replace(self, a: int, b: int, value) -> "StructureConstants":
        """Copy with the single entry ``c[a, b]`` overwritten (no symmetrisation)."""
        arr = self.c.copy()
        arr[a, b] = np.asarray(value, dtype=complex)
        return StructureConstants(arr)


@dataclass(frozen=True)
class InvariantOneForm:
    """Real invariant 1-form ``eta1 zeta^1 + eta2 zeta^2 + conjugates``."""

    eta1: complex
    eta2: complex

    def full(self) -> np.ndarray:
        """Components on all four coframe elements."""
        return np.array([self.eta1, self.eta2, np.conj(self.eta1), np.conj(self.eta2)], dtype=complex)


@dataclass(frozen=True)
class InvariantTwoForm:
    """Coefficients of an invariant 2-form on the ordered basis :data:`PAIRS`."""

    components: np.ndarray
    real: bool = field(default=False)

    def __post_init__(self):
        arr = np.array(self.components, dtype=complex).reshape(6)
        arr.flags.writeable = False
        object.__setattr__(self, "components", arr)

    @classmethod
    def zero(cls, real: bool = True) -> "InvariantTwoForm":
        return cls(np.zeros(6, dtype=complex), real=real)

    @classmethod
    def from_terms(cls, terms: dict[str, complex], real: bool = False) -> "InvariantTwoForm":
        comps = np.zeros(6, dtype=complex)
        for name, value in terms.items():
            comps[PAIR_NAMES.index(name)] += value
        return cls(comps, real=real)

    def __getitem__(self, name: str) -> complex:
        return complex(self.components[PAIR_NAMES.index(name)])

    def coefficient(self, a: int, b: int) -> complex:
        """Value of the form on ``(e_a, e_b)``."""
        if a == b:
            return 0j
        slot, sign = pair_slot(a, b)
        return sign * complex(self.components[slot])

    def conjugate(self) -> "InvariantTwoForm":
        out = np.zeros(6, dtype=complex)
        for n, (a, b) in enumerate(PAIRS):
            slot, sign = pair_slot(int(_CONJ[a]), int(_CONJ[b]))
            out[slot] += sign * np.conj(self.components[n])
        return InvariantTwoForm(out, real=self.real)

    def plus_conjugate(self) -> "InvariantTwoForm":
        """``F + conj(F)``; diagonal ``zeta^{i ib}`` terms with imaginary coefficients double."""
        return InvariantTwoForm(self.components + self.conjugate().components, real=True)

    def reality_residual(self) -> float:
        return float(np.max(np.abs(self.components - self.conjugate().components)))

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.components))))
        return self.reality_residual() <= tol * scale

    def __add__(self, other: "InvariantTwoForm") -> "InvariantTwoForm":
        return InvariantTwoForm(self.components + other.components, real=self.real and other.real)

    def __sub__(self, other: "InvariantTwoForm") -> "InvariantTwoForm":
        return InvariantTwoForm(self.components - other.components, real=self.real and other.real)

    def scale(self, k: complex) -> "InvariantTwoForm":
        return InvariantTwoForm(self.components * k, real=self.real and np.isreal(k))


def check_structure_constants(c: StructureConstants, tol: float = JACOBI_TOL) -> list[str]:
    """Return a list of violated invariants; empty means the constants are valid."""
    arr = c.c
    report = []

    anti = np.max(np.abs(arr + arr.transpose(1, 0, 2)))
    if anti > tol:
        report.append(f"antisymmetry: max |c(a,b) + c(b,a)| = {anti:.3e}")

    # component k of c(conj a, conj b) == conj(component conj k of c(a, b))
    p = _CONJ_PERM
    reality = np.max(np.abs(arr[np.ix_(p, p)] - np.conj(arr[:, :, p])))
    if reality > tol:
        report.append(f"reality: max residual {reality:.3e}")

    # [[a,b],d] + [[b,d],a] + [[d,a],b]
    nested = np.einsum("abm,mdk->abdk", arr, arr)
    cyclic = nested + nested.transpose(1, 2, 0, 3) + nested.transpose(2, 0, 1, 3)
    jac = np.max(np.abs(cyclic))
    if jac > tol:
        report.append(f"jacobi: max residual {jac:.3e}")

    integ = np.max(np.abs(arr[:2, :2, 2:]))
    if integ > tol:
        report.append(f"integrability: [Z_i, Z_j] has antiholomorphic part {integ:.3e}")
    return report


def exterior_derivative(c: StructureConstants, theta: np.ndarray) -> InvariantTwoForm:
    """``d theta`` for an invariant complex 1-form with components ``theta`` on all four coframe elements."""
    theta = np.asarray(theta, dtype=complex)
    comps = np.array([-(c.c[a, b] @ theta) for a, b in PAIRS])
    return InvariantTwoForm(comps)


def d_one_form(c: StructureConstants, eta: InvariantOneForm) -> InvariantTwoForm:
    report = check_structure_constants(c)
    if report:
        raise StructureConstantsError("; ".join(report))
    form = exterior_derivative(c, eta.full())
    return InvariantTwoForm(form.components, real=True)


def one_one_part(form: InvariantTwoForm) -> InvariantTwoForm:
    comps = np.array(form.components)
    comps[PAIR_NAMES.index("12")] = 0
    comps[PAIR_NAMES.index("1b2b")] = 0
    return InvariantTwoForm(comps, real=form.real)
