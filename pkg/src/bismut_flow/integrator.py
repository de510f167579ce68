"""Dormand-Prince 5(4) integrator with PI step control and an admissibility guard.

Kept separate from the flow equations so it can be exercised on toy problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Dormand & Prince (1980) coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_HAT = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_HAT

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
# PI controller exponents (Gustafsson / Hairer-Wanner II.4)
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA


class IntegrationError(RuntimeError):
    """Integration stopped early; ``t`` and ``u`` hold the last accepted state."""

    def __init__(self, message: str, t: float, u: np.ndarray, result: "OdeResult | None" = None):
        super().__init__(message)
        self.t = t
        self.u = u
        self.result = result


@dataclass
class OdeResult:
    t: np.ndarray
    u: np.ndarray
    steps: int = 0
    rejected: int = 0
    guard_rejections: int = 0
    evaluations: int = 0
    stats: dict = field(default_factory=dict)


# continuous extension of order 4 (Hairer, Norsett & Wanner, DOPRI5 "contd5")
_D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799, -10690763975 / 1880347072,
    701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423,
])


def _dense(u0, u1, k, h, theta):
    diff = u1 - u0
    bspl = h * k[0] - diff
    r4 = diff - h * k[6] - bspl
    r5 = h * (_D @ k)
    th1 = 1 - theta
    return u0 + theta * (diff + th1 * (bspl + theta * (r4 + th1 * r5)))


def _initial_step(f, t0, u0, f0, rtol, atol, t_end):
    """Starting step size after Hairer, Norsett & Wanner (II.4)."""
    scale = atol + rtol * np.abs(u0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        d0 = np.sqrt(np.mean((u0 / scale) ** 2))
        d1 = np.sqrt(np.mean((f0 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 or not np.isfinite(d0 / d1) else 0.01 * d0 / d1
        h0 = min(h0, t_end - t0)
        try:
            f1 = f(t0 + h0, u0 + h0 * f0)
        except ValueError:
            return h0 * 1e-3
        d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    dmax = max(d1, d2)
    if not np.isfinite(dmax):
        return h0
    h1 = max(1e-6, h0 * 1e-3) if dmax <= 1e-15 else (0.01 / dmax) ** 0.2
    return min(100 * h0, h1, t_end - t0)


def dopri54(
    f: Callable[[float, np.ndarray], np.ndarray],
    u0,
    t_end: float,
    sample_times,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 200_000,
    admissible: Callable[[np.ndarray], bool] | None = None,
    t0: float = 0.0,
    track: Callable[[np.ndarray], float] | None = None,
    interpolate: bool = True,
) -> OdeResult:
    """Integrate ``u' = f(t, u)`` from ``t0`` to ``t_end``.

    ``sample_times`` must be increasing and lie in ``[t0, t_end]``; states at
    those times come from the 4th-order continuous extension of each accepted step.
    A trial step whose result fails ``admissible`` (or at which ``f`` raises
    ``ValueError``) is rejected and the step size halved.  ``track`` is
    minimised over all accepted states and reported as ``stats["track_min"]``.

    With ``interpolate=False`` steps are shortened to land on each sample time,
    so samples carry the full accuracy of the method instead of the
    4th-order interpolant.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    samples = np.asarray(sample_times, dtype=float)
    if samples.size and (np.any(np.diff(samples) <= 0) or samples[0] < t0 or samples[-1] > t_end):
        raise ValueError("sample_times must be strictly increasing within [t0, t_end]")

    u = np.array(u0, dtype=float)
    t = float(t0)
    fu = f(t, u)
    out_u = np.empty((samples.size, u.size))
    n_out = 0
    while n_out < samples.size and samples[n_out] == t:
        out_u[n_out] = u
        n_out += 1

    h = _initial_step(f, t, u, fu, rtol, atol, t_end)
    err_old = 1e-4
    steps = rejected = guard = evals = 0
    k = np.empty((7, u.size))
    track_min = track(u) if track else float("nan")

    def partial(msg):
        res = OdeResult(samples[:n_out], out_u[:n_out].copy(), steps, rejected, guard, evals,
                        {"track_min": track_min})
        return IntegrationError(msg, t, u.copy(), res)

    while t < t_end:
        if steps + rejected >= max_steps:
            raise partial(f"max_steps={max_steps} exceeded at t={t:.6g}")
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise partial(f"step size underflow at t={t:.6g}")
        target = None  # exact end point of this step, if pinned
        if t + h >= t_end:
            target, h = t_end, t_end - t
        h_free = h
        if not interpolate and n_out < samples.size and t + h >= samples[n_out]:
            target, h = samples[n_out], samples[n_out] - t

        k[0] = fu
        ok = True
        try:
            for s in range(1, 7):
                k[s] = f(t + _C[s] * h, u + h * (np.dot(_A[s], k[:s])))
            evals += 6
        except ValueError:
            ok = False
        if ok:
            u_new = u + h * (_B @ k)
            ok = bool(np.all(np.isfinite(u_new))) and (admissible is None or admissible(u_new))
        if not ok:
            guard += 1
            rejected += 1
            h *= 0.5
            continue

        err_vec = h * (_E @ k) / (atol + rtol * np.maximum(np.abs(u), np.abs(u_new)))
        err = float(np.sqrt(np.mean(err_vec**2)))
        if err > 1.0:
            rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err**-0.2)
            continue

        t_new = t + h if target is None else target
        f_new = k[6].copy()  # FSAL; k is reused next step
        while n_out < samples.size and samples[n_out] <= t_new:
            ts = samples[n_out]
            out_u[n_out] = u_new if ts == t_new else _dense(u, u_new, k, h, (ts - t) / h)
            n_out += 1

        steps += 1
        t, u, fu = t_new, u_new, f_new
        if track:
            track_min = min(track_min, track(u))
        err = max(err, 1e-10)
        factor = SAFETY * err**-EXPO * err_old**BETA
        h_next = h * min(MAX_FACTOR, max(MIN_FACTOR, factor))
        # a step shortened to hit a sample says little about the natural step size
        h = max(h_next, h_free) if h < h_free else h_next
        err_old = err

    return OdeResult(samples, out_u, steps, rejected, guard, evals, {"track_min": track_min})
