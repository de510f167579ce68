import numpy as np
import pytest

from bismut_flow.analysis import (
    InsufficientSamplesError,
    RealFrameForm,
    blowdown_limit,
    blowdown_sample_times,
    blowdown_weights,
    decay_rate,
    estimate_asymptotics,
    fit_coefficient,
    gh_limit,
    log_growth_bound,
    run_blowdown,
    soliton_check,
    to_real_frame,
)
from bismut_flow.catalog import GeometryId, GeometryParams, build_geometry
from bismut_flow.curvature import MetricCoefficients
from bismut_flow.flow import IntegratorOptions, integrate, solve_default
from bismut_flow.validation import random_metrics

M = MetricCoefficients


def test_real_frame_examples():
    assert to_real_frame(M(1, 1, 0)) == RealFrameForm(0.5, 0.5, 0, 0, 0, 0)
    assert to_real_frame(M(2, 3, 0)).as_array() == pytest.approx([1, 1.5, 0, 0, 0, 0])
    f = to_real_frame(M(1, 1, 0.5j))
    assert (f.s13, f.s24, f.s14, f.s23) == (-0.25, -0.25, 0, 0)
    f = to_real_frame(M(1, 1, 0.5))
    assert f.s14 == 0.25 == -f.s23


# --- growth fits


def test_fit_classifies_known_curves():
    t = np.geomspace(1e-2, 1e4, 200)
    w = (1e3, 1e4)
    assert fit_coefficient(t, 3 + 2 * t, w).kind == "linear"
    fit = fit_coefficient(t, 1 + 5 * np.sqrt(t), w)
    assert fit.kind == "sqrt" and fit.value == pytest.approx(5)
    assert fit_coefficient(t, 2 + np.log(t), w).kind == "log_bounded"
    assert fit_coefficient(t, np.full_like(t, 7.0), w).kind == "constant"
    fit = fit_coefficient(t, np.exp(-0.3 * t) + 1e-300, w, floor=1e-9)
    assert fit.kind == "exp_decay" and fit.value == pytest.approx(0.3, rel=1e-6)


def test_fit_needs_samples():
    t = np.geomspace(1, 1e4, 10)
    with pytest.raises(InsufficientSamplesError):
        fit_coefficient(t, t, (1e3, 1e4))


def test_asymptotics_needs_two_decades():
    traj = integrate(build_geometry("sol1"), M(1, 1, 0), IntegratorOptions(t_end=1.0, sample_times=(0.5, 1.0)))
    with pytest.raises(InsufficientSamplesError):
        estimate_asymptotics(traj)


def test_properly_elliptic_slope():
    traj = solve_default(build_geometry("properly-elliptic", GeometryParams(alpha=1.0)), M(1, 1, 0))
    fit = estimate_asymptotics(traj)["x"]
    assert fit.kind == "linear" and 1.98 <= fit.value <= 2.02
    assert estimate_asymptotics(traj)["y"].kind == "constant"


def test_semidirect_sqrt_coefficient():
    traj = solve_default(build_geometry("kodaira-nil-semidirect"), M(1, 1, 0.1))
    fit = estimate_asymptotics(traj)["x"]
    assert fit.kind == "sqrt" and 1.98 <= fit.value <= 2.02


def test_hyperelliptic_decay_rate():
    traj = solve_default(build_geometry("hyperelliptic"), M(1, 1, 0.5))
    fit = estimate_asymptotics(traj)["abs_z"]
    assert fit.kind == "exp_decay" and fit.value >= 1 - 0.05


# --- GH limits


def test_gh_inoue_circle():
    traj = solve_default(build_geometry("inoue", GeometryParams(a=1.0, b=0.0)), M(1, 1, 0))
    lim = gh_limit(traj)
    assert lim.kind == "circle" and lim.value == pytest.approx(np.sqrt(6), rel=0.01)


def test_gh_properly_elliptic_base():
    lim = gh_limit(solve_default(build_geometry("properly-elliptic"), M(2, 1, 0)))
    assert lim.kind == "base-curve" and lim.value == pytest.approx(2, rel=0.01)


def test_gh_torus_point():
    lim = gh_limit(integrate(build_geometry("torus"), M(1, 2, 0.5), IntegratorOptions(t_end=1e4)))
    assert lim.kind == "point" and lim.value == pytest.approx(2e-4)


def test_gh_hopf_fixed():
    traj = integrate(build_geometry("hopf", GeometryParams(alpha=2.0)), M(1, 1.5, 0.2), IntegratorOptions(t_end=100))
    lim = gh_limit(traj)
    assert lim.kind == "fixed" and lim.value == pytest.approx(5, abs=1e-6)


@pytest.mark.parametrize("gid,lam,kind,factor", [
    ("sol1", 3.0, "plus", np.sqrt(2)),
    ("sol1", 3.0, "minus", 2 * np.sqrt(2)),
    ("sol1-prime", 0.5, "plus", np.sqrt(2)),
])
def test_gh_sol_circle(gid, lam, kind, factor):
    traj = solve_default(build_geometry(gid), M(2, 1, 0.5))
    lim = gh_limit(traj, lambda_quotient=lam, inoue_type=kind)
    assert lim.target == pytest.approx(factor * abs(np.log(lam)))
    assert lim.value == pytest.approx(lim.target, rel=0.01)


def test_gh_sol_requires_quotient():
    traj = integrate(build_geometry("sol1"), M(1, 1, 0), IntegratorOptions(t_end=10))
    with pytest.raises(ValueError, match="lambda_quotient"):
        gh_limit(traj)
    for bad in (1.0, -2.0):
        with pytest.raises(ValueError):
            gh_limit(traj, lambda_quotient=bad)
    prime = integrate(build_geometry("sol1-prime"), M(2, 1, 1), IntegratorOptions(t_end=10))
    with pytest.raises(ValueError):
        gh_limit(prime, lambda_quotient=2.0, inoue_type="minus")


# --- Hopf, Sol1', Inoue properties


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_hopf_exponential_convergence(alpha):
    spec = build_geometry("hopf", GeometryParams(alpha=alpha))
    finals = []
    for g in random_metrics(np.random.default_rng(int(alpha)), 5):
        g0 = M(1.0, g.y, g.z * np.sqrt(1.0 / g.x))  # common x0 = 1, still admissible
        traj = integrate(spec, g0, IntegratorOptions(t_end=100, sample_times=tuple(np.linspace(0.5, 100, 200))))
        dev = np.abs(traj.y - (1 + alpha**2))
        rate, _ = decay_rate(traj.t, dev, floor=1e-9)
        assert rate > 0
        finals.append(traj.y[-1])
    assert np.ptp(finals) <= 1e-6


def test_sol1_prime_log_bound():
    traj = solve_default(build_geometry("sol1-prime"), M(2, 1, 1))
    A, B = log_growth_bound(traj.t, traj.z, t_min=10)
    assert np.isfinite(A) and np.isfinite(B)
    m = traj.t >= 10
    assert np.all(np.abs(traj.z[m]) <= A + B * np.log1p(traj.t[m]) + 1e-12)


def test_inoue_z_bounded():
    traj = solve_default(build_geometry("inoue", GeometryParams(a=0.5, b=1.0)), M(1, 1, 0.4 + 0.3j))
    assert np.all(np.diff(np.abs(traj.z)) <= 1e-15)
    assert np.max(np.abs(traj.z)) == pytest.approx(0.5)


# --- blowdown


def test_weights():
    assert blowdown_weights("hyperelliptic").w == (0.5, 0.5, 0.5, 0.5)
    assert blowdown_weights(GeometryId.KODAIRA_NIL).w == (0.25, 0.25, 0.5, 0.5)
    assert blowdown_weights("inoue").w == (0.5, 0.5, 0, 0)
    assert blowdown_weights("torus").w == (0.5, 0.5, 0.5, 0.5)
    assert blowdown_weights("sol1").exponent(0, 1) == -1
    with pytest.raises(ValueError):
        blowdown_weights("hopf")


def test_hyperelliptic_blowdown():
    res = run_blowdown(build_geometry("hyperelliptic"), M(1, 2, 0.5), s_values=(1e1, 1e2, 1e3))
    assert res.errors[1e3] <= 1e-3
    assert res.limit[:, :2] == pytest.approx(np.array([[0.5, 1.0]] * 3), abs=1e-3)
    assert soliton_check(res, 2.0) <= 1e-10


def test_nil_blowdown_value():
    res = run_blowdown(build_geometry("kodaira-nil"), M(1, 1, 0), s_values=(1e2, 1e3), t_grid=(0.25, 1.0, 4.0))
    assert res.limit[1, 0] == pytest.approx(1.0, rel=0.01)
    assert soliton_check(res, 4.0) <= 1e-3


def test_sol1_blowdown():
    res = run_blowdown(build_geometry("sol1"), M(1, 1, 0.2), s_values=(1e2, 1e3), t_grid=(0.5, 1.0, 1.5, 3.0))
    assert res.errors[1e3] <= 0.01
    t = np.array(res.t_grid)
    assert res.limit[:, 0] == pytest.approx(2 * t, rel=0.01)
    assert res.limit[:, 1] == pytest.approx(0.5, rel=1e-9)
    assert soliton_check(res, 3.0) <= 1e-3


@pytest.mark.parametrize("gid,g0", [
    ("hyperelliptic", M(1, 2, 0.5)),
    ("kodaira-nil-semidirect", M(1, 1, 0.1)),
    ("inoue", M(1, 1, 0.3)),
])
def test_off_diagonal_vanishes(gid, g0):
    res = run_blowdown(build_geometry(gid), g0, s_values=(1e1, 1e2, 1e3))
    off = [res.off_diagonal[s] for s in res.s_values]
    assert off[-1] < 1e-2 and off[-1] < off[0]


def test_blowdown_converges_in_s():
    res = run_blowdown(build_geometry("properly-elliptic", GeometryParams(alpha=1.0)), M(1, 1, 0.2))
    errs = [res.errors[s] for s in res.s_values]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert res.error < 0.01


def test_blowdown_scaling_symmetry():
    # c g(t / c) is again a flow line, so the rescaled coefficients of c g0 at s are
    # those of g0 at s / c times c^(1 + exponent)
    spec = build_geometry("sol1-prime")
    c = 4.0
    a = run_blowdown(spec, M(2, 1, 1), s_values=(1e2,))
    b = run_blowdown(spec, M(2 * c, c, c), s_values=(c * 1e2,))
    factor = c ** (1 + a.weights.exponents())
    assert b.slices[c * 1e2] == pytest.approx(a.slices[1e2] * factor, rel=1e-7, abs=1e-12)


def test_blowdown_errors():
    spec = build_geometry("sol1")
    short = integrate(spec, M(1, 1, 0), IntegratorOptions(t_end=10))
    with pytest.raises(ValueError, match="needs"):
        blowdown_limit(short, (1e2,), (1.0,))
    with pytest.raises(ValueError, match="no samples"):
        blowdown_limit(short, (3.0,), (1.0, 3.3333))
    with pytest.raises(ValueError):
        blowdown_limit(short, (), (1.0,))
    hopf = integrate(build_geometry("hopf"), M(1, 1, 0), IntegratorOptions(t_end=10, sample_times=(10.0,)))
    with pytest.raises(ValueError):
        blowdown_limit(hopf, (10.0,), (1.0,))


def test_soliton_check_needs_pairs():
    res = run_blowdown(build_geometry("sol1"), M(1, 1, 0), s_values=(10.0,), t_grid=(0.5, 1.0))
    with pytest.raises(ValueError, match="pairs"):
        soliton_check(res, 3.0)
    with pytest.raises(ValueError):
        soliton_check(res, -1.0)


def test_soliton_check_rejects_wrong_scaling():
    res = run_blowdown(build_geometry("sol1"), M(1, 1, 0), s_values=(10.0,), t_grid=(0.5, 1.0))
    res.slices[res.s_max] = res.limit * np.array([[1.0], [1.0]])  # make s12 constant in t
    res.slices[res.s_max][:, 0] = 1.0
    with pytest.raises(ValueError, match="scales like"):
        soliton_check(res, 2.0)


def test_sample_times_cover_grid():
    ts = blowdown_sample_times((10, 100), (0.5, 1))
    assert ts == (5.0, 10.0, 50.0, 100.0)
