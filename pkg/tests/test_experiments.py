from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest
from scipy import integrate, stats

from rmtlab.complexity import default_gate_set
from rmtlab.ensembles import EnsembleSpec, Kind, sample_hamiltonian, stream
from rmtlab.experiments import (
    ESCAPE_COLUMNS,
    diagonal_ball_diamond_probe,
    escape_curve,
    escape_scaling_fit,
    escape_time,
    jump_figure,
    loglog_slope,
    state_escape_curve,
    torus_ball_measure,
    wrapped_gaussian_ball,
)
from rmtlab.linalg import eig_hermitian, evolve
from rmtlab.metrics import trace_distance_states


def wrapped_oracle(t, c, eps):
    """Integrate the N(0, t^2) density over every lift of the arc ``|phase + c| < eta``."""
    eta = 2 * math.asin(eps / 2)
    total = 0.0
    for k in range(-40, 41):
        lo, hi = -c - eta + 2 * math.pi * k, -c + eta + 2 * math.pi * k
        total += integrate.quad(stats.norm(scale=abs(t)).pdf, lo, hi)[0]
    return total


def test_escape_time_interpolation():
    t = [0.0, 1.0, 2.0, 3.0]
    assert escape_time(t, [1.0, 0.8, 0.4, 0.1]) == pytest.approx(1.75)
    assert escape_time(t, [1.0, 1.0, 1.0, 0.9]) is None
    assert escape_time(t, [0.3, 0.2, 0.1, 0.0]) == 0.0
    # 0.5 itself is not below the level, so the crossing lies in [1, 2]
    assert escape_time(t, [1.0, 0.5, 0.4, 0.1]) == pytest.approx(1.0)


def test_escape_time_level_exactly():
    assert escape_time([0, 1, 2], [1.0, 0.5, 0.3]) == pytest.approx(1.0)


@pytest.mark.parametrize("metric", ["diamond", "opnorm", "hs"])
def test_two_level_stay_probability_matches_closed_form(metric):
    # DiagGaussian d = 2: the relative phase is N(0, 2 t^2), distance depends only on it
    spec = EnsembleSpec.diag_gaussian(2)
    eps = 0.4
    grid = [0.0, 0.1, 0.3, 1.0]
    curve = escape_curve(spec, eps, metric, grid, 4000, seed=1)
    for t, p, se in zip(grid, curve.stay, curve.stderr):
        # largest relative-phase arc inside the ball, turned into a chord radius
        arc = {
            "diamond": 2 * math.asin(eps / 2),  # 2 sin(arc/2) <= eps
            "opnorm": 4 * math.asin(eps / 2),  # 2 sin(arc/4) <= eps
            "hs": 4 * math.asin(eps / (2 * math.sqrt(2))),  # 2 sqrt(2) sin(arc/4) <= eps
        }[metric]
        ball = 2 * math.sin(arc / 2)
        exact = 1.0 if t == 0 else wrapped_oracle(math.sqrt(2) * t, 0.0, ball)
        assert abs(p - exact) <= 4 * max(se, math.sqrt(exact * (1 - exact) / 4000)) + 1e-12


def test_escape_curve_rows_and_validation():
    spec = EnsembleSpec.gue(8, seed=3)
    c = escape_curve(spec, 0.3, "diamond", [0.0, 0.05, 0.5], 200)
    assert c.seed == 3 and c.stay[0] == 1.0
    rows = list(csv.DictReader(io.StringIO(c.to_csv())))
    assert list(rows[0]) == ESCAPE_COLUMNS
    assert rows[0]["ensemble"] == "GUE" and rows[0]["streams"] == "0:200"
    with pytest.raises(ValueError):
        escape_curve(spec, 0.3, "diamond", [0.0], 50)
    with pytest.raises(ValueError):
        escape_curve(spec, 0.3, "trace", [0.0], 200)


def test_escape_curve_jobs_invariant():
    spec = EnsembleSpec.gue(6)
    a = escape_curve(spec, 0.3, "diamond", np.linspace(0, 0.2, 9), 120, seed=4, jobs=1)
    b = escape_curve(spec, 0.3, "diamond", np.linspace(0, 0.2, 9), 120, seed=4, jobs=3)
    assert np.array_equal(a.stay, b.stay)


def test_loglog_slope_exact_power_law():
    x = np.array([0.1, 0.2, 0.4, 0.8])
    s, lo, hi = loglog_slope(x, 3 * x**1.5)
    assert s == pytest.approx(1.5) and hi - lo < 1e-9
    s, lo, hi = loglog_slope([1, 2], [1, 4])
    assert s == pytest.approx(2) and math.isinf(lo)


def test_scaling_fit_gue_linear_in_eps():
    fit = escape_scaling_fit("gue", [0.1, 0.2, 0.4], [16, 32], 150, seed=5)
    for d in (16, 32):
        slope, lo, hi = fit.slopes[d]
        assert 0.85 < slope < 1.15
    assert set(fit.collapse) == {0.1, 0.2, 0.4}
    assert all(len(v["values"]) == 2 for v in fit.collapse.values())
    assert len(fit.rows()) == 6
    with pytest.raises(ValueError):
        escape_scaling_fit(Kind.GUE, [0.1], [4], 10, 0)


def test_state_escape_curve_matches_direct_evolution():
    spec = EnsembleSpec.gue(6)
    grid = [0.0, 0.4, 1.5]
    eps = 0.5
    c = state_escape_curve(spec, eps, grid, 100, seed=6)
    assert c.stay[0] == 1.0 and c.metric == "trace"
    psi0 = np.eye(6)[0]
    direct = np.zeros(len(grid))
    for i in range(100):
        s = eig_hermitian(sample_hamiltonian(spec, stream(6, i)))
        for j, t in enumerate(grid):
            direct[j] += trace_distance_states(evolve(s, t) @ psi0, psi0) <= eps
    assert np.array_equal(c.stay, direct / 100)


@pytest.mark.parametrize("t,c,eps", [(0.3, 0.0, 0.2), (1.0, 0.5, 0.1), (4.0, -2.0, 0.3), (0.05, 3.0, 0.5)])
def test_wrapped_gaussian_vs_quadrature(t, c, eps):
    # the ball around e^{ic} in the phase -lambda t means |(-lambda t) - c| < eta mod 2 pi
    assert wrapped_gaussian_ball(t, c, eps) == pytest.approx(wrapped_oracle(t, c, eps), abs=1e-9)


def test_wrapped_gaussian_edge_cases():
    assert wrapped_gaussian_ball(1.0, 0.0, 2.5) == 1.0
    assert wrapped_gaussian_ball(0.0, 0.0, 0.1) == 1.0
    assert wrapped_gaussian_ball(0.0, math.pi, 0.1) == 0.0


def test_torus_ball_d1_exact_and_d2_product():
    est = torus_ball_measure(1, 0.7, [0.4], 0.3, 200_000, seed=7)
    assert abs(est.estimate - est.exact) < 4 * est.stderr
    est2 = torus_ball_measure(2, 0.7, [0.4, -0.2], 0.6, 200_000, seed=8)
    exact = wrapped_gaussian_ball(0.7, 0.4, 0.6) * wrapped_gaussian_ball(0.7, -0.2, 0.6)
    assert est2.exact is None
    assert abs(est2.estimate - exact) < 4 * est2.stderr
    with pytest.raises(ValueError):
        torus_ball_measure(7, 1.0, None, 0.1, 10, 0)
    with pytest.raises(ValueError):
        torus_ball_measure(2, 1.0, [0.0], 0.1, 10, 0)


def test_torus_ball_volume_scaling_long_time():
    # at large t the phases are near uniform: measure ~ (eta/pi)^d
    for d in (1, 2, 3):
        eps = 0.8
        est = torus_ball_measure(d, 30.0, None, eps, 200_000, seed=9)
        ref = (2 * math.asin(eps / 2) / math.pi) ** d
        assert abs(est.estimate - ref) < 4 * est.stderr + 1e-3


def test_diamond_probe_long_time_d2():
    eps = 0.5
    est = diagonal_ball_diamond_probe(2, 30.0, None, eps, 200_000, seed=10)
    ref = 2 * math.asin(eps / 2) / math.pi
    assert abs(est.estimate - ref) < 4 * est.stderr + 1e-3


def test_jump_figure_bundle(tmp_path):
    spec = EnsembleSpec.gue(2)
    kw = dict(eps=0.3, t_grid=[0.0, 0.5, 2.0], n=100, seed=11, max_len=5)
    a = jump_figure(spec, default_gate_set(), kw["eps"], kw["t_grid"], kw["n"], kw["seed"], tmp_path / "a", max_len=5)
    b = jump_figure(spec, default_gate_set(), kw["eps"], kw["t_grid"], kw["n"], kw["seed"], tmp_path / "b", max_len=5)
    assert set(a) == {"escape", "complexity", "balls", "manifest"}
    for k in a:
        assert a[k].read_bytes() == b[k].read_bytes()
    man = dict(line.split(" = ", 1) for line in a["manifest"].read_text().splitlines())
    assert man["seed"] == "11" and man["member.balls"] == "balls.csv"
    comp = [r for r in csv.reader(line for line in a["complexity"].read_text().splitlines() if not line.startswith("#"))]
    assert comp[0][:4] == ["t", "median_complexity", "frac_zero", "frac_exceeds"]
    assert float(comp[1][2]) == 1.0  # everything has complexity zero at t = 0
    # without a gate set only the escape panel is written
    c = jump_figure(EnsembleSpec.gue(8), None, 0.3, [0.0, 0.1], 100, 1, tmp_path / "c")
    assert set(c) == {"escape", "manifest"}
