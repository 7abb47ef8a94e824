from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest
from scipy import integrate, special

from rmtlab.ensembles import EnsembleSpec, Kind
from rmtlab.report import Check, ProbeReport, csv_text
from rmtlab.special import adaptive_simpson, bessel_j1
from rmtlab.spectral import (
    FORM_FACTOR_COLUMNS,
    FormFactorEstimate,
    check_variance_bounds,
    estimate_form_factor,
    form_factor_csv,
    gaussian_trace_variance,
    semicircle_charfn,
    semicircle_density,
    spectral_histogram,
    theory_mean,
    trace_concentration_tail,
)


def charfn_oracle(t: float, n: int = 20_001) -> float:
    """Trapezoid rule on ``(2/pi) int_{-pi/2}^{pi/2} cos^2(th) cos(2 t sin th) dth``."""
    th = np.linspace(-np.pi / 2, np.pi / 2, n)
    f = (2 / np.pi) * np.cos(th) ** 2 * np.cos(2 * t * np.sin(th))
    return float(np.sum((f[1:] + f[:-1]) / 2) * (th[1] - th[0]))


@pytest.mark.parametrize("x", [0.0, 1e-6, 0.5, 1.0, 3.8317, 7.0, 11.99, 12.01, 20.0, 55.5, 150.0, -4.2])
def test_bessel_j1_matches_scipy(x):
    assert bessel_j1(x) == pytest.approx(special.j1(x), abs=1e-11)


def test_bessel_j1_dense_sweep():
    xs = np.linspace(-80, 80, 4001)
    err = max(abs(bessel_j1(x) - special.j1(x)) for x in xs)
    assert err < 1e-11


def test_adaptive_simpson():
    assert adaptive_simpson(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert adaptive_simpson(lambda x: math.sqrt(abs(x)), -1, 1, tol=1e-10) == pytest.approx(4 / 3, abs=1e-8)
    assert adaptive_simpson(math.exp, 1, 1) == 0
    ref = integrate.quad(lambda x: math.exp(-x * x) * math.cos(5 * x), -4, 4)[0]
    assert adaptive_simpson(lambda x: math.exp(-x * x) * math.cos(5 * x), -4, 4) == pytest.approx(ref, abs=1e-9)


def test_semicircle_density_normalised():
    total = adaptive_simpson(semicircle_density, -2, 2, tol=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert semicircle_density(2.5) == 0 and semicircle_density(0) == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("t", [0.0, 1e-9, 0.3, 1.0, 2.4, 5.0, 9.0])
def test_semicircle_charfn_vs_oracle(t):
    assert semicircle_charfn(t) == pytest.approx(charfn_oracle(t), abs=1e-8)


def test_charfn_direct_integral():
    t = 1.7
    ref = integrate.quad(lambda x: semicircle_density(x) * math.cos(t * x), -2, 2)[0]
    assert semicircle_charfn(t) == pytest.approx(ref, abs=1e-9)


def test_theory_mean_scaling():
    spec = EnsembleSpec.gue(10, sigma2=0.4)
    assert theory_mean(spec, 1.0) == pytest.approx(semicircle_charfn(2.0))
    assert theory_mean(EnsembleSpec.diag_gaussian(4), 1.0) == pytest.approx(math.exp(-0.5))


@pytest.mark.parametrize("kind", list(Kind))
def test_form_factor_exact_at_zero(kind):
    spec = EnsembleSpec(kind, 6)
    (e,) = estimate_form_factor(spec, [0.0], 50, seed=1)
    assert e.mean == 1 and e.variance == pytest.approx(0, abs=1e-20)


def test_gue_mean_near_semicircle():
    spec = EnsembleSpec.gue(64)
    ests = estimate_form_factor(spec, [0.5, 1.0, 2.0, 3.0], 400, seed=2)
    for e in ests:
        # O(1/d^2) finite-size bias plus sampling error
        assert abs(e.mean.real - semicircle_charfn(e.t)) < 4 * e.std_error + 0.01
        assert abs(e.mean.imag) < 5 * e.std_error + 1e-3


@pytest.mark.parametrize("kind", [Kind.DIAG_GAUSSIAN, Kind.RANDOM_BASIS_GAUSSIAN])
def test_iid_models_exact_moments(kind):
    spec = EnsembleSpec(kind, 8)
    ests = estimate_form_factor(spec, [0.5, 1.0, 2.0], 4000, seed=3)
    for e in ests:
        assert abs(e.mean.real - math.exp(-e.t**2 / 2)) < 4 * e.std_error
        rel = e.variance / gaussian_trace_variance(e.t, 8) - 1
        assert abs(rel) < 5 * math.sqrt(2 / 3999) * 2  # variance of a non-Gaussian |.|^2 is wider
    rep = check_variance_bounds(ests, 8, kind)
    assert rep.passed, [c.describe() for c in rep.failures]


def test_gue_variance_bounds():
    spec = EnsembleSpec.gue(32)
    ests = estimate_form_factor(spec, [0.1, 0.2, 0.3, 1.0, 5.0], 2000, seed=4)
    rep = check_variance_bounds(ests, 32, "gue")
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert sum("4t^2" in n for n in names) == 3
    literal = rep.notes["literal_small_t"]
    assert len(literal) == 3
    # the 4t^2/d form is far too small: the gradient norm picks up a factor d
    assert not any(ok for *_, ok in literal)
    for t, var, lit, _ in literal:
        assert lit == pytest.approx(4 * t * t / 32)
        assert var <= 4 * t * t


def test_gue_small_t_variance_is_order_t_squared():
    # Var tr U_t ~ t^2 Var tr H = t^2 d sigma2, which is t^2 at sigma2 = 1/d
    spec = EnsembleSpec.gue(16)
    (e,) = estimate_form_factor(spec, [0.05], 5000, seed=5)
    assert e.variance == pytest.approx(0.05**2, rel=0.1)


def test_trace_tail():
    spec = EnsembleSpec.gue(16)
    rep = trace_concentration_tail(spec, 1.0, [0.05, 0.1, 0.2], 2000, seed=6)
    assert rep.passed
    assert [r["delta"] for r in rep.rows] == [0.05, 0.1, 0.2]
    with pytest.raises(ValueError):
        trace_concentration_tail(EnsembleSpec.diag_gaussian(4), 1.0, [0.1], 10)
    with pytest.raises(ValueError):
        trace_concentration_tail(spec, 0.0, [0.1], 10)


def test_csv_columns_and_round_trip():
    spec = EnsembleSpec.diag_gaussian(4)
    ests = estimate_form_factor(spec, [0.0, 0.7], 20, seed=7)
    text = form_factor_csv(ests, spec, header=["hello"])
    lines = text.splitlines()
    assert lines[0] == "# hello"
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert list(rows[0]) == FORM_FACTOR_COLUMNS
    assert float(rows[1]["mean_re"]) == ests[1].mean.real
    assert float(rows[1]["theory_variance"]) == gaussian_trace_variance(0.7, 4)


def test_determinism_across_jobs():
    spec = EnsembleSpec.gue(8)
    a = estimate_form_factor(spec, [0.5, 1.5], 64, seed=8, jobs=1)
    b = estimate_form_factor(spec, [0.5, 1.5], 64, seed=8, jobs=4)
    assert a == b
    assert estimate_form_factor(spec, [0.5], 64, seed=9) != estimate_form_factor(spec, [0.5], 64, seed=8)[:1]
    with pytest.raises(ValueError):
        estimate_form_factor(spec, [0.5], 1)


def test_histogram_matches_semicircle():
    spec = EnsembleSpec.gue(64)
    h = spectral_histogram(spec, 200, seed=10)
    assert h.total == 200 * 64
    dens = h.density()
    centers = 0.5 * (h.edges[1:] + h.edges[:-1])
    ref = np.array([semicircle_density(c) for c in centers])
    assert np.max(np.abs(dens - ref)) < 0.05


def test_report_primitives():
    assert Check("x", 1.0, 1.0).ok and not Check("x", 1.1, 1.0, 0.05).ok
    assert Check("x", 0.9, 1.0, 0.2, upper=False).ok
    rep = ProbeReport("p", ["a"], checks=[Check("c", 2.0, 1.0)])
    assert not rep.passed and len(rep.failures) == 1
    with pytest.raises(AssertionError, match="p: c"):
        rep.require()
    assert csv_text(["a", "b"], [{"a": 0.1, "b": 3}]) == "a,b\n0.1,3\n"
    e = FormFactorEstimate(0.0, 1 + 0j, 0.0, 2, 0.0, 1)
    assert e.as_row()["mean_re"] == 1.0
