"""Spectral measures and the statistics of ``tr U_t``.

For ``U_t = exp(-iHt)`` the normalised trace ``(1/d) tr U_t`` is the
characteristic function of the empirical spectral measure of ``H``. In the
large-``d`` GUE limit this is ``J_1(2t)/t``; for i.i.d. N(0, 1) spectra it is
``exp(-t^2/2)`` with ``Var tr U_t = d (1 - exp(-t^2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from ._parallel import run_trials
from .ensembles import EnsembleSpec, Kind, sample_spectrum
from .report import Check, ProbeReport, binomial_stderr, csv_text
from .special import bessel_j1

__all__ = [
    "FORM_FACTOR_COLUMNS",
    "FormFactorEstimate",
    "SpectralHistogram",
    "check_variance_bounds",
    "estimate_form_factor",
    "form_factor_csv",
    "gaussian_charfn",
    "gaussian_trace_variance",
    "semicircle_charfn",
    "semicircle_density",
    "spectral_histogram",
    "theory_mean",
    "theory_variance",
    "trace_concentration_tail",
]

FORM_FACTOR_COLUMNS = [
    "t", "mean_re", "mean_im", "variance", "std_error", "n_samples", "theory_mean", "theory_variance",
]


def semicircle_density(x: float) -> float:
    x = float(x)
    if abs(x) >= 2.0:
        return 0.0
    return math.sqrt(4.0 - x * x) / (2.0 * math.pi)


def semicircle_charfn(t: float) -> float:
    """``J_1(2t)/t``, with the removable singularity filled in as 1."""
    t = float(t)
    if abs(t) < 1e-8:
        return 1.0 - t * t / 2.0
    return bessel_j1(2.0 * t) / t


def gaussian_charfn(t: float) -> float:
    return math.exp(-0.5 * float(t) ** 2)


def gaussian_trace_variance(t: float, d: int) -> float:
    return d * (1.0 - math.exp(-float(t) ** 2))


def theory_mean(spec: EnsembleSpec, t: float) -> float:
    """Large-``d`` limit of ``(1/d) E tr U_t``.

    For GUE the semicircle is rescaled by ``sqrt(d sigma2)`` (unity at the
    default ``sigma2 = 1/d``).
    """
    if spec.kind is Kind.GUE:
        return semicircle_charfn(t * math.sqrt(spec.d * spec.sigma2))
    return gaussian_charfn(t)


def theory_variance(spec: EnsembleSpec, t: float) -> float:
    """Exact ``Var tr U_t`` for i.i.d. spectra; NaN for GUE (no closed form used)."""
    if spec.kind is Kind.GUE:
        return float("nan")
    return gaussian_trace_variance(t, spec.d)


@dataclass(frozen=True)
class FormFactorEstimate:
    """Monte Carlo summary of ``tr U_t`` at a single time.

    ``mean`` estimates ``(1/d) E tr U_t``; ``variance`` is the unbiased
    (``n - 1``) estimate of ``E|tr U_t|^2 - |E tr U_t|^2``; ``std_error`` is
    the standard error of ``mean``.
    """

    t: float
    mean: complex
    variance: float
    n_samples: int
    std_error: float
    d: int

    def as_row(self, spec: EnsembleSpec | None = None) -> dict:
        row = {
            "t": self.t,
            "mean_re": float(self.mean.real),
            "mean_im": float(self.mean.imag),
            "variance": self.variance,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
        }
        if spec is not None:
            row["theory_mean"] = theory_mean(spec, self.t)
            row["theory_variance"] = theory_variance(spec, self.t)
        return row


def _trace_trial(spec: EnsembleSpec, t_grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    lam = sample_spectrum(spec, rng)
    return np.exp(-1j * np.outer(t_grid, lam)).sum(axis=1)


def sample_traces(spec: EnsembleSpec, t_grid, n_samples: int, seed: int, jobs: int = 1) -> np.ndarray:
    """``tr U_t`` for each trial (rows) and time (columns)."""
    t_grid = np.asarray(t_grid, dtype=float)
    out = run_trials(partial(_trace_trial, spec, t_grid), seed, n_samples, jobs)
    return np.array(out).reshape(n_samples, t_grid.size)


def estimate_form_factor(
    spec: EnsembleSpec,
    t_grid: Sequence[float],
    n_samples: int,
    seed: int | None = None,
    jobs: int = 1,
) -> list[FormFactorEstimate]:
    """Estimate mean and variance of ``tr U_t`` over independent Hamiltonians."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    seed = spec.seed if seed is None else seed
    t_grid = np.asarray(t_grid, dtype=float)
    traces = sample_traces(spec, t_grid, n_samples, seed, jobs)
    d = spec.d
    out = []
    for j, t in enumerate(t_grid):
        col = traces[:, j]
        m = col.mean()
        var = float(np.sum(np.abs(col - m) ** 2) / (n_samples - 1))
        out.append(
            FormFactorEstimate(
                t=float(t),
                mean=complex(m / d),
                variance=var,
                n_samples=n_samples,
                std_error=math.sqrt(var / n_samples) / d,
                d=d,
            )
        )
    return out


def form_factor_csv(estimates: Sequence[FormFactorEstimate], spec: EnsembleSpec, header: Sequence[str] = ()) -> str:
    return csv_text(FORM_FACTOR_COLUMNS, (e.as_row(spec) for e in estimates), header)


def check_variance_bounds(
    estimates: Sequence[FormFactorEstimate],
    d: int,
    model: Kind | str = Kind.GUE,
    slack: float | None = None,
    small_t: float = 0.3,
) -> ProbeReport:
    """Compare empirical ``Var tr U_t`` against the known bounds.

    Every model is checked against ``Var <= d``. For GUE at ``t <= small_t``
    two Poincare-type bounds are reported: the ``4 t^2 / d`` form that takes
    the entry variance ``1/d`` at face value, and ``4 t^2``, which also counts
    the factor ``d`` from ``|grad tr phi(H)|^2 = sum_i phi'(lambda_i)^2``.
    For the i.i.d. Gaussian models the exact ``d (1 - exp(-t^2))`` is checked
    two-sided.

    ``slack`` is relative; the default ``5 sqrt(2/(n-1))`` is five times the
    relative standard error of a Gaussian variance estimate.
    """
    model = Kind.parse(model) if isinstance(model, str) else model
    rep = ProbeReport(
        "check_variance_bounds",
        ["t", "variance", "bound_d", "bound_small_t_literal", "bound_small_t", "theory_variance", "slack"],
        notes={"d": d, "model": model.value},
    )
    for e in estimates:
        rel = 5.0 * math.sqrt(2.0 / (e.n_samples - 1)) if slack is None else slack
        row = {"t": e.t, "variance": e.variance, "bound_d": float(d), "slack": rel}
        rep.checks.append(Check(f"Var tr U_t <= d at t={e.t:g}", e.variance, d, d * rel))
        if model is Kind.GUE and 0 < e.t <= small_t:
            literal = 4.0 * e.t**2 / d
            corrected = 4.0 * e.t**2
            row["bound_small_t_literal"] = literal
            row["bound_small_t"] = corrected
            rep.checks.append(Check(f"Var tr U_t <= 4t^2 at t={e.t:g}", e.variance, corrected, corrected * rel))
            rep.notes.setdefault("literal_small_t", []).append(
                (e.t, e.variance, literal, e.variance <= literal * (1 + rel))
            )
        if model is not Kind.GUE:
            exact = gaussian_trace_variance(e.t, d)
            row["theory_variance"] = exact
            tol = exact * rel
            rep.checks.append(Check(f"Var tr U_t <= d(1-e^-t^2) at t={e.t:g}", e.variance, exact, tol))
            rep.checks.append(Check(f"Var tr U_t >= d(1-e^-t^2) at t={e.t:g}", e.variance, exact, tol, upper=False))
        rep.rows.append(row)
    return rep


def trace_concentration_tail(
    spec: EnsembleSpec,
    t: float,
    delta_grid: Sequence[float],
    n_samples: int,
    seed: int | None = None,
    jobs: int = 1,
) -> ProbeReport:
    """Tail frequencies of ``tr cos(Ht)`` about its mean versus ``2 exp(-d^2 delta^2 / (4 t^2))``.

    The mean is the sample mean; the slack is three binomial standard errors
    evaluated at the bound.
    """
    if spec.kind is not Kind.GUE:
        raise ValueError("trace concentration tail is stated for GUE")
    if not t > 0:
        raise ValueError("t must be positive")
    seed = spec.seed if seed is None else seed
    d = spec.d
    traces = sample_traces(spec, [t], n_samples, seed, jobs)[:, 0].real  # tr cos(Ht)
    dev = np.abs(traces - traces.mean())
    rep = ProbeReport(
        "trace_concentration_tail",
        ["delta", "empirical", "bound", "slack", "n_samples"],
        notes={"d": d, "t": t},
    )
    for delta in delta_grid:
        freq = float(np.mean(dev >= delta * d))
        bound = min(1.0, 2.0 * math.exp(-(d * d * delta * delta) / (4.0 * t * t)))
        slack = 3.0 * binomial_stderr(bound, n_samples)
        rep.rows.append({"delta": float(delta), "empirical": freq, "bound": bound, "slack": slack, "n_samples": n_samples})
        rep.checks.append(Check(f"P(|tr cos(Ht) - E| >= {delta:g} d)", freq, bound, slack))
    return rep


@dataclass(frozen=True)
class SpectralHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_matrices: int
    d: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        return self.counts / (self.total * widths)


def spectral_histogram(
    spec: EnsembleSpec,
    n_matrices: int,
    edges: Sequence[float] | None = None,
    seed: int | None = None,
    jobs: int = 1,
) -> SpectralHistogram:
    """Histogram of pooled eigenvalues. Out-of-range values land in the end bins."""
    seed = spec.seed if seed is None else seed
    eig = np.concatenate(run_trials(partial(sample_spectrum, spec), seed, n_matrices, jobs))
    if edges is None:
        r = 2.5 * math.sqrt(spec.d * spec.sigma2) if spec.kind is Kind.GUE else 5.0
        edges = np.linspace(-r, r, 51)
    edges = np.asarray(edges, dtype=float)
    clipped = np.clip(eig, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return SpectralHistogram(edges, counts, n_matrices, spec.d)
