"""Escape curves, their scaling, torus equidistribution and the jump-figure bundle.

Distances from the identity channel depend only on the eigenphases of
``U_t``, so channel escape curves sample spectra and never build ``U_t``.
Curves for one ensemble share stream indices ``0..n-1`` across ``eps`` and
``t``; stay probabilities are therefore monotone in ``eps`` sample by sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from ._parallel import run_trials
from ._version import __version__
from .complexity import GateSet, complexity_jump_curve, distances_to, enumerate_words
from .ensembles import EnsembleSpec, Kind, sample_hamiltonian, sample_spectrum, stream
from .linalg import eig_hermitian
from .metrics import covering_arc, diamond_from_arc, opnorm_from_arc
from .report import csv_text

__all__ = [
    "ESCAPE_COLUMNS",
    "BallMeasureEstimate",
    "EscapeCurve",
    "ScalingFit",
    "diagonal_ball_diamond_probe",
    "escape_curve",
    "escape_scaling_fit",
    "escape_time",
    "jump_figure",
    "loglog_slope",
    "state_escape_curve",
    "torus_ball_measure",
    "wrapped_gaussian_ball",
]

ESCAPE_COLUMNS = ["t", "stay_prob", "stderr", "n_samples", "ensemble", "d", "epsilon", "metric", "seed", "streams"]
METRICS = ("diamond", "opnorm", "hs", "trace")

# two-sided 97.5% Student t quantiles for small degrees of freedom
_T975 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228,
    12: 2.179, 15: 2.131, 20: 2.086, 25: 2.060, 30: 2.042,
}


def _t975(df: int) -> float:
    if df <= 0:
        return math.inf
    keys = [k for k in _T975 if k <= df]
    return _T975[max(keys)] if df <= 30 else 1.96


@dataclass(frozen=True)
class EscapeCurve:
    """Stay probabilities ``P(D(U_t, I) <= eps)`` along a time grid."""

    spec: EnsembleSpec
    eps: float
    metric: str
    t_grid: np.ndarray
    stay: np.ndarray
    n_samples: int
    seed: int

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.stay * (1.0 - self.stay) / self.n_samples)

    @property
    def t_escape(self) -> float | None:
        return escape_time(self.t_grid, self.stay)

    def rows(self) -> list[dict]:
        return [
            {
                "t": float(t), "stay_prob": float(p), "stderr": float(s), "n_samples": self.n_samples,
                "ensemble": self.spec.kind.value, "d": self.spec.d, "epsilon": self.eps,
                "metric": self.metric, "seed": self.seed, "streams": f"0:{self.n_samples}",
            }
            for t, p, s in zip(self.t_grid, self.stay, self.stderr)
        ]

    def to_csv(self, header: Sequence[str] = ()) -> str:
        return csv_text(ESCAPE_COLUMNS, self.rows(), header)


def escape_time(t_grid, stay, level: float = 0.5) -> float | None:
    """First crossing of ``stay`` below ``level``, linearly interpolated."""
    t_grid = np.asarray(t_grid, dtype=float)
    stay = np.asarray(stay, dtype=float)
    below = np.flatnonzero(stay < level)
    if below.size == 0:
        return None
    j = below[0]
    if j == 0:
        return float(t_grid[0])
    p0, p1 = stay[j - 1], stay[j]
    frac = (p0 - level) / (p0 - p1)
    return float(t_grid[j - 1] + frac * (t_grid[j] - t_grid[j - 1]))


def _distance_from_identity(phases: np.ndarray, metric: str) -> np.ndarray:
    """Projective distance of ``diag(e^{i phases})`` from I, batched over rows."""
    if metric == "hs":
        d = phases.shape[-1]
        tr = np.abs(np.exp(1j * phases).sum(axis=-1))
        return np.sqrt(np.clip(2.0 * d - 2.0 * tr, 0.0, None))
    arc = covering_arc(phases)
    if metric == "opnorm":
        return opnorm_from_arc(arc)
    if metric == "diamond":
        return diamond_from_arc(arc)
    raise ValueError(f"unknown channel metric {metric!r}")


def sample_spectra(spec: EnsembleSpec, n_samples: int, seed: int, jobs: int = 1) -> np.ndarray:
    return np.array(run_trials(partial(sample_spectrum, spec), seed, n_samples, jobs))


def _stay_from_spectra(lam: np.ndarray, t_grid: np.ndarray, eps: float, metric: str) -> np.ndarray:
    return np.array([np.mean(_distance_from_identity(-lam * t, metric) <= eps) for t in t_grid])


def escape_curve(
    spec: EnsembleSpec,
    eps: float,
    metric: str = "diamond",
    t_grid: Sequence[float] = (),
    n_samples: int = 500,
    seed: int | None = None,
    jobs: int = 1,
) -> EscapeCurve:
    """Fraction of Hamiltonians with ``D(U_t, I) <= eps`` at each ``t``."""
    if n_samples < 100:
        raise ValueError("escape curves need n_samples >= 100")
    if metric not in ("diamond", "opnorm", "hs"):
        raise ValueError(f"unknown channel metric {metric!r}")
    seed = spec.seed if seed is None else seed
    t_grid = np.asarray(t_grid, dtype=float)
    lam = sample_spectra(spec, n_samples, seed, jobs)
    return EscapeCurve(spec, eps, metric, t_grid, _stay_from_spectra(lam, t_grid, eps, metric), n_samples, seed)


def _escape_from_spectra(lam: np.ndarray, eps: float, metric: str, t_scale: float, points: int = 201) -> float | None:
    tmax = 4.0 * eps * t_scale
    for _ in range(8):
        grid = np.linspace(0.0, tmax, points)
        te = escape_time(grid, _stay_from_spectra(lam, grid, eps, metric))
        if te is not None:
            return te
        tmax *= 2.0
    return None


@dataclass
class ScalingFit:
    """Escape times on an ``(d, eps)`` grid with a log-log slope in ``eps`` per ``d``."""

    kind: Kind
    metric: str
    d_grid: list[int]
    eps_grid: list[float]
    t_escape: dict[tuple[int, float], float | None]
    slopes: dict[int, tuple[float, float, float]]  # d -> (slope, ci_low, ci_high)
    collapse: dict[float, dict] = field(default_factory=dict)  # eps -> {values, relative_spread}

    def rows(self) -> list[dict]:
        out = []
        for (d, eps), te in sorted(self.t_escape.items()):
            row = {"d": d, "epsilon": eps, "t_escape": te, "t_escape_sqrt_log_d": None if te is None else te * math.sqrt(math.log(d))}
            slope = self.slopes.get(d)
            if slope:
                row.update(slope=slope[0], slope_ci_low=slope[1], slope_ci_high=slope[2])
            out.append(row)
        return out


def loglog_slope(x, y) -> tuple[float, float, float]:
    """OLS slope of ``log y`` on ``log x`` with a 95% Student-t interval."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    n = lx.size
    A = np.column_stack([lx, np.ones(n)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope = float(coef[0])
    if n <= 2:
        return slope, -math.inf, math.inf
    resid = ly - A @ coef
    s2 = float(resid @ resid) / (n - 2)
    se = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    h = _t975(n - 2) * se
    return slope, slope - h, slope + h


def escape_scaling_fit(
    kind: Kind | str,
    eps_grid: Sequence[float],
    d_grid: Sequence[int],
    n_samples: int,
    seed: int,
    metric: str = "diamond",
    jobs: int = 1,
) -> ScalingFit:
    """``t_escape`` over ``eps_grid x d_grid``, log-log slopes in ``eps``, and
    for each ``eps`` the spread of ``t_escape sqrt(log d)`` across ``d``.

    The relative spread is ``(max - min) / mean``.
    """
    kind = Kind.parse(kind) if isinstance(kind, str) else kind
    if len(eps_grid) < 3 and len(d_grid) < 3:
        raise ValueError("need at least three grid points in eps or d")
    te: dict[tuple[int, float], float | None] = {}
    for d in d_grid:
        spec = EnsembleSpec(kind, d)
        lam = sample_spectra(spec, n_samples, seed, jobs)
        scale = 1.0 if kind is Kind.GUE else 1.0 / math.sqrt(math.log(max(d, 2)))
        for eps in eps_grid:
            te[(d, float(eps))] = _escape_from_spectra(lam, eps, metric, scale)
    slopes = {}
    for d in d_grid:
        pts = [(e, te[(d, float(e))]) for e in eps_grid if te[(d, float(e))]]
        if len(pts) >= 2:
            slopes[d] = loglog_slope(*zip(*pts))
    collapse = {}
    for eps in eps_grid:
        vals = [te[(d, float(eps))] * math.sqrt(math.log(d)) for d in d_grid if te[(d, float(eps))] and d > 1]
        if len(vals) >= 2:
            collapse[float(eps)] = {"values": vals, "relative_spread": (max(vals) - min(vals)) / float(np.mean(vals))}
    return ScalingFit(kind, metric, [int(d) for d in d_grid], [float(e) for e in eps_grid], te, slopes, collapse)


def _state_overlap_trial(spec: EnsembleSpec, t_grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    s = eig_hermitian(sample_hamiltonian(spec, rng))
    w = np.abs(s.eigenvectors[0]) ** 2  # |<0|v_k>|^2
    return np.abs(np.exp(-1j * np.outer(t_grid, s.eigenvalues)) @ w)


def state_escape_curve(
    spec: EnsembleSpec,
    eps: float,
    t_grid: Sequence[float],
    n_samples: int = 500,
    seed: int | None = None,
    jobs: int = 1,
) -> EscapeCurve:
    """Fraction with ``trace_distance(U_t|0>, |0>) <= eps``.

    ``<0|U_t|0> = sum_k |<0|v_k>|^2 e^{-i lambda_k t}``, so one
    eigendecomposition serves the whole grid.
    """
    if n_samples < 100:
        raise ValueError("escape curves need n_samples >= 100")
    seed = spec.seed if seed is None else seed
    t_grid = np.asarray(t_grid, dtype=float)
    ov = np.array(run_trials(partial(_state_overlap_trial, spec, t_grid), seed, n_samples, jobs))
    dist = np.sqrt(np.clip(1.0 - ov**2, 0.0, None))
    stay = np.mean(dist <= eps, axis=0)
    return EscapeCurve(spec, eps, "trace", t_grid, stay, n_samples, seed)


# -- torus equidistribution -------------------------------------------------------


@dataclass(frozen=True)
class BallMeasureEstimate:
    d: int
    t: float
    center: tuple[float, ...]
    eps: float
    estimate: float
    stderr: float
    n_samples: int
    exact: float | None = None


def _phase_draws(d: int, t: float, n: int, seed: int, chunk: int):
    done, block = 0, 0
    while done < n:
        m = min(chunk, n - done)
        yield -stream(seed, block).standard_normal((m, d)) * t
        done += m
        block += 1


def wrapped_gaussian_ball(t: float, center: float, eps: float) -> float:
    """``P(|e^{-i lambda t} - e^{i c}| < eps)`` for ``lambda ~ N(0, 1)``, exactly.

    The chordal ball is the arc ``|phase - c| < eta`` with ``eta = 2 arcsin(eps/2)``;
    the wrapped normal mass of an arc is a sum of error-function differences.
    """
    if eps >= 2.0:
        return 1.0
    if t == 0:
        return float(abs(1.0 - complex(math.cos(center), math.sin(center))) < eps)
    eta = 2.0 * math.asin(eps / 2.0)
    s = abs(t) * math.sqrt(2.0)
    reach = int(math.ceil((10.0 * abs(t) + eta + abs(center)) / (2 * math.pi))) + 1
    total = 0.0
    for k in range(-reach, reach + 1):
        lo = center - eta + 2 * math.pi * k
        hi = center + eta + 2 * math.pi * k
        total += 0.5 * (math.erf(hi / s) - math.erf(lo / s))
    return min(1.0, max(0.0, total))


def torus_ball_measure(
    d: int,
    t: float,
    center: Sequence[float] | None,
    eps: float,
    n_samples: int,
    seed: int,
    chunk: int = 250_000,
) -> BallMeasureEstimate:
    """Monte Carlo ``nu_t(B(x, eps))`` for i.i.d. N(0, 1) eigenvalues.

    Ball in the chordal max metric ``max_i |e^{i phi_i} - e^{i x_i}|``. For
    ``d = 1`` the exact wrapped-Gaussian value is attached.
    """
    if not 1 <= d <= 6:
        raise ValueError("torus ball measure is resolvable for 1 <= d <= 6")
    x = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    if x.shape != (d,):
        raise ValueError(f"center must have {d} phases")
    zc = np.exp(1j * x)
    hits = 0
    for ph in _phase_draws(d, t, n_samples, seed, chunk):
        hits += int(np.sum(np.max(np.abs(np.exp(1j * ph) - zc), axis=1) < eps))
    p = hits / n_samples
    exact = wrapped_gaussian_ball(t, float(x[0]), eps) if d == 1 else None
    return BallMeasureEstimate(d, t, tuple(float(v) for v in x), eps, p, math.sqrt(p * (1 - p) / n_samples), n_samples, exact)


def diagonal_ball_diamond_probe(
    d: int,
    t: float,
    center: Sequence[float] | None,
    eps: float,
    n_samples: int,
    seed: int,
    chunk: int = 250_000,
) -> BallMeasureEstimate:
    """Frequency of ``D(diag(e^{-i lambda t}), diag(e^{i x})) <= eps`` (diamond).

    The diamond ball is a union over the global phase, so its measure scales
    like ``eps^(d-1)`` rather than ``eps^d``.
    """
    if not 1 <= d <= 6:
        raise ValueError("diamond ball probe is resolvable for 1 <= d <= 6")
    x = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    hits = 0
    for ph in _phase_draws(d, t, n_samples, seed, chunk):
        hits += int(np.sum(diamond_from_arc(covering_arc(ph - x)) <= eps))
    p = hits / n_samples
    return BallMeasureEstimate(d, t, tuple(float(v) for v in x), eps, p, math.sqrt(p * (1 - p) / n_samples), n_samples)


# -- jump figure bundle -----------------------------------------------------------


def _manifest(entries: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in entries.items())


def jump_figure(
    spec: EnsembleSpec,
    gs: GateSet | None,
    eps: float,
    t_grid: Sequence[float],
    n_samples: int,
    seed: int,
    outdir,
    max_len: int = 8,
    metric: str = "diamond",
    header: Sequence[str] = (),
) -> dict[str, Path]:
    """Write the three curves behind the complexity-jump picture.

    * ``escape.csv``: stay probability in the ``eps`` ball around I.
    * ``complexity.csv``: exact complexity statistics (needs ``d <= 4`` and a gate set).
    * ``balls.csv``: frequency of landing within ``eps`` of a nontrivial short word
      whose own distance from I exceeds ``2 eps``.

    All panels use the same seed and stream indices ``0..n-1``. A plain-text
    ``manifest.txt`` lists the members. Output is a pure function of the
    arguments.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    t_grid = np.asarray(t_grid, dtype=float)
    head = [f"rmtlab {__version__}", *header]
    files: dict[str, Path] = {}
    lineage = {"ensemble": spec.kind.value, "d": spec.d, "epsilon": eps, "metric": metric, "seed": seed, "streams": f"0:{n_samples}"}

    curve = escape_curve(spec, eps, metric, t_grid, n_samples, seed)
    files["escape"] = out / "escape.csv"
    files["escape"].write_text(curve.to_csv(head))

    if gs is not None and spec.d <= 4:
        if gs.d != spec.d:
            raise ValueError("gate set dimension differs from ensemble dimension")
        res = complexity_jump_curve(spec, gs, eps, t_grid, n_samples, max_len, seed, metric)
        m = res.matrix()
        rows = [
            {"t": float(t), "median_complexity": float(np.median(m[:, j])), "frac_zero": float(np.mean(m[:, j] == 0)),
             "frac_exceeds": float(np.mean(m[:, j] > max_len)), "n_samples": n_samples, "max_len": max_len, **lineage}
            for j, t in enumerate(t_grid)
        ]
        cols = ["t", "median_complexity", "frac_zero", "frac_exceeds", "n_samples", "max_len", *lineage]
        files["complexity"] = out / "complexity.csv"
        files["complexity"].write_text(csv_text(cols, rows, head))

        table = enumerate_words(gs, max_len)
        from_id = distances_to(np.eye(gs.d), table.unitaries, metric)
        far = table.unitaries[(table.lengths >= 1) & (from_id > 2 * eps)]
        hits = np.zeros(t_grid.size)
        for i in range(n_samples):
            s = eig_hermitian(sample_hamiltonian(spec, stream(seed, i)))
            for j, t in enumerate(t_grid):
                u = (s.eigenvectors * np.exp(-1j * s.eigenvalues * t)) @ s.eigenvectors.conj().T
                hits[j] += bool(far.size and np.any(distances_to(u, far, metric) <= eps))
        p = hits / n_samples
        rows = [
            {"t": float(t), "hit_prob": float(q), "stderr": math.sqrt(q * (1 - q) / n_samples), "n_samples": n_samples,
             "n_words": int(far.shape[0]), **lineage}
            for t, q in zip(t_grid, p)
        ]
        cols = ["t", "hit_prob", "stderr", "n_samples", "n_words", *lineage]
        files["balls"] = out / "balls.csv"
        files["balls"].write_text(csv_text(cols, rows, head))

    manifest = {"toolkit": f"rmtlab {__version__}", "ensemble": spec.kind.value, "d": spec.d, "sigma2": repr(spec.sigma2),
                "epsilon": eps, "metric": metric, "seed": seed, "n_samples": n_samples, "max_len": max_len}
    for name, path in files.items():
        manifest[f"member.{name}"] = path.name
        manifest[f"member.{name}.seed"] = seed
    files["manifest"] = out / "manifest.txt"
    files["manifest"].write_text(_manifest(manifest))
    return files
