"""Monte Carlo probes of the geometric and concentration facts behind the
complexity lower bounds.

Unitary side: for Haar ``V`` and a fixed gate ``G`` the distance
``f(V) = dist(V G V^dagger, T)`` to the diagonal torus has mean at least
``d_hs(G, I)/3``, Lipschitz constant ``2 ||G - I||_op`` and sub-Gaussian tails.

State side: ``Z_d = sum_k |<k|V|0>| |<k|V|phi>|`` concentrates around the
Gaussian average ``A(beta) = E|X| |alpha X + beta Y|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from ._parallel import run_trials
from .ensembles import haar_isometry, sample_haar_unitary, stream
from .linalg import check_unitary
from .metrics import dist_to_diagonal_torus, hs_proj_distance
from .report import Check, ProbeReport, binomial_stderr
from .special import adaptive_simpson

__all__ = [
    "BETA0_CANDIDATES",
    "GaussianAverageReport",
    "TorusDistanceStats",
    "ball_avoidance_estimate",
    "concentration_tail_probe",
    "expected_torus_distance",
    "gaussian_approximation_check",
    "gaussian_average_lemma_fit",
    "gaussian_pair_average",
    "gaussian_pair_average_mc",
    "haar_second_moment_check",
    "lipschitz_constant",
    "lipschitz_probe",
    "state_torus_expected_distance",
    "torus_distance_samples",
]

BETA0_CANDIDATES = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
_FLOOR = 1e-12  # absolute slack floor for quantities that are exact up to rounding


def _gate(g) -> np.ndarray:
    return check_unitary(np.asarray(g, dtype=complex))


def lipschitz_constant(g) -> float:
    """``2 ||G - I||_op``."""
    g = np.asarray(g, dtype=complex)
    return 2.0 * float(np.linalg.norm(g - np.eye(g.shape[0]), 2))


def _torus_dist(g: np.ndarray, v: np.ndarray) -> float:
    return dist_to_diagonal_torus(v @ g @ v.conj().T)[0]


def _torus_trial(g: np.ndarray, rng: np.random.Generator) -> float:
    return _torus_dist(g, sample_haar_unitary(g.shape[0], rng))


def torus_distance_samples(g, n_samples: int, seed: int, jobs: int = 1) -> np.ndarray:
    """``dist(V G V^dagger, T)`` for ``n_samples`` Haar draws of ``V``."""
    g = _gate(g)
    return np.array(run_trials(partial(_torus_trial, g), seed, n_samples, jobs))


@dataclass
class TorusDistanceStats:
    gate_label: str
    dhs_G_I: float
    mc_mean: float
    mc_std: float
    n_samples: int
    lipschitz_bound: float
    checks: list[Check] = field(default_factory=list)

    @property
    def stderr(self) -> float:
        return self.mc_std / math.sqrt(self.n_samples)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def as_report(self) -> ProbeReport:
        cols = ["gate_label", "dhs_G_I", "mc_mean", "mc_std", "n_samples", "lipschitz_bound", "bound", "slack"]
        row = {c: getattr(self, c) for c in cols[:6]}
        row.update(bound=self.dhs_G_I / 3.0, slack=3.0 * self.stderr)
        return ProbeReport("expected_torus_distance", cols, [row], list(self.checks))


def expected_torus_distance(g, n_samples: int, seed: int, label: str = "G", jobs: int = 1) -> TorusDistanceStats:
    """Mean distance from ``V G V^dagger`` to the diagonal torus over Haar ``V``.

    Checks the sandwich ``d_hs(G, I)/3 <= E f <= d_hs(G, I)`` with three
    standard errors of slack on each side.
    """
    g = _gate(g)
    samples = torus_distance_samples(g, n_samples, seed, jobs)
    dhs = hs_proj_distance(g, np.eye(g.shape[0]))
    mean = float(samples.mean())
    std = float(samples.std(ddof=1)) if n_samples > 1 else 0.0
    se = std / math.sqrt(n_samples)
    stats = TorusDistanceStats(label, dhs, mean, std, n_samples, lipschitz_constant(g))
    stats.checks = [
        Check("E dist(VGV^dag, T) >= d_hs(G,I)/3", mean, dhs / 3.0, 3 * se + _FLOOR, upper=False),
        Check("E dist(VGV^dag, T) <= d_hs(G,I)", mean, dhs, 3 * se + _FLOOR),
    ]
    return stats


def haar_second_moment(g) -> float:
    """Closed form ``(1 + |tr G|^2 / d) / (d + 1)`` for ``E |<i|V G V^dagger|i>|^2``."""
    g = np.asarray(g, dtype=complex)
    d = g.shape[0]
    return (1.0 + abs(np.trace(g)) ** 2 / d) / (d + 1)


def _second_moment_trial(g: np.ndarray, i: int, rng: np.random.Generator) -> float:
    v = sample_haar_unitary(g.shape[0], rng)
    row = v[i]
    return abs(row @ g @ row.conj()) ** 2


def haar_second_moment_check(g, i: int, n_samples: int, seed: int, jobs: int = 1) -> ProbeReport:
    """Monte Carlo ``E_V |(V G V^dagger)_{ii}|^2`` against the closed form.

    ``i`` is 1-based.
    """
    g = _gate(g)
    d = g.shape[0]
    if not 1 <= i <= d:
        raise ValueError(f"index i must be in 1..{d}, got {i}")
    vals = np.array(run_trials(partial(_second_moment_trial, g, i - 1), seed, n_samples, jobs))
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    exact = haar_second_moment(g)
    slack = 3 * se + _FLOOR
    rep = ProbeReport(
        "haar_second_moment_check",
        ["i", "mc_mean", "stderr", "closed_form", "slack", "n_samples"],
        [{"i": i, "mc_mean": est, "stderr": se, "closed_form": exact, "slack": slack, "n_samples": n_samples}],
    )
    rep.checks = [
        Check("E|<i|VGV^dag|i>|^2 <= closed form", est, exact, slack),
        Check("E|<i|VGV^dag|i>|^2 >= closed form", est, exact, slack, upper=False),
    ]
    return rep


def _near(u: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """``u exp(i scale K)`` for a random Hermitian ``K`` of unit HS norm."""
    d = u.shape[0]
    k = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    k = (k + k.conj().T) / 2
    k /= np.linalg.norm(k)
    w, q = np.linalg.eigh(k)
    return u @ ((q * np.exp(1j * scale * w)) @ q.conj().T)


def _pair(d: int, rng: np.random.Generator, near: bool) -> tuple[np.ndarray, np.ndarray]:
    u = sample_haar_unitary(d, rng)
    if near:
        return u, _near(u, 10.0 ** rng.uniform(-4, 0), rng)
    return u, sample_haar_unitary(d, rng)


def _lipschitz_trial(g: np.ndarray, rng: np.random.Generator) -> tuple[float, float]:
    u, v = _pair(g.shape[0], rng, near=bool(rng.integers(2)))
    return abs(_torus_dist(g, u) - _torus_dist(g, v)), float(np.linalg.norm(u - v))


def lipschitz_probe(g, n_pairs: int, seed: int, jobs: int = 1) -> ProbeReport:
    """Count pairs violating ``|f(U) - f(V)| <= 2||G - I|| ||U - V||_HS``.

    Half of the pairs (at random) are independent Haar draws, the rest are
    small perturbations ``U exp(i s K)`` with ``s`` log-uniform in
    ``[1e-4, 1]``, where the ratio is largest.
    """
    g = _gate(g)
    L = lipschitz_constant(g)
    res = np.array(run_trials(partial(_lipschitz_trial, g), seed, n_pairs, jobs))
    df, dx = res[:, 0], res[:, 1]
    slack = 1e-9 * np.maximum(1.0, dx)
    violations = int(np.sum(df > L * dx + slack))
    ratio = float(np.max(np.where(dx > 0, df / np.where(dx > 0, dx, 1.0), 0.0)))
    rep = ProbeReport(
        "lipschitz_probe",
        ["lipschitz_bound", "max_ratio", "violations", "n_pairs"],
        [{"lipschitz_bound": L, "max_ratio": ratio, "violations": violations, "n_pairs": n_pairs}],
    )
    rep.checks = [Check("Lipschitz violations", violations, 0), Check("max |df|/|dU|", ratio, L, 1e-9)]
    return rep


def concentration_tail_probe(g, a_grid: Sequence[float], n_samples: int, seed: int, jobs: int = 1) -> ProbeReport:
    """Both tails of ``f(V)`` about its sample mean against ``exp(-(d-2) a^2 / (12 L^2))``."""
    g = _gate(g)
    d = g.shape[0]
    L = lipschitz_constant(g)
    if not L > 0:
        raise ValueError("G is a multiple of the identity; the Lipschitz constant is 0")
    f = torus_distance_samples(g, n_samples, seed, jobs)
    mean = f.mean()
    rep = ProbeReport(
        "concentration_tail_probe",
        ["a", "lower_tail", "upper_tail", "bound", "slack", "n_samples"],
        notes={"d": d, "L": L, "mean": float(mean)},
    )
    for a in a_grid:
        bound = math.exp(-(d - 2) * a * a / (12.0 * L * L))
        slack = 3.0 * binomial_stderr(bound, n_samples)
        lo = float(np.mean(f <= mean - a))
        hi = float(np.mean(f >= mean + a))
        rep.rows.append({"a": float(a), "lower_tail": lo, "upper_tail": hi, "bound": bound, "slack": slack, "n_samples": n_samples})
        rep.checks.append(Check(f"P(f <= Ef - {a:g})", lo, bound, slack))
        rep.checks.append(Check(f"P(f >= Ef + {a:g})", hi, bound, slack))
    return rep


def ball_avoidance_estimate(g, eps: float, n_samples: int, seed: int, jobs: int = 1) -> ProbeReport:
    """Frequency of ``dist(V G V^dagger, T) <= eps sqrt(d)`` against ``exp(-eps^2 d^2 / 384)``.

    Requires ``d_hs(G, I) > 6 eps sqrt(d)``. Since ``d_hs <= sqrt(2d)`` this
    forces ``eps < sqrt(2)/6``.
    """
    g = _gate(g)
    d = g.shape[0]
    dhs = hs_proj_distance(g, np.eye(d))
    threshold = 6.0 * eps * math.sqrt(d)
    if not dhs > threshold:
        raise ValueError(
            f"precondition d_hs(G, I) > 6*eps*sqrt(d) fails: d_hs = {dhs:.6g}, 6*eps*sqrt(d) = {threshold:.6g}"
        )
    f = torus_distance_samples(g, n_samples, seed, jobs)
    hits = int(np.sum(f <= eps * math.sqrt(d)))
    freq = hits / n_samples
    bound = math.exp(-eps * eps * d * d / 384.0)
    slack = 3.0 * binomial_stderr(bound, n_samples)
    rep = ProbeReport(
        "ball_avoidance_estimate",
        ["d", "epsilon", "dhs_G_I", "hits", "empirical", "bound", "slack", "n_samples"],
        [{"d": d, "epsilon": eps, "dhs_G_I": dhs, "hits": hits, "empirical": freq, "bound": bound, "slack": slack, "n_samples": n_samples}],
    )
    rep.checks = [Check("P(dist(VGV^dag, T) <= eps sqrt(d))", freq, bound, slack)]
    return rep


# -- Gaussian pair average ---------------------------------------------------


def _theta_integral(a: float, b: float, tol: float) -> float:
    """``int_0^{2pi} sqrt(a^2 + b^2 + 2ab cos th) d th``; symmetric about pi."""
    if a == 0.0 or b == 0.0:
        return 2.0 * math.pi * (a + b)
    s = a * a + b * b
    p = 2.0 * a * b
    return 2.0 * adaptive_simpson(lambda th: math.sqrt(max(0.0, s + p * math.cos(th))), 0.0, math.pi, tol)


def gaussian_pair_average(beta: float, tol: float = 1e-8) -> float:
    """``A(beta) = E |X| |alpha X + beta Y|`` for independent standard complex
    Gaussians, ``alpha = sqrt(1 - beta^2)``.

    After integrating out the radial parts this is
    ``(2/pi) int_0^{2pi} d th int_0^{pi/2} d ph cos^2 ph sin ph sqrt(a^2 + b^2 + 2ab cos th)``
    with ``a = alpha cos ph`` and ``b = beta sin ph``. The outer integral is
    split where ``a = b``, where the inner integral has a kink.
    """
    beta = float(beta)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    alpha = math.sqrt(1.0 - beta * beta)
    inner_tol = tol * 1e-3

    def outer(ph: float) -> float:
        c, s = math.cos(ph), math.sin(ph)
        return c * c * s * _theta_integral(alpha * c, beta * s, inner_tol)

    half = math.pi / 2
    kink = math.atan2(alpha, beta)  # alpha cos = beta sin
    cuts = [0.0] + ([kink] if 0.0 < kink < half else []) + [half]
    total = sum(adaptive_simpson(outer, lo, hi, tol * 1e-2) for lo, hi in zip(cuts[:-1], cuts[1:]))
    return 2.0 / math.pi * total


def gaussian_pair_average_mc(beta: float, n_samples: int, seed: int, chunk: int = 1_000_000) -> tuple[float, float]:
    """Direct Monte Carlo of ``E |X| |alpha X + beta Y|``; returns (mean, stderr)."""
    alpha = math.sqrt(1.0 - beta * beta)
    total = 0.0
    total_sq = 0.0
    done = 0
    block = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        rng = stream(seed, block)
        z = rng.standard_normal((4, m)) / math.sqrt(2.0)
        x = z[0] + 1j * z[1]
        y = z[2] + 1j * z[3]
        v = np.abs(x) * np.abs(alpha * x + beta * y)
        total += float(v.sum())
        total_sq += float(np.dot(v, v))
        done += m
        block += 1
    mean = total / n_samples
    var = max(0.0, (total_sq - n_samples * mean * mean) / (n_samples - 1))
    return mean, math.sqrt(var / n_samples)


@dataclass
class GaussianAverageReport:
    """``A(beta)`` on a grid and the best ``(c, beta0)`` with
    ``1 - A(beta)^2 >= c min(beta^2, beta0^2)`` on that grid."""

    beta_grid: list[float]
    A_values: list[float]
    mc_values: list[float | None]
    mc_stderr: list[float | None]
    c: float
    beta0: float
    c_by_beta0: dict[float, float]

    @property
    def gaps(self) -> list[float]:
        return [1.0 - a * a for a in self.A_values]

    def as_report(self) -> ProbeReport:
        rows = [
            {"beta": b, "A": a, "one_minus_A2": 1 - a * a, "mc": m, "mc_stderr": s, "c": self.c, "beta0": self.beta0}
            for b, a, m, s in zip(self.beta_grid, self.A_values, self.mc_values, self.mc_stderr)
        ]
        rep = ProbeReport("gaussian_average_lemma_fit", ["beta", "A", "one_minus_A2", "mc", "mc_stderr", "c", "beta0"], rows)
        rep.checks = [Check("fitted c", self.c, 0.0, 0.0, upper=False)]
        rep.checks += [Check(f"1 - A({b:g})^2", g, 0.0, 0.0, upper=False) for b, g in zip(self.beta_grid, self.gaps)]
        return rep


def _fit_c(betas: np.ndarray, gaps: np.ndarray, beta0: float) -> float:
    return float(np.min(gaps / np.minimum(betas**2, beta0**2)))


def gaussian_average_lemma_fit(
    beta_grid: Sequence[float],
    mc_samples: int = 0,
    seed: int = 0,
    candidates: Sequence[float] = BETA0_CANDIDATES,
) -> GaussianAverageReport:
    """Evaluate ``A`` on ``beta_grid`` (in ``(0, 1]``) and fit ``(c, beta0)``.

    For each candidate ``beta0`` the largest admissible ``c`` is the minimum
    of ``(1 - A^2) / min(beta^2, beta0^2)`` over the grid; the candidate with
    the largest ``c`` wins. With ``mc_samples > 0`` a Monte Carlo estimate is
    attached to every grid point.
    """
    betas = np.asarray(beta_grid, dtype=float)
    if betas.size == 0 or np.any(betas <= 0) or np.any(betas > 1):
        raise ValueError("beta grid must be a nonempty subset of (0, 1]")
    A = [gaussian_pair_average(b) for b in betas]
    gaps = 1.0 - np.asarray(A) ** 2
    c_by = {float(b0): _fit_c(betas, gaps, b0) for b0 in candidates}
    beta0 = max(c_by, key=lambda k: (c_by[k], -k))
    mc = [gaussian_pair_average_mc(b, mc_samples, seed + j) if mc_samples else (None, None) for j, b in enumerate(betas)]
    return GaussianAverageReport(
        beta_grid=[float(b) for b in betas],
        A_values=A,
        mc_values=[m for m, _ in mc],
        mc_stderr=[s for _, s in mc],
        c=c_by[beta0],
        beta0=beta0,
        c_by_beta0=c_by,
    )


# -- Haar overlaps and state tori ---------------------------------------------


def _overlap_trial(beta: float, k: int, d: int, rng: np.random.Generator) -> float:
    cols = haar_isometry(d, 2, rng)  # V|0>, V|1>
    alpha = math.sqrt(1.0 - beta * beta)
    a = cols[k, 0]
    return d * abs(a) * abs(alpha * a + beta * cols[k, 1])


def gaussian_approximation_check(
    beta: float, k_index: int, d: int, n_samples: int, seed: int, jobs: int = 1
) -> ProbeReport:
    """``d E_V |<k|V|0>| |<k|V|phi>|`` for ``phi = alpha|0> + beta|1>`` against ``A(beta)``.

    Slack is ``5 / sqrt(d)`` plus three standard errors. ``k_index`` is 0-based.
    """
    if not 0 <= k_index < d:
        raise ValueError(f"k_index must be in 0..{d - 1}")
    vals = np.array(run_trials(partial(_overlap_trial, float(beta), k_index, d), seed, n_samples, jobs))
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    target = gaussian_pair_average(beta)
    slack = 5.0 / math.sqrt(d) + 3.0 * se
    rep = ProbeReport(
        "gaussian_approximation_check",
        ["beta", "k", "d", "mc_scaled", "stderr", "gaussian_average", "difference", "slack", "n_samples"],
        [{
            "beta": beta, "k": k_index, "d": d, "mc_scaled": est, "stderr": se,
            "gaussian_average": target, "difference": est - target, "slack": slack, "n_samples": n_samples,
        }],
    )
    rep.checks = [Check("|d E|<k|V|0>||<k|V|phi>| - A(beta)|", abs(est - target), 0.0, slack)]
    return rep


def _state_pair(phi: np.ndarray, v0: np.ndarray, v1: np.ndarray) -> float:
    return float(np.sum(np.abs(v0) * np.abs(phi[0] * v0 + v1)))


def _z_trial(phi: np.ndarray, rng: np.random.Generator) -> float:
    # Only the 2-dim span of |0> and phi matters: V|phi> = phi_0 V|0> + |perp| V|e>
    # with V|e> the second column of a Haar isometry.
    d = phi.shape[0]
    perp = math.sqrt(max(0.0, 1.0 - abs(phi[0]) ** 2))
    if d == 1 or perp == 0.0:
        v0 = haar_isometry(d, 1, rng)[:, 0]
        return float(np.sum(np.abs(v0) ** 2))
    cols = haar_isometry(d, 2, rng)
    return _state_pair(phi, cols[:, 0], perp * cols[:, 1])


def _z_of(u: np.ndarray, phi: np.ndarray) -> float:
    return float(np.sum(np.abs(u[:, 0]) * np.abs(u @ phi)))


def _state_lipschitz_trial(phi: np.ndarray, rng: np.random.Generator) -> tuple[float, float]:
    u, v = _pair(phi.shape[0], rng, near=bool(rng.integers(2)))
    return abs(_z_of(u, phi) - _z_of(v, phi)), float(np.linalg.norm(u - v))


def state_torus_expected_distance(
    phi,
    n_samples: int,
    seed: int,
    n_pairs: int = 0,
    eps_grid: Sequence[float] = (),
    jobs: int = 1,
) -> ProbeReport:
    """Statistics of ``Z_d = sum_k |<k|V|0>| |<k|V|phi>|`` over Haar ``V``.

    ``dist(V|0>, T_{V phi}) = sqrt(1 - Z_d^2)``. Optional extras: a Lipschitz
    probe (constant 1 in HS norm) on ``n_pairs`` pairs, and for each ``eps``
    in ``eps_grid`` the tail ``P(Z_d - E Z_d > eps^2)`` against
    ``exp(-eps^2 (d-2)/12)``. The event ``dist < eps`` is reported alongside
    ``exp(-eps^2 d/6)`` without a check, since that bound needs the
    Gaussian-average preconditions on ``phi``.
    """
    phi = np.asarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-12:
        raise ValueError("phi must have unit norm")
    d = phi.shape[0]
    z = np.array(run_trials(partial(_z_trial, phi), seed, n_samples, jobs))
    mean = float(z.mean())
    se = float(z.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    dist = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    rep = ProbeReport(
        "state_torus_expected_distance",
        ["quantity", "epsilon", "empirical", "bound", "slack", "n_samples"],
        notes={"d": d, "mean_Z": mean, "stderr_Z": se, "mean_dist": float(dist.mean())},
    )
    rep.rows.append({"quantity": "mean_Z", "empirical": mean, "slack": se, "n_samples": n_samples})
    rep.rows.append({"quantity": "mean_dist", "empirical": float(dist.mean()), "n_samples": n_samples})
    if n_pairs:
        res = np.array(run_trials(partial(_state_lipschitz_trial, phi), seed + 1, n_pairs, jobs))
        df, dx = res[:, 0], res[:, 1]
        violations = int(np.sum(df > dx + 1e-9 * np.maximum(1.0, dx)))
        ratio = float(np.max(np.where(dx > 0, df / np.where(dx > 0, dx, 1.0), 0.0)))
        rep.rows.append({"quantity": "lipschitz_max_ratio", "empirical": ratio, "bound": 1.0, "n_samples": n_pairs})
        rep.rows.append({"quantity": "lipschitz_violations", "empirical": violations, "bound": 0, "n_samples": n_pairs})
        rep.checks.append(Check("Z_d Lipschitz violations", violations, 0))
        rep.notes["lipschitz_max_ratio"] = ratio
    for eps in eps_grid:
        tail = float(np.mean(z - mean > eps * eps))
        bound = math.exp(-eps * eps * (d - 2) / 12.0)
        slack = 3.0 * binomial_stderr(bound, n_samples)
        rep.rows.append({"quantity": "upper_tail", "epsilon": eps, "empirical": tail, "bound": bound, "slack": slack, "n_samples": n_samples})
        rep.checks.append(Check(f"P(Z_d - E Z_d > {eps:g}^2)", tail, bound, slack))
        near = float(np.mean(dist < eps))
        rep.rows.append({
            "quantity": "ball_hit", "epsilon": eps, "empirical": near,
            "bound": math.exp(-eps * eps * d / 6.0), "n_samples": n_samples,
        })
    return rep
