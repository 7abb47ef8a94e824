"""Brute-force epsilon-complexity over a finite gate set.

Words are enumerated breadth first, so kept words are ordered by length and
the complexity of a target is the length of the first kept word within
``eps``. Near-duplicate words can be pruned with an epsilon-net of radius
``dedup_tol / max_len`` per level; since right multiplication is an isometry,
every word is then represented by a kept word of no greater length within
``dedup_tol``, and the reported value ``r`` satisfies
``C_{eps + dedup_tol} <= r <= C_{eps - dedup_tol}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensembles import EnsembleSpec, sample_hamiltonian, stream
from .linalg import check_unitary, deserialize, eig_hermitian, evolve, serialize
from .metrics import covering_arc

__all__ = [
    "DEFAULT_BUDGET",
    "ComplexityCurve",
    "GateSet",
    "JumpCurveResult",
    "WordBudgetError",
    "WordTable",
    "complexity_jump_curve",
    "default_gate_set",
    "distances_to",
    "enumerate_words",
    "exact_state_complexity",
    "exact_unitary_complexity",
    "exhaustive_state_complexity",
    "exhaustive_unitary_complexity",
    "phase_uniform_hit_probability",
    "union_bound_diagnostic",
]

DEFAULT_BUDGET = 10**6
METRICS = ("diamond", "opnorm", "hs")


class WordBudgetError(ValueError):
    """Enumeration would exceed the configured word budget."""


@dataclass(frozen=True)
class GateSet:
    """Labelled unitary gates of a common dimension."""

    labels: tuple[str, ...]
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("gate set is empty")
        if len(self.labels) != len(self.matrices):
            raise ValueError("labels and matrices differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"gate labels must be unique: {self.labels}")
        mats = tuple(check_unitary(np.asarray(m, dtype=complex)).copy() for m in self.matrices)
        if len({m.shape for m in mats}) != 1:
            raise ValueError("gates have different dimensions")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, np.ndarray]]) -> "GateSet":
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    def __len__(self) -> int:
        return len(self.labels)

    def to_bytes(self) -> bytes:
        """Each gate is a UTF-8 label line followed by one CMPX block."""
        out = bytearray()
        for label, m in zip(self.labels, self.matrices):
            if "\n" in label:
                raise ValueError("labels may not contain newlines")
            out += label.encode() + b"\n" + serialize(m)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "GateSet":
        labels, mats = [], []
        pos = 0
        while pos < len(data):
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ValueError("gate file: label line without newline")
            labels.append(data[pos:nl].decode())
            m, pos = deserialize(data, nl + 1)
            mats.append(m)
        return cls(tuple(labels), tuple(mats))

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GateSet":
        return cls.from_bytes(Path(path).read_bytes())


def default_gate_set() -> GateSet:
    """``diag(1, e^{i pi/8})`` (order 16) and the Hadamard gate."""
    r = np.diag([1.0, np.exp(1j * np.pi / 8)])
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    return GateSet(("R16", "H"), (r, h))


# -- distances ------------------------------------------------------------------


def _arcs(w: np.ndarray) -> np.ndarray:
    """Covering arc of the eigenphases of each matrix in a stack."""
    d = w.shape[-1]
    if d == 1:
        return np.zeros(w.shape[:-2])
    if d == 2:
        # up to phase w = cos(th) I + i sin(th) n.sigma; arc = 2 th with th in [0, pi/2]
        tr = w[..., 0, 0] + w[..., 1, 1]
        dev = w - (tr / 2)[..., None, None] * np.eye(2)
        s = np.sqrt(np.sum(np.abs(dev) ** 2, axis=(-2, -1)) / 2.0)
        return 2.0 * np.arctan2(s, np.abs(tr) / 2.0)
    return covering_arc(np.angle(np.linalg.eigvals(w)))


def distances_to(u: np.ndarray, stack: np.ndarray, metric: str = "diamond") -> np.ndarray:
    """Projective distance from ``u`` to every unitary in ``stack`` (shape ``(n, d, d)``)."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    u = np.asarray(u, dtype=complex)
    w = np.conj(np.swapaxes(stack, -1, -2)) @ u
    d = u.shape[0]
    if metric == "hs":
        tr = np.abs(np.trace(w, axis1=-2, axis2=-1))
        return np.sqrt(np.clip(2.0 * d - 2.0 * tr, 0.0, None))
    arc = _arcs(w)
    if metric == "opnorm":
        return 2.0 * np.sin(arc / 4.0)
    return np.where(arc < np.pi, 2.0 * np.sin(arc / 2.0), 2.0)


# -- enumeration ----------------------------------------------------------------


@dataclass(frozen=True)
class WordTable:
    """Kept words in breadth-first order.

    ``words[j]`` lists gate indices; the realised unitary is
    ``G[w_1] @ G[w_2] @ ... @ G[w_l]`` and is stored in ``unitaries[j]``.
    """

    words: tuple[tuple[int, ...], ...]
    unitaries: np.ndarray
    lengths: np.ndarray
    dedup_tol: float
    max_len: int

    def __len__(self) -> int:
        return len(self.words)

    def label(self, j: int, gs: GateSet) -> str:
        return "*".join(gs.labels[i] for i in self.words[j]) or "I"


def _check_budget(n_gates: int, max_len: int, budget: int) -> None:
    count = n_gates**max_len
    if count > budget:
        raise WordBudgetError(f"{n_gates}^{max_len} = {count} words exceed the budget of {budget}")


def enumerate_words(gs: GateSet, max_len: int, dedup_tol: float = 0.0, budget: int = DEFAULT_BUDGET) -> WordTable:
    """Breadth-first closure of the gate set up to ``max_len``.

    A candidate is dropped when its projective operator-norm distance to some
    already kept word is at most ``dedup_tol / max_len``. With
    ``dedup_tol = 0`` nothing is pruned.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    _check_budget(len(gs), max_len, budget)
    d = gs.d
    radius = dedup_tol / max_len if max_len and dedup_tol > 0 else 0.0
    words: list[tuple[int, ...]] = [()]
    lengths = [0]
    store = np.empty((16, d, d), dtype=complex)
    store[0] = np.eye(d)
    n = 1
    frontier = [0]
    for length in range(1, max_len + 1):
        nxt = []
        for parent in frontier:
            for g_idx, g in enumerate(gs.matrices):
                cand = store[parent] @ g
                if radius > 0 and np.any(distances_to(cand, store[:n], "opnorm") <= radius):
                    continue
                if n == store.shape[0]:
                    store = np.concatenate([store, np.empty_like(store)])
                store[n] = cand
                words.append(words[parent] + (g_idx,))
                lengths.append(length)
                nxt.append(n)
                n += 1
        frontier = nxt
    return WordTable(tuple(words), store[:n].copy(), np.array(lengths), float(dedup_tol), max_len)


def _first_hit(dist: np.ndarray, lengths: np.ndarray, eps: float) -> int | None:
    idx = np.flatnonzero(dist <= eps)
    return int(lengths[idx[0]]) if idx.size else None


def _prepare(gs, max_len, eps, dedup_tol, words, budget) -> WordTable:
    if not eps > 0:
        raise ValueError("eps must be positive")
    if dedup_tol > eps / 4:
        raise ValueError(f"dedup_tol = {dedup_tol} exceeds eps/4 = {eps / 4}")
    if words is None:
        return enumerate_words(gs, max_len, dedup_tol, budget)
    if words.dedup_tol > eps / 4:
        raise ValueError(f"word table built with dedup_tol = {words.dedup_tol} > eps/4")
    return words


def exact_unitary_complexity(
    u,
    gs: GateSet,
    eps: float,
    max_len: int,
    metric: str = "diamond",
    dedup_tol: float = 0.0,
    words: WordTable | None = None,
    budget: int = DEFAULT_BUDGET,
) -> int | None:
    """Shortest word within ``eps`` of ``u``; ``None`` means it exceeds ``max_len``.

    A prebuilt ``words`` table may be passed to amortise enumeration.
    """
    table = _prepare(gs, max_len, eps, dedup_tol, words, budget)
    return _first_hit(distances_to(u, table.unitaries, metric), table.lengths, eps)


def _state_distances(psi: np.ndarray, psi0: np.ndarray, table: WordTable) -> np.ndarray:
    reached = table.unitaries @ psi0
    overlap = np.abs(reached.conj() @ psi)
    return np.sqrt(np.clip(1.0 - overlap**2, 0.0, None))


def exact_state_complexity(
    psi,
    gs: GateSet,
    psi0,
    eps: float,
    max_len: int,
    dedup_tol: float = 0.0,
    words: WordTable | None = None,
    budget: int = DEFAULT_BUDGET,
) -> int | None:
    """Shortest word ``W`` with ``trace_distance(psi, W psi0) <= eps``, or ``None``."""
    table = _prepare(gs, max_len, eps, dedup_tol, words, budget)
    psi = np.asarray(psi, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    return _first_hit(_state_distances(psi, psi0, table), table.lengths, eps)


def _all_products(gs: GateSet, length: int):
    for word in itertools.product(range(len(gs)), repeat=length):
        m = np.eye(gs.d, dtype=complex)
        for i in word:
            m = m @ gs.matrices[i]
        yield m


def exhaustive_unitary_complexity(u, gs: GateSet, eps: float, max_len: int, metric: str = "diamond") -> int | None:
    """Reference answer: every product of every length, no pruning."""
    u = np.asarray(u, dtype=complex)
    for length in range(max_len + 1):
        stack = np.array(list(_all_products(gs, length)))
        if np.any(distances_to(u, stack, metric) <= eps):
            return length
    return None


def exhaustive_state_complexity(psi, gs: GateSet, psi0, eps: float, max_len: int) -> int | None:
    psi = np.asarray(psi, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    for length in range(max_len + 1):
        for m in _all_products(gs, length):
            if math.sqrt(max(0.0, 1.0 - abs(np.vdot(m @ psi0, psi)) ** 2)) <= eps:
                return length
    return None


# -- time-dependent complexity ------------------------------------------------


@dataclass(frozen=True)
class ComplexityCurve:
    """Complexity of ``U_t`` along a time grid for one sampled Hamiltonian.

    ``values[i]`` is ``None`` when the complexity exceeds ``max_len``.
    """

    t_grid: tuple[float, ...]
    values: tuple[int | None, ...]
    metric: str
    eps: float
    max_len: int
    sample_index: int

    def numeric(self) -> np.ndarray:
        """Values with "exceeds" mapped to ``max_len + 1``."""
        return np.array([self.max_len + 1 if v is None else v for v in self.values])

    @property
    def threshold(self) -> float | None:
        """First grid time with positive complexity."""
        pos = np.flatnonzero(self.numeric() > 0)
        return self.t_grid[pos[0]] if pos.size else None

    @property
    def jumps(self) -> bool:
        """Zero on a nonempty initial segment, then positive somewhere."""
        v = self.numeric()
        return bool(v[0] == 0 and np.any(v > 0))


@dataclass
class JumpCurveResult:
    curves: list[ComplexityCurve]
    word_count: int
    notes: dict = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        return np.array([c.numeric() for c in self.curves])

    def median_curve(self) -> np.ndarray:
        return np.median(self.matrix(), axis=0)

    def thresholds(self) -> list[float | None]:
        return [c.threshold for c in self.curves]

    def fraction_positive(self, j: int) -> float:
        return float(np.mean(self.matrix()[:, j] > 0))

    def jump_fraction(self) -> float:
        return float(np.mean([c.jumps for c in self.curves]))


def complexity_jump_curve(
    spec: EnsembleSpec,
    gs: GateSet,
    eps: float,
    t_grid: Sequence[float],
    n_samples: int,
    max_len: int,
    seed: int | None = None,
    metric: str = "diamond",
    dedup_tol: float = 0.0,
    budget: int = DEFAULT_BUDGET,
) -> JumpCurveResult:
    """Exact complexity of ``U_t = exp(-iHt)`` on ``t_grid`` for ``n_samples`` Hamiltonians.

    Sample ``i`` uses stream ``(seed, i)``.
    """
    if spec.d != gs.d:
        raise ValueError(f"ensemble dimension {spec.d} differs from gate dimension {gs.d}")
    seed = spec.seed if seed is None else seed
    table = _prepare(gs, max_len, eps, dedup_tol, None, budget)
    grid = tuple(float(t) for t in t_grid)
    curves = []
    for i in range(n_samples):
        s = eig_hermitian(sample_hamiltonian(spec, stream(seed, i)))
        vals = tuple(
            _first_hit(distances_to(evolve(s, t), table.unitaries, metric), table.lengths, eps) for t in grid
        )
        curves.append(ComplexityCurve(grid, vals, metric, eps, max_len, i))
    return JumpCurveResult(curves, len(table), {"dedup_tol": dedup_tol, "seed": seed})


def phase_uniform_hit_probability(w, eps: float, metric: str = "diamond", grid: int = 20000) -> float:
    """``P(D(diag(1, e^{i x}), W) <= eps)`` for ``x`` uniform on the circle (``d = 2``).

    This is the long-time law of a diagonal evolution with generic spectrum.
    For diagonal ``W`` the exact answer is ``2 arcsin(eps/2)/pi`` (diamond);
    in general a midpoint rule over ``grid`` phases is used.
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (2, 2):
        raise ValueError("phase-uniform model is for d = 2")
    x = (np.arange(grid) + 0.5) * (2 * np.pi / grid)
    stack = np.zeros((grid, 2, 2), dtype=complex)
    stack[:, 0, 0] = 1.0
    stack[:, 1, 1] = np.exp(1j * x)
    return float(np.mean(distances_to(w, stack, metric) <= eps))


def union_bound_diagnostic(
    spec: EnsembleSpec,
    gs: GateSet,
    eps: float,
    t: float,
    k: int,
    n_samples: int,
    seed: int | None = None,
    metric: str = "diamond",
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """Per-word hit frequencies ``P(U_t in B(W, eps))`` for all words shorter than ``k``.

    Returns a dict with ``rows`` (label, length, frequency, and for ``d = 2``
    the phase-uniform model probability), ``p_complexity_below_k`` and
    ``sum_frequencies``. By the union bound the sum dominates the probability.
    """
    seed = spec.seed if seed is None else seed
    table = enumerate_words(gs, max(k - 1, 0), 0.0, budget)
    hits = np.zeros(len(table))
    any_hit = 0
    for i in range(n_samples):
        s = eig_hermitian(sample_hamiltonian(spec, stream(seed, i)))
        inside = distances_to(evolve(s, t), table.unitaries, metric) <= eps
        hits += inside
        any_hit += bool(inside.any())
    freq = hits / n_samples
    rows = []
    for j in range(len(table)):
        row = {"word": table.label(j, gs), "length": int(table.lengths[j]), "frequency": float(freq[j])}
        if gs.d == 2:
            row["phase_uniform"] = phase_uniform_hit_probability(table.unitaries[j], eps, metric)
        rows.append(row)
    return {
        "rows": rows,
        "p_complexity_below_k": any_hit / n_samples,
        "sum_frequencies": float(freq.sum()),
        "n_samples": n_samples,
        "t": t,
        "k": k,
        "eps": eps,
    }
