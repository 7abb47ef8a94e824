"""Compile ``exp(-iHt)`` for diagonal ``H`` on ``n`` qubits into CNOT and Z rotations.

Write ``H = sum_alpha lambda_alpha Z^alpha`` (Walsh expansion). Each term is
``exp(-i t lambda_alpha Z^alpha) = V_alpha RZ_p(2 t lambda_alpha) V_alpha^dagger``,
where ``V_alpha`` is a fan-in of CNOTs onto the pivot ``p`` (lowest set bit of
``alpha``) and ``RZ(theta) = diag(e^{-i theta/2}, e^{i theta/2})``. Rotation
angles are rounded to a grid so each rotation has operator-norm error at most
``delta = eps / #terms``; the terms commute, so errors add.

Qubit ``j`` is bit ``j`` of the basis index (qubit 0 is the least significant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .metrics import covering_arc, opnorm_from_arc

__all__ = [
    "CNOT",
    "RZ",
    "RZQ",
    "Circuit",
    "CircuitStructureError",
    "GateCountFit",
    "WalshCoefficients",
    "build_conjugator",
    "compile_diagonal",
    "format_circuit",
    "gate_count_report",
    "parse_circuit",
    "rz_quantized",
    "simulate_monomial",
    "verify_circuit",
    "walsh_decompose",
]

MAX_QUBITS = 20


class CircuitStructureError(ValueError):
    """The circuit does not realise a diagonal unitary (its permutation is not the identity)."""


def _num_qubits(length: int) -> int:
    n = length.bit_length() - 1
    if length < 1 or 1 << n != length:
        raise ValueError(f"diagonal length {length} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the limit of {MAX_QUBITS}")
    return n


@dataclass(frozen=True)
class WalshCoefficients:
    """``coeffs[alpha] = lambda_alpha``; ``H_xx = sum_alpha lambda_alpha (-1)^{popcount(alpha & x)}``."""

    n: int
    coeffs: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return _fwht(self.coeffs)

    def nonzero(self, atol: float = 0.0) -> list[int]:
        """Masks ``alpha != 0`` with ``|lambda_alpha| > atol``, ascending."""
        return [int(a) for a in np.flatnonzero(np.abs(self.coeffs) > atol) if a != 0]


def _fwht(v) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, O(N log N)."""
    a = np.array(v, dtype=float)
    h = 1
    n = a.size
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
        h *= 2
    return a.reshape(n)


def walsh_decompose(diag: Sequence[float], n: int | None = None) -> WalshCoefficients:
    """``lambda_alpha = 2^{-n} sum_x (-1)^{popcount(alpha & x)} H_xx``."""
    diag = np.asarray(diag, dtype=float).ravel()
    m = _num_qubits(diag.size)
    if n is not None and n != m:
        raise ValueError(f"expected 2^{n} entries, got {diag.size}")
    return WalshCoefficients(m, _fwht(diag) / diag.size)


# -- gates and circuits -----------------------------------------------------------


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")


@dataclass(frozen=True)
class RZ:
    qubit: int
    angle: float


@dataclass(frozen=True)
class RZQ:
    """Z rotation whose angle lies on a grid with operator-norm error at most ``delta``."""

    qubit: int
    angle: float
    delta: float


Gate = Union[CNOT, RZ, RZQ]


@dataclass
class CompileLedger:
    """What :func:`compile_diagonal` emitted, for cross-checking gate counts."""

    terms: list[tuple[int, float, int]] = field(default_factory=list)  # (alpha, lambda, support size)
    delta: float = 0.0

    @property
    def expected_cnots(self) -> int:
        return sum(2 * (s - 1) for _, _, s in self.terms)

    @property
    def expected_gates(self) -> int:
        return self.expected_cnots + len(self.terms)


@dataclass
class Circuit:
    n: int
    gates: list = field(default_factory=list)
    ledger: CompileLedger | None = field(default=None, compare=False)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g) -> None:
        qubits = (g.control, g.target) if isinstance(g, CNOT) else (g.qubit,)
        if any(not 0 <= q < self.n for q in qubits):
            raise ValueError(f"{g} addresses a qubit outside 0..{self.n - 1}")

    def append(self, g) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    @property
    def cnot_count(self) -> int:
        return sum(isinstance(g, CNOT) for g in self.gates)

    @property
    def rotation_count(self) -> int:
        return len(self.gates) - self.cnot_count

    def __len__(self) -> int:
        return len(self.gates)


def build_conjugator(alpha: int, n: int | None = None) -> tuple[list[CNOT], int]:
    """CNOTs ``V_alpha`` and pivot ``p`` with ``V_alpha Z_p V_alpha^dagger = Z^alpha``.

    ``p`` is the lowest set bit; every other support bit ``j`` contributes
    ``CNOT(j -> p)``, using ``CNOT(j->p) Z_p CNOT(j->p) = Z_j Z_p``. The
    CNOTs commute, so ``V_alpha`` is its own inverse.
    """
    if alpha <= 0:
        raise ValueError("alpha must be a nonzero mask")
    if n is not None and alpha >> n:
        raise ValueError(f"mask {alpha:b} has bits beyond {n} qubits")
    pivot = (alpha & -alpha).bit_length() - 1
    rest = [j for j in range(alpha.bit_length()) if (alpha >> j) & 1 and j != pivot]
    return [CNOT(j, pivot) for j in rest], pivot


def _wrap(angle: float) -> float:
    return (angle + 2 * math.pi) % (4 * math.pi) - 2 * math.pi  # RZ has period 4 pi


def rz_quantized(angle: float, delta: float, qubit: int = 0) -> RZQ:
    """Round ``angle`` to the grid ``k * 2 arcsin(delta/2)``.

    The rounding error ``eta`` is at most half the spacing, so
    ``||RZ(theta) - RZ(theta_hat)||_op = 2|sin(eta/4)| <= delta``.
    For ``delta >= 2`` every rotation is within ``delta`` of the identity.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if delta >= 2.0:
        return RZQ(qubit, 0.0, delta)
    step = 2.0 * math.asin(delta / 2.0)
    return RZQ(qubit, _wrap(round(angle / step) * step), delta)


def compile_diagonal(
    h_diag: Sequence[float],
    n: int,
    t: float,
    eps: float,
    exact: bool = False,
    coeff_atol: float = 0.0,
) -> Circuit:
    """Circuit approximating ``exp(-iHt)`` to projective operator-norm error ``eps``.

    Terms are emitted in ascending mask order; the ``alpha = 0`` term is a
    global phase and is dropped. With ``exact=True`` plain ``RZ`` gates are
    used. The per-term budget and emitted term list are kept on
    ``circuit.ledger``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    w = walsh_decompose(h_diag, n)
    masks = w.nonzero(coeff_atol)
    ledger = CompileLedger(delta=eps / len(masks) if masks else eps)
    c = Circuit(n)
    for alpha in masks:
        lam = float(w.coeffs[alpha])
        conj, p = build_conjugator(alpha, n)
        theta = 2.0 * t * lam
        rot = RZ(p, theta) if exact else rz_quantized(theta, ledger.delta, p)
        c.extend(conj)
        c.append(rot)
        c.extend(reversed(conj))
        ledger.terms.append((alpha, lam, len(conj) + 1))
    c.ledger = ledger
    return c


def simulate_monomial(c: Circuit) -> tuple[np.ndarray, np.ndarray]:
    """Circuit unitary as ``U|x> = phase[x] |perm[x]>``.

    CNOTs permute basis states; rotations multiply phases according to the
    current value of their qubit. Cost O(len(c) 2^n).
    """
    dim = 1 << c.n
    state = np.arange(dim, dtype=np.int64)  # where |x> currently sits
    log_phase = np.zeros(dim)
    for g in c.gates:
        if isinstance(g, CNOT):
            bit = (state >> g.control) & 1
            state = state ^ (bit << g.target)
        else:
            z = 1 - 2 * ((state >> g.qubit) & 1)  # +1 for |0>, -1 for |1>
            log_phase += -0.5 * g.angle * z
    return state, log_phase


def _target_phases(h_diag, t: float) -> np.ndarray:
    return -np.asarray(h_diag, dtype=float) * t


def verify_circuit(c: Circuit, h_diag: Sequence[float], n: int, t: float) -> float:
    """Projective operator-norm distance between the circuit and ``exp(-iHt)``.

    Raises :class:`CircuitStructureError` if the circuit's permutation part
    is not the identity.
    """
    h_diag = np.asarray(h_diag, dtype=float)
    if h_diag.size != 1 << n or c.n != n:
        raise ValueError(f"circuit has {c.n} qubits, diagonal has {h_diag.size} entries, n = {n}")
    perm, log_phase = simulate_monomial(c)
    moved = np.flatnonzero(perm != np.arange(perm.size))
    if moved.size:
        raise CircuitStructureError(
            f"verify_circuit: circuit permutes {moved.size} basis states (first |{moved[0]}> -> |{perm[moved[0]]}>); "
            "conjugators are unbalanced"
        )
    diff = log_phase - _target_phases(h_diag, t)
    return float(opnorm_from_arc(covering_arc(diff)))


# -- gate counts ------------------------------------------------------------------


@dataclass(frozen=True)
class GateCountFit:
    """Least-squares fit ``count ~ a * n 2^n * log2(1/eps) + b * n 2^n``.

    This is the linear form of ``A n 2^n (B + log2(1/eps))`` with ``A = a``
    and ``B = b/a``; the linear form stays well posed when the count does not
    grow with ``log(1/eps)`` (``a ~ 0``), in which case ``B`` is reported as inf.

    Rotations are rounded to a fixed grid, so the exponent on ``log(1/eps)``
    is 1 by construction; ``label`` marks ``A`` and ``B`` as proxy constants
    of that scheme rather than of a general synthesis method.
    """

    a: float
    b: float
    rows: list[dict]
    max_relative_residual: float
    label: str = "proxy: quantized rotations, log(1/eps) exponent 1"

    @property
    def A(self) -> float:
        return self.a

    @property
    def B(self) -> float:
        if abs(self.a) <= 1e-9 * abs(self.b):
            return math.inf
        return self.b / self.a


def gate_count_report(rows: Sequence[dict]) -> GateCountFit:
    """Fit gate counts; each row needs keys ``n``, ``eps``, ``gates``.

    Adds ``bound = 4 n 2^n (n + log2(1/eps))``, ``fit`` and ``residual`` to each row.
    """
    n = np.array([r["n"] for r in rows], dtype=float)
    eps = np.array([r["eps"] for r in rows], dtype=float)
    y = np.array([r["gates"] for r in rows], dtype=float)
    scale = n * 2.0**n
    X = np.column_stack([scale * np.log2(1.0 / eps), scale])
    # relative least squares: weight each row by 1/y
    wgt = 1.0 / np.maximum(y, 1.0)
    coef, *_ = np.linalg.lstsq(X * wgt[:, None], y * wgt, rcond=None)
    fit = X @ coef
    resid = (y - fit) / np.maximum(y, 1.0)
    out = []
    for r, f, e, ni, ei in zip(rows, fit, resid, n, eps):
        row = dict(r)
        row.update(fit=float(f), residual=float(e), bound=float(4 * ni * 2**ni * (ni + math.log2(1 / ei))))
        out.append(row)
    return GateCountFit(float(coef[0]), float(coef[1]), out, float(np.max(np.abs(resid))))


# -- text format --------------------------------------------------------------------


def format_circuit(c: Circuit) -> str:
    lines = [f"QUBITS {c.n}"]
    for g in c.gates:
        if isinstance(g, CNOT):
            lines.append(f"CNOT {g.control} {g.target}")
        elif isinstance(g, RZQ):
            lines.append(f"RZQ {g.qubit} {g.angle:.17g} {g.delta:.17g}")
        else:
            lines.append(f"RZ {g.qubit} {g.angle:.17g}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Inverse of :func:`format_circuit`; ``#`` starts a comment."""
    c: Circuit | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].upper()
        try:
            if op == "QUBITS":
                if c is not None:
                    raise ValueError("duplicate QUBITS header")
                c = Circuit(int(parts[1]))
                continue
            if c is None:
                raise ValueError("missing QUBITS header")
            if op == "CNOT" and len(parts) == 3:
                c.append(CNOT(int(parts[1]), int(parts[2])))
            elif op == "RZ" and len(parts) == 3:
                c.append(RZ(int(parts[1]), float(parts[2])))
            elif op == "RZQ" and len(parts) == 4:
                c.append(RZQ(int(parts[1]), float(parts[2]), float(parts[3])))
            else:
                raise ValueError(f"unrecognised gate {line!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if c is None:
        raise ValueError("missing QUBITS header")
    return c


def read_circuit(path) -> Circuit:
    return parse_circuit(Path(path).read_text())


def write_circuit(c: Circuit, path, header: Sequence[str] = ()) -> None:
    text = "".join(f"# {h}\n" for h in header) + format_circuit(c)
    Path(path).write_text(text)
