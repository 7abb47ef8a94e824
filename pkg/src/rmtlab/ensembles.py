"""Seedable samplers for random Hamiltonians, Haar unitaries and Haar states.

Reproducibility rests on counter-based streams: the pair ``(seed, index)`` is
used verbatim as the 128-bit Philox key, so distinct pairs give distinct,
statistically independent generators and a Monte Carlo trial can be replayed
from its stream index alone, regardless of how trials were scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import hermitian

__all__ = [
    "EnsembleSpec",
    "Kind",
    "SeedStream",
    "haar_isometry",
    "sample_diag_gaussian",
    "sample_gue",
    "sample_hamiltonian",
    "sample_haar_state",
    "sample_haar_unitary",
    "sample_random_basis_gaussian",
    "sample_spectrum",
    "stream",
]

_U64 = 1 << 64


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator keyed by ``(seed, index)``; both must fit in 64 bits."""
    if not (0 <= seed < _U64 and 0 <= index < _U64):
        raise ValueError(f"seed and index must be unsigned 64-bit integers, got {seed}, {index}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


@dataclass(frozen=True)
class SeedStream:
    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        return stream(self.seed, self.index)

    def child(self, index: int) -> "SeedStream":
        return SeedStream(self.seed, index)


class Kind(str, Enum):
    GUE = "GUE"
    DIAG_GAUSSIAN = "DiagGaussian"
    RANDOM_BASIS_GAUSSIAN = "RandomBasisGaussian"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "gue": cls.GUE,
            "diaggaussian": cls.DIAG_GAUSSIAN,
            "diag": cls.DIAG_GAUSSIAN,
            "randombasisgaussian": cls.RANDOM_BASIS_GAUSSIAN,
            "randombasis": cls.RANDOM_BASIS_GAUSSIAN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown ensemble kind {text!r}") from None


@dataclass(frozen=True)
class EnsembleSpec:
    """Random-Hamiltonian model, dimension and (for GUE) entry variance.

    ``sigma2`` defaults to ``1/d`` for GUE and is fixed to 1 for the Gaussian
    eigenvalue models.
    """

    kind: Kind
    d: int
    sigma2: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind) if not isinstance(self.kind, Kind) else self.kind)
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", 1.0 / self.d if self.kind is Kind.GUE else 1.0)
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.kind is not Kind.GUE and self.sigma2 != 1.0:
            raise ValueError(f"{self.kind.value} has unit eigenvalue variance; sigma2 is GUE-only")

    @classmethod
    def gue(cls, d: int, sigma2: float | None = None, seed: int = 0) -> "EnsembleSpec":
        return cls(Kind.GUE, d, sigma2, seed)

    @classmethod
    def diag_gaussian(cls, d: int, seed: int = 0) -> "EnsembleSpec":
        return cls(Kind.DIAG_GAUSSIAN, d, None, seed)

    @classmethod
    def random_basis_gaussian(cls, d: int, seed: int = 0) -> "EnsembleSpec":
        return cls(Kind.RANDOM_BASIS_GAUSSIAN, d, None, seed)

    @property
    def label(self) -> str:
        return f"{self.kind.value}({self.d})"

    def to_text(self) -> str:
        return f"kind = {self.kind.value}\nd = {self.d}\nsigma2 = {self.sigma2!r}\nseed = {self.seed}\n"

    @classmethod
    def from_text(cls, text: str) -> "EnsembleSpec":
        fields = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed line {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            fields[key] = value
        missing = {"kind", "d"} - fields.keys()
        if missing:
            raise ValueError(f"missing keys: {sorted(missing)}")
        kind = Kind.parse(fields["kind"])
        sigma2 = float(fields["sigma2"]) if "sigma2" in fields else None
        if kind is not Kind.GUE and sigma2 == 1.0:
            sigma2 = None
        return cls(kind, int(fields["d"]), sigma2, int(fields.get("seed", 0)))


def sample_gue(d: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """GUE(d, sigma2): real N(0, sigma2) diagonal, complex off-diagonal entries
    whose real and imaginary parts each have variance sigma2/2."""
    if d < 1 or not sigma2 > 0:
        raise ValueError("need d >= 1 and sigma2 > 0")
    s = np.sqrt(sigma2)
    x = rng.standard_normal((d, d)) * s
    y = rng.standard_normal((d, d)) * s
    lower = np.tril((x + 1j * y) / np.sqrt(2), -1)
    h = lower + lower.conj().T + np.diag(np.diag(x))
    return hermitian(h)


def haar_isometry(d: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """First ``m`` columns of a Haar-random ``d x d`` unitary.

    QR of a complex Ginibre matrix; each column of Q is divided by the phase of
    the matching diagonal entry of R, which makes the law exactly Haar.
    """
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    z = (rng.standard_normal((d, m)) + 1j * rng.standard_normal((d, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phases = np.where(diag == 0, 1.0, diag / np.abs(diag))
    return q * phases.conj()


def sample_haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(d, d, rng)


def sample_haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def sample_diag_gaussian(d: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(rng.standard_normal(d)).astype(complex)


def sample_random_basis_gaussian(d: int, rng: np.random.Generator) -> np.ndarray:
    """``U D U^dagger`` with Haar ``U`` and i.i.d. N(0, 1) diagonal ``D``."""
    u = sample_haar_unitary(d, rng)
    lam = rng.standard_normal(d)
    return hermitian((u * lam) @ u.conj().T)


def sample_hamiltonian(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind is Kind.GUE:
        return sample_gue(spec.d, spec.sigma2, rng)
    if spec.kind is Kind.DIAG_GAUSSIAN:
        return sample_diag_gaussian(spec.d, rng)
    return sample_random_basis_gaussian(spec.d, rng)


def sample_spectrum(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Eigenvalues only, ascending.

    For the Gaussian models the spectrum is i.i.d. N(0, 1) and is drawn
    directly, skipping the O(d^3) basis.
    """
    if spec.kind is Kind.GUE:
        return np.linalg.eigvalsh(sample_gue(spec.d, spec.sigma2, rng))
    return np.sort(rng.standard_normal(spec.d))
