"""Dense complex linear algebra for Hamiltonians, evolutions and pure states.

Matrices are plain ``numpy`` arrays. The helpers here validate and normalise
them (``hermitian``, ``check_unitary``, ``pure_state``) so the rest of the
package can stay array-oriented.

Time evolution follows ``U_t = exp(-i H t)``. Every ensemble used in the
package is symmetric under ``H -> -H``, so distributional statements do not
depend on the sign.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "EigenSolverError",
    "MatrixFormatError",
    "Spectrum",
    "apply_state",
    "check_unitary",
    "deserialize",
    "eig_hermitian",
    "evolve",
    "hermitian",
    "pure_state",
    "read_matrix",
    "serialize",
    "write_matrix",
]

MAGIC = b"CMPX"
VERSION = 1
_HEADER = struct.Struct("<4sBI")

UNITARY_ATOL = 1e-10
RECONSTRUCT_RTOL = 1e-9
STATE_NORM_ATOL = 1e-12


class EigenSolverError(RuntimeError):
    """The Hermitian eigensolver failed to converge."""


class MatrixFormatError(ValueError):
    """A serialized matrix could not be parsed."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def hermitian(a) -> np.ndarray:
    """Return ``(a + a^dagger) / 2`` as a read-only complex array.

    Raises ``ValueError`` for non-square or non-finite input.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return _frozen((a + a.conj().T) / 2)


def check_unitary(u, atol: float | None = None) -> np.ndarray:
    """Validate ``u`` as unitary (``U U^dagger = I`` within ``1e-10 * d``)."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    d = u.shape[0]
    tol = UNITARY_ATOL * d if atol is None else atol
    err = np.max(np.abs(u @ u.conj().T - np.eye(d)))
    if not err <= tol:
        raise ValueError(f"matrix is not unitary: max |UU^dag - I| = {err:.3e} > {tol:.1e}")
    return u


def pure_state(amplitudes, normalize: bool = False) -> np.ndarray:
    """Return amplitudes as a complex vector of unit norm.

    With ``normalize=False`` the input must already have norm 1 within 1e-12.
    """
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if normalize:
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        return _frozen(psi / nrm)
    if abs(nrm - 1.0) > STATE_NORM_ATOL:
        raise ValueError(f"state norm {nrm!r} differs from 1")
    return _frozen(psi)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition ``H = V diag(eigenvalues) V^dagger``.

    ``eigenvalues`` are ascending; each column of ``eigenvectors`` has its first
    non-negligible component real and positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # first component above 1e-12 of each column made real positive
    mags = np.abs(v)
    idx = np.argmax(mags > 1e-12 * mags.max(axis=0, keepdims=True), axis=0)
    lead = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(lead) / lead)


def eig_hermitian(h) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrised first. Raises ``EigenSolverError`` (with the
    condition number of ``H`` in the message) if LAPACK does not converge.
    """
    h = hermitian(h)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(h)
        raise EigenSolverError(
            f"eigh did not converge for {h.shape[0]}x{h.shape[0]} matrix "
            f"(condition number {cond:.3e}, max |entry| {np.abs(h).max():.3e})"
        ) from exc
    return Spectrum(_frozen(w), _frozen(_fix_phases(v)))


def evolve(spectrum: Spectrum, t: float) -> np.ndarray:
    """``U_t = V diag(exp(-i lambda t)) V^dagger``."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    v = spectrum.eigenvectors
    return (v * np.exp(-1j * spectrum.eigenvalues * t)) @ v.conj().T


def apply_state(u, psi) -> np.ndarray:
    u = np.asarray(u)
    psi = np.asarray(psi)
    if u.shape != (psi.shape[0], psi.shape[0]):
        raise ValueError(f"dimension mismatch: operator {u.shape}, state {psi.shape}")
    return u @ psi


def serialize(m) -> bytes:
    """Encode a square complex matrix in the ``CMPX`` v1 binary format.

    Layout: ``b"CMPX"``, version byte ``1``, little-endian ``uint32`` dimension,
    then ``2 d^2`` little-endian float64 values (row-major, real/imag interleaved).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    body = np.ascontiguousarray(m).view(np.float64).astype("<f8", copy=False).tobytes()
    return _HEADER.pack(MAGIC, VERSION, d) + body


def deserialize(data: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Decode one ``CMPX`` block starting at ``offset``.

    Returns the matrix and the offset just past the block.
    """
    if len(data) - offset < _HEADER.size:
        raise MatrixFormatError("truncated header")
    magic, version, d = _HEADER.unpack_from(data, offset)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"unsupported version {version}")
    if d == 0:
        raise MatrixFormatError("dimension header is zero")
    start = offset + _HEADER.size
    nbytes = 16 * d * d
    if len(data) - start < nbytes:
        raise MatrixFormatError(
            f"truncated body: header says d={d} ({nbytes} bytes), only {len(data) - start} present"
        )
    flat = np.frombuffer(data, dtype="<f8", count=2 * d * d, offset=start)
    m = flat.astype(np.float64).view(complex).reshape(d, d)
    return m, start + nbytes


def write_matrix(m, path) -> None:
    Path(path).write_bytes(serialize(m))


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m, end = deserialize(data)
    if end != len(data):
        raise MatrixFormatError(f"{len(data) - end} trailing bytes after matrix")
    return m
