"""Random-Hamiltonian evolution, unitary-channel metrics and circuit complexity checks.

Submodules: ``linalg``, ``ensembles``, ``metrics``, ``spectral``,
``concentration``, ``complexity``, ``compiler``, ``experiments`` and ``cli``.
"""

from ._version import __version__
from .ensembles import EnsembleSpec, Kind, SeedStream, stream
from .linalg import Spectrum, eig_hermitian, evolve

__all__ = ["EnsembleSpec", "Kind", "SeedStream", "Spectrum", "__version__", "eig_hermitian", "evolve", "stream"]
