"""Spectra, adiabatic protocols and Fermi-acceleration permutations for moving rectangular boxes."""

import os as _os

# BOXCTL_THREADS caps BLAS/OpenMP threads; must be set before numpy loads its backend
if "BOXCTL_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["BOXCTL_THREADS"])

from .spectrum import Mode, Rect, SpectrumIndex, build_index, crossing_times, mode_energy, resonance_length  # noqa: E402
from .paths import DeformationPath, SideLaw  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "Mode",
    "Rect",
    "SpectrumIndex",
    "build_index",
    "crossing_times",
    "mode_energy",
    "resonance_length",
    "DeformationPath",
    "SideLaw",
]
