"""Closed-form time evolution of Maxwell's equations on periodic boxes."""
from .errors import (CflViolation, CurlwaveError, DuplicateWaveVector, EmptyGrid,
                     FormatError, NonFiniteSample, OffLatticeMode, ZeroWaveVector)
from .ingest import (FieldGrid, ModeList, grid_to_modes, modes_to_grid, read_grid,
                     read_mode_list, synthesize, write_grid, write_mode_list)
from .propagator import (Medium, ModalSolution, Mode, build_solution, evaluate,
                         evaluate_delta, evolve_modes, pack_fields, unpack_fields)
from .spectral_core import (Branch, EigenSystem, ModalProjection, WaveVector,
                            curl_planewave, decompose_mode, eigenvalues, eigenvectors,
                            project)

__version__ = "0.1.0"
