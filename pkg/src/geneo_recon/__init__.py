"""Sparse 2D signal reconstruction with translation-equivariant pattern matching.

Submodules
----------
grid       grid types and file formats
sampling   uniform sampling and corruption of ground truth
patterns   disk tiling, pattern extraction, rotation, library files
geneo      confidence fields and argmax reconstruction
tda        cubical sublevel persistence and Wasserstein distances
scenario   SINR maps and a synthetic urban generator
baselines  1-nearest-neighbour reconstruction, MSE
harness    leave-one-out and zero-shot experiments
"""

from ._backend import BACKEND
from .baselines import knn1_reconstruct, mse
from .geneo import (
    ConfidenceField,
    ReconstructionResult,
    confidence_field,
    confidence_stack,
    mismatch_field,
    reconstruct,
    reconstruct_sampling,
    reliability_field,
)
from .grid import GridSignal, PixelCoord, ReliabilityMask, SparseSampling, mask_of, read_grid, write_grid
from .patterns import (
    DiskMask,
    Pattern,
    PatternLibrary,
    augment_rotations,
    build_library,
    extract_patterns,
    rotate_pattern,
    tile_circles,
)
from .sampling import SamplingSpec, corrupt, gaussian_embed, sample_uniform
from .tda import PersistenceDiagram, PersistencePoint, sublevel_persistence, topo_distance, wasserstein

__version__ = "0.1.0"
