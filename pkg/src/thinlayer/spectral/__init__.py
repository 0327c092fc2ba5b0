from ._kernels import get_kernels
from .solver import (
    BC,
    BoundState,
    Grid,
    Pencil,
    SpectrumReport,
    SturmLiouvilleProblem,
    count_below,
    count_negative,
    default_ladder,
    discretize,
    integrate,
    lowest_eigenpairs,
    make_grid,
    node_count,
    refine_to_convergence,
    spectrum_below,
)

__all__ = [
    "BC",
    "BoundState",
    "Grid",
    "Pencil",
    "SpectrumReport",
    "SturmLiouvilleProblem",
    "count_below",
    "count_negative",
    "default_ladder",
    "discretize",
    "get_kernels",
    "integrate",
    "lowest_eigenpairs",
    "make_grid",
    "node_count",
    "refine_to_convergence",
    "spectrum_below",
]
