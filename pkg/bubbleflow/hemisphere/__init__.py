from bubbleflow.hemisphere.basis import (
    BasisTable,
    Jet,
    Mode,
    Sampler,
    SpectralField,
    build_basis,
    equator_trace,
    laplacian,
    parity_split,
)
from bubbleflow.hemisphere.grid import HemisphereGrid, quadrature, unit_sphere

__all__ = [
    "BasisTable",
    "HemisphereGrid",
    "Jet",
    "Mode",
    "Sampler",
    "SpectralField",
    "build_basis",
    "equator_trace",
    "laplacian",
    "parity_split",
    "quadrature",
    "unit_sphere",
]
