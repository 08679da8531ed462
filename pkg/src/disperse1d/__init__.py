"""Numerical dispersive estimates for one-dimensional Schrödinger and Klein–Gordon flows.

Scattering data come from Jost solutions; propagator kernels are synthesized
from them and checked against a dense eigendecomposition oracle.
"""

from .decayfit import DecaySeries, fit_decay, kg_response, schrodinger_decay, sobolev_norm
from .errors import Disperse1DError
from .jost import JostField, KGrid, jost_field, x_grid
from .oracle import DiscreteHamiltonian, discretize, eig_propagator, oracle_kernel
from .oscquad import OscIntegral, fresnel, oscint
from .potential import Potential, make_potential
from .propagator import (KernelField, kg_apply, schrodinger_kernel_direct,
                         schrodinger_kernel_fresnel)
from .scattering import ResonanceClass, ScatteringData, compute_scattering
from .wiener import WienerProfile, psi_profile

__version__ = "0.1.0"

__all__ = [
    "DecaySeries", "Disperse1DError", "DiscreteHamiltonian", "JostField", "KGrid",
    "KernelField", "OscIntegral", "Potential", "ResonanceClass", "ScatteringData",
    "WienerProfile", "compute_scattering", "discretize", "eig_propagator", "fit_decay",
    "fresnel", "jost_field", "kg_apply", "kg_response", "make_potential", "oracle_kernel",
    "oscint", "psi_profile", "schrodinger_decay", "schrodinger_kernel_direct",
    "schrodinger_kernel_fresnel", "sobolev_norm", "x_grid",
]
