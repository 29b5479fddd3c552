"""gadgetforge: perturbative-gadget Hamiltonians, an interaction-class
classifier, exactly solvable XY-chain quantities, and a lattice compiler,
with numerical verification of every closed form at desk scale."""

__version__ = "0.1.0"

from .gadgets import XYZCoupling, classify, stoquastic_witness, tilde
from .pauli import PauliOperator, PauliString
from .spectra import eig_dense, low_eigs
from .sw import GadgetInstance, measure_simulation, sw_numerical_effective

__all__ = [
    "XYZCoupling",
    "classify",
    "stoquastic_witness",
    "tilde",
    "PauliOperator",
    "PauliString",
    "eig_dense",
    "low_eigs",
    "GadgetInstance",
    "measure_simulation",
    "sw_numerical_effective",
    "__version__",
]
