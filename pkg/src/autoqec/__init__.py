"""Network-composition engine and Lindblad simulator for an autonomous
quantum-error-correcting memory cell.

Subpackages by concern: :mod:`autoqec.spaces` (operator algebra over
labeled composite Hilbert spaces), :mod:`autoqec.slh` (component
triples and their composition products), :mod:`autoqec.components`
(the component catalog), :mod:`autoqec.network` (memory-cell assembly),
:mod:`autoqec.lindblad` (master-equation integration and observables),
:mod:`autoqec.cli` (command-line front end).
"""

from .lindblad import (
    FidelityTrace,
    IntegrationError,
    IntegratorOptions,
    LindbladModel,
    baseline_three_qubit,
    bare_qubit_fidelity,
    integrate,
    rhs,
    steady_state,
)
from .network import (
    MemoryParams,
    assemble_memory,
    codeword_state,
    fidelity_projector,
    initial_density,
    memory_space,
    stark_shift_table,
)
from .slh import SlhTriple, coherent_drive, concatenate, series, to_lindblad
from .spaces import CompositeSpace, Operator, SubsystemLabel, embed, pauli_library

__all__ = [
    "CompositeSpace",
    "FidelityTrace",
    "IntegrationError",
    "IntegratorOptions",
    "LindbladModel",
    "MemoryParams",
    "Operator",
    "SlhTriple",
    "SubsystemLabel",
    "assemble_memory",
    "bare_qubit_fidelity",
    "baseline_three_qubit",
    "codeword_state",
    "coherent_drive",
    "concatenate",
    "embed",
    "fidelity_projector",
    "initial_density",
    "integrate",
    "memory_space",
    "pauli_library",
    "rhs",
    "series",
    "stark_shift_table",
    "steady_state",
    "to_lindblad",
]

__version__ = "0.1.0"
