"""Quantum Zeno dynamics of a driven atom-cavity-fiber network.

A six-level control atom sits in one cavity, two three-level storage atoms
in another, and the cavities talk through a short optical fiber carrying
two polarization modes.  When the cavity and fiber couplings dominate the
classical drives, the driven dynamics is pinned to the dark subspace of the
strong Hamiltonian and reduces to an exactly solvable three-state rotation
per polarization sector.  This package builds the full bosonic model,
extracts the Zeno structure (clustered eigenprojections, dark/bright bases,
effective generators), and runs the entanglement protocols that live on top
of it.
"""

from .spaces import (
    DensityOp,
    HADAMARD,
    HilbertSpace,
    InvalidSubsystemError,
    MODE_NAMES,
    RestrictedSpace,
    SpaceMismatchError,
    State,
    SubsystemSpec,
    apply_mode_gate,
    density,
    embed,
    fidelity,
    inner,
    negativity,
    partial_trace,
    standard_subsystems,
)
from .model import (
    Branch,
    BranchModel,
    ClosureOverflowError,
    FiberSpec,
    HamiltonianParts,
    SystemParams,
    UniformParams,
    build_branch_model,
    build_hamiltonian,
    chain_hamiltonian,
    excitation_number,
    full_space,
    initial_state,
    number_commutator_maxabs,
    reachable_subspace,
    restrict,
    sector_kets,
    to_dense,
)
from .zeno import (
    ClusterAmbiguityError,
    DarkBrightBasis,
    DegenerateStructureError,
    ZenoDecomposition,
    analytic_dark_bright,
    bright_comparison,
    decompose,
    limiting_generator,
    predicted_strong_spectrum,
    principal_angles,
    printed_bright_forms,
    sector_dark_columns,
    zeno_hamiltonian,
)
from .dynamics import (
    HALF_PI,
    PI,
    DriveAngles,
    Propagator,
    compare_full_vs_effective,
    effective_generator,
    effective_matrix,
    evolve,
    solve_timing,
    zeno_ratio,
)
from .protocols import (
    Engine,
    GateConvention,
    Interpretation,
    Protocol,
    ProtocolResult,
    ProtocolSpec,
    default_params,
    default_spec,
    hadamard_and_reduce,
    run,
    target_state,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "BranchModel",
    "ClosureOverflowError",
    "ClusterAmbiguityError",
    "DarkBrightBasis",
    "DegenerateStructureError",
    "DensityOp",
    "DriveAngles",
    "Engine",
    "FiberSpec",
    "GateConvention",
    "HADAMARD",
    "HALF_PI",
    "HamiltonianParts",
    "HilbertSpace",
    "Interpretation",
    "InvalidSubsystemError",
    "MODE_NAMES",
    "PI",
    "Propagator",
    "Protocol",
    "ProtocolResult",
    "ProtocolSpec",
    "RestrictedSpace",
    "SpaceMismatchError",
    "State",
    "SubsystemSpec",
    "SystemParams",
    "UniformParams",
    "ZenoDecomposition",
    "analytic_dark_bright",
    "apply_mode_gate",
    "bright_comparison",
    "build_branch_model",
    "build_hamiltonian",
    "chain_hamiltonian",
    "compare_full_vs_effective",
    "decompose",
    "default_params",
    "default_spec",
    "density",
    "effective_generator",
    "effective_matrix",
    "embed",
    "evolve",
    "excitation_number",
    "fidelity",
    "full_space",
    "hadamard_and_reduce",
    "initial_state",
    "inner",
    "limiting_generator",
    "negativity",
    "number_commutator_maxabs",
    "partial_trace",
    "predicted_strong_spectrum",
    "principal_angles",
    "printed_bright_forms",
    "reachable_subspace",
    "restrict",
    "run",
    "sector_dark_columns",
    "sector_kets",
    "solve_timing",
    "standard_subsystems",
    "target_state",
    "to_dense",
    "zeno_hamiltonian",
    "zeno_ratio",
]
