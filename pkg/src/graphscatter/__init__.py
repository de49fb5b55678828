"""Scattering of one and two interacting particles on graphs with rails."""

from .graphs import (
    ChainCondition,
    Family,
    FamilySpec,
    Graph,
    build_graph,
    chain_condition,
    family_from_string,
    make_family,
    read_graph_file,
    write_graph_file,
)
from .single import (
    energy_to_z,
    psi_matrix,
    q_matrix,
    s_matrix_1p,
    s_matrix_at_energy,
    transmission_1p,
)
from .bound import (
    BoundClass,
    BoundState,
    BoundStateSet,
    bound_states,
    classify_bound_states,
    gamma,
    gamma_inverse,
    solve_qep,
    verify_residues,
)
from .twoparticle import (
    BoundLeg,
    FreeLeg,
    Statistics,
    TwoParticleKernel,
    j_matrix,
    kernel,
    omega_minus,
    psi_psi_dagger_check,
    r_amplitude,
)
from .observables import (
    CrossSectionResult,
    ProcessBudget,
    cross_section,
    ejection_probability,
    elastic_amplitude,
    inelastic_amplitude,
    optical_theorem_residual,
    process_budget,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
