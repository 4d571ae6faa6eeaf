"""Synthetic gauge-field lattice models on driven superconducting-circuit-style
hardware: real-space graph builders, topological invariants, edge spectra and
flux pumping, and open/driven time-domain simulation."""

from .errors import ConfigError, GapClosingError, LatticeError, NumericalError
from .lattice import (
    FluxSpec,
    LandauGauge,
    LatticeGraph,
    Link,
    Site,
    apply_disorder,
    assemble_hamiltonian,
    gauge_transform,
    graph_from_json,
    graph_to_json,
    insert_vacancy_flux,
    link_product,
    peierls_phase,
    plaquette_flux,
    sparse_triplets,
)
from .models import (
    AnnulusParams,
    BlochModel,
    CageConfig,
    JcParams,
    LadderParams,
    NodalParams,
    QshParams,
    SshParams,
    SocChainParams,
    TwoBandModel,
    abelian_pi_cage,
    hofstadter_annulus,
    hofstadter_bloch,
    hofstadter_grid,
    interference_matrix,
    jc_dressed_energies,
    necklace3,
    nodal_bloch,
    nodal_loop_chain,
    qsh_lattice,
    rhombic_abcage,
    soc_bloch,
    soc_chain,
    ssh_bloch,
    ssh_chain,
    ssh_dloop,
    standard_cage,
    two_leg_ladder,
)
from .invariants import (
    BerryGrid,
    DLoop,
    DiophantineResult,
    NODAL,
    berry_curvature_two_band,
    chern_from_windings,
    chern_number,
    diophantine_windings,
    nodal_winding_map,
    ssh_winding,
    torus_regions,
    winding_number,
)
from .spectra import (
    EdgeMode,
    Geometry,
    PumpSweep,
    SpectrumResult,
    count_spectral_flow,
    detect_edge_modes,
    diagonalize,
    geometry_from_graph,
    hofstadter_gap_windows,
    laughlin_pump_sweep,
    localization_metrics,
    site_populations,
    track_branches,
)
from .dynamics import (
    BondCurrent,
    CagingResult,
    ChevronScan,
    ChiralCurrentResult,
    ChiralDisplacementResult,
    DriveProtocol,
    FlowResult,
    ModulationSpec,
    RwaComparison,
    Tone,
    Trajectory,
    ab_caging_dynamics,
    bond_current_map,
    chevron_scan,
    chiral_current_ground_state,
    chiral_displacement_series,
    driven_steady_flow,
    effective_coupling_bessel,
    evolve_closed,
    evolve_lossy,
    evolve_timedep,
    first_maximum_times,
    kirchhoff_residual,
    pfc_full_vs_effective,
    two_mode_fock,
)

__version__ = "0.1.0"
