"""Quantum discord, zero-discord criteria and Markovian crossing dynamics."""

__version__ = "0.1.0"

from .bloch import (
    BlochRepresentation,
    GeneratorBasis,
    StructureConstants,
    build_generator_basis,
    c0_residuals,
    commutator_bloch,
    from_bloch,
    structure_constants,
    to_bloch,
)
from .channels import (
    QuantumChannel,
    SpectralDecomposition,
    Trajectory,
    asymptotic_state,
    crossing_bound,
    evolve,
    evolve_spectral,
    make_channel,
    replacement_channel,
    run_trajectory,
    spectral_decompose,
    steady_state,
    steady_state_in_c0,
)
from .discord import (
    DiscordResult,
    OptimizerConfig,
    ProjectiveMeasurement,
    classical_correlations,
    commutator_criterion,
    conditional_entropy,
    discord,
    in_c0,
    make_zero_discord,
    omega0_residual,
)
from .rng import PRNG_ID, SeededSampler, random_unitary
from .sampling import (
    depolarize_toward_identity,
    perturb,
    random_mixed_state,
    random_pure_state,
    random_zero_discord,
)
from .states import (
    DensityMatrix,
    bell_state,
    load_state,
    maximally_mixed,
    mutual_information,
    partial_trace,
    save_state,
    tensor_product,
    von_neumann_entropy,
)
