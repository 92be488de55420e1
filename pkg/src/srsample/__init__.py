"""srsample: QoI-preserving compression of scientific sample sets.

The package learns an exponential-family model whose sufficient statistics are
the quantities of interest, stores transform-coded sample prefixes alongside
the model and QoI targets, and reconstructs full-fidelity samples by
warm-starting MCMC chains from the decompressed data and correcting them until
the stored QoIs are matched.
"""

from .archive import Archive, CompressedSample, compress_set, decompress_set
from .data import SampleSet
from .dct import dct_forward, dct_inverse, dct_nd, dct_nd_inverse, natural_order, select_prefix
from .learning import (
    GaussianScoreMatching,
    InteractionScreening,
    KineticScoreMatching,
    Phi4ScoreMatching,
    phi4_objective,
    screening_loss,
)
from .models import (
    GaussianModel,
    IsingModel,
    Phi4Model,
    glauber_conditional,
    ising_energy,
    lattice_edges,
    log_density,
    model_from_json,
    model_to_json,
    score,
)
from .pipeline import (
    ExperimentConfig,
    RunReport,
    SuperResolutionCompressor,
    learn_model,
    run_experiment,
)
from .qoi import (
    QoIRecord,
    kinetic_temperature,
    moment_error,
    moments12,
    phi4_stats,
    spin_histogram,
    tv_distance,
)
from .sampling import (
    CorrectionOptions,
    CorrectionReport,
    DivergenceError,
    concat_datasets,
    correct,
    exact_ising_distribution,
    generate_gaussian,
    generate_phi4,
    glauber_sweep,
    glauber_sweep_ensemble,
    langevin_step,
    random_initial_set,
    sample_exact,
    well_conditioned_covariance,
)

__version__ = "0.1.0"

__all__ = [
    "Archive",
    "CompressedSample",
    "CorrectionOptions",
    "CorrectionReport",
    "DivergenceError",
    "ExperimentConfig",
    "GaussianModel",
    "GaussianScoreMatching",
    "InteractionScreening",
    "IsingModel",
    "KineticScoreMatching",
    "Phi4Model",
    "Phi4ScoreMatching",
    "QoIRecord",
    "RunReport",
    "SampleSet",
    "SuperResolutionCompressor",
    "compress_set",
    "concat_datasets",
    "correct",
    "dct_forward",
    "dct_inverse",
    "dct_nd",
    "dct_nd_inverse",
    "decompress_set",
    "exact_ising_distribution",
    "generate_gaussian",
    "generate_phi4",
    "glauber_conditional",
    "glauber_sweep",
    "glauber_sweep_ensemble",
    "ising_energy",
    "kinetic_temperature",
    "langevin_step",
    "lattice_edges",
    "learn_model",
    "log_density",
    "model_from_json",
    "model_to_json",
    "moment_error",
    "moments12",
    "natural_order",
    "phi4_objective",
    "phi4_stats",
    "random_initial_set",
    "run_experiment",
    "sample_exact",
    "score",
    "screening_loss",
    "select_prefix",
    "spin_histogram",
    "SuperResolutionCompressor",
    "tv_distance",
    "well_conditioned_covariance",
]
