"""EBIC_R model selection for block-sparse (BMMV) linear regression."""

from .bomp import CandidatePath, run_bomp
from .criterion import (CriterionScore, SelectorConfig, ebicr_score, exhaustive_select,
                        fim_normalization_diagnostic, oracle_select, select_model,
                        sigma0_sq, sigma_sq_block)
from .errors import (ConfigError, IndexOutOfRange, PathTooShort, RankDeficient,
                     TooManyCandidates, ZeroColumn, ZeroResponse, ZeroSignal)
from .experiment import ExperimentConfig, SweepResult, run_trial, sweep, write_results
from .linalg import least_squares_fit, normalize_columns, residual_matrix, residual_sq_norm
from .model import (BlockStructure, Dataset, block_rows, generate_design, generate_signal,
                    make_rng, noise_variance_for_snr, synthesize_dataset)

__version__ = "0.1.0"
