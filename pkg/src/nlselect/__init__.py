"""Iterative variable selection for binary outcomes with non-local priors."""

from .baselines import EnetConfig, cv_select, fit_enet_path
from .bench import MethodReport, compute_metrics, run_benchmark
from .data import DataError, Dataset, load_dataset, pearson_correlation, standardize, write_dataset
from .estimator import NonLocalPriorSelector, PenalizedLogisticSelector
from .glm import FitResult, fit_logistic, log_likelihood, mmle
from .priors import PriorConfig, log_model_prior, log_pimom, log_pmom, prior_grad_hess
from .scheme import SchemeConfig, SelectionResult, run_selection
from .screening import ScreenReport, screen
from .selection import ModelPosterior, laplace_log_evidence, map_estimate, null_evidence, search_hppm
from .simulate import SimSpec, sample_causal_effects, simulate_genotypes, simulate_phenotype

__version__ = "0.1.0"
