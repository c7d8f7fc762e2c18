"""Estimation of directed-network in-degree distributions from samples.

Modules: ``graph`` (containers + IO), ``generate`` (synthetic networks),
``sample`` (five sampling schemes), ``invert`` (sampling matrices and
penalized inversion), ``optim`` (constrained QP solver), ``tail``
(asymptotic tail estimators), ``metrics``, ``experiment`` (replicated
pipelines), ``cli``.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, IndegError, NumericalError
from .graph import (DegreeCounts, DirectedGraph, in_degree, in_degree_counts,
                    largest_component, load_edge_list, save_edge_list)
from .generate import Family, GeneratorConfig, generate, generate_exponential_in, generate_power_law
from .sample import (SamplePlan, SampleRecord, Scheme, edge_budget_from_vertex_budget,
                     jump_weight_from_rate, record_from_edges, record_from_vertices,
                     sample, sample_in_degree_counts, sample_res, sample_rvs,
                     sample_rws1, sample_rws2, sample_rws3)
from .invert import (MatrixScheme, NaiveInversion, PenalizedInversion, PenaltyConfig,
                     SamplingMatrix, SureSelection, build_ps, default_lambda_grid,
                     explicit_inverse_nr, invert_naive, invert_penalized,
                     log10_condition_number, second_diff_operator, select_lambda_sure,
                     weight_matrix)
from .optim import QpProblem, QpSolution, solve_qp
from .tail import (PowerLawFit, StitchedEstimate, TailEstimate, asym_estimate,
                   cs_factor, cs_limit, default_crossover, default_onset,
                   estimate_J, estimate_tau_s, fit_power_law, line_estimate, stitch)
from .metrics import log_mse, tv_distance
from .experiment import (ExperimentConfig, ExperimentReport, ReplicateResult,
                         matrix_scheme_for, run_experiment, run_replicate)
