"""Discrete active inference: generative model, free energies and their unification checks."""

from .agent import enumerate_policies, line_world, plan, run_episode, run_experiment, switch_world
from .dsep import d_separated, trail_blocked
from .efe import EfeReport, efe_3e, efe_igpv, efe_roa, efe_rsa, unification_report
from .inference import PosteriorChain, exact_filter_posterior, log_evidence, variational_free_energy
from .model import Dag, PomdpModel, load_model, save_model, to_dag, validate_model
from .predictive import Policy, build_forecast, build_target, forecast_marginals
from .preferences import feasibility_check, observation_prefs_from_state_prefs, valid_class_vertices
from .prob import Categorical, JointTable, condition, entropy, kl_divergence, marginalize, normalize

__version__ = "0.1.0"
