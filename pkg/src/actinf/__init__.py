"""Discrete-time active inference engine.

Exact POMDP belief updating, expected free energy policy scoring, softmax
action selection, and Dirichlet-categorical learning, plus a T-maze
environment and a CLI simulator.
"""

from .efe import (
    EfeBreakdown,
    EfeStep,
    Policy,
    efe_ambiguity_form,
    efe_epistemic_form,
    entropy,
    kl_divergence,
)
from .env import Environment, ModelEnv, TMazeEnv, build_tmaze_model
from .errors import (
    ActinfError,
    AllZeroPosteriorError,
    CombinatorialLimitError,
    ModelFormatError,
    NonConvergenceError,
    StepAfterDoneError,
    SupportViolationError,
)
from .inference import (
    BeliefState,
    History,
    SmoothedPosterior,
    condition_on_observation,
    filter_history,
    filter_step,
    filter_step_factorized,
    initial_belief,
    predict_observation,
    predict_state,
    smooth,
)
from .learning import (
    DirichletParams,
    dirichlet_mean,
    learn_episode,
    load_alpha,
    model_from_alpha,
    save_alpha,
    uniform_alpha,
)
from .model import (
    ActionSpace,
    GenerativeModel,
    ObservationSpace,
    PreferenceDistribution,
    StateSpace,
    Violation,
    joint_likelihood,
    load_model,
    models_equal,
    save_model,
    validate_model,
)
from .policy import (
    HabitPrior,
    PolicyPosterior,
    enumerate_policies,
    greedy_action,
    policy_posterior,
    sample_policy,
    select_action,
    softmax,
)
from .varfree import (
    CategoricalLatentModel,
    CaviResult,
    VfeValue,
    cavi,
    exact_minimizer,
    exact_theta_posterior_moments,
    vfe,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSpace",
    "ActinfError",
    "AllZeroPosteriorError",
    "BeliefState",
    "CategoricalLatentModel",
    "CaviResult",
    "CombinatorialLimitError",
    "DirichletParams",
    "EfeBreakdown",
    "EfeStep",
    "Environment",
    "GenerativeModel",
    "HabitPrior",
    "History",
    "ModelEnv",
    "ModelFormatError",
    "NonConvergenceError",
    "ObservationSpace",
    "Policy",
    "PolicyPosterior",
    "PreferenceDistribution",
    "SmoothedPosterior",
    "StateSpace",
    "StepAfterDoneError",
    "SupportViolationError",
    "TMazeEnv",
    "VfeValue",
    "Violation",
    "build_tmaze_model",
    "cavi",
    "condition_on_observation",
    "dirichlet_mean",
    "efe_ambiguity_form",
    "efe_epistemic_form",
    "entropy",
    "enumerate_policies",
    "exact_minimizer",
    "exact_theta_posterior_moments",
    "filter_history",
    "filter_step",
    "filter_step_factorized",
    "greedy_action",
    "initial_belief",
    "joint_likelihood",
    "kl_divergence",
    "learn_episode",
    "load_alpha",
    "load_model",
    "model_from_alpha",
    "models_equal",
    "policy_posterior",
    "predict_observation",
    "predict_state",
    "sample_policy",
    "save_alpha",
    "save_model",
    "select_action",
    "smooth",
    "softmax",
    "uniform_alpha",
    "validate_model",
    "vfe",
]
