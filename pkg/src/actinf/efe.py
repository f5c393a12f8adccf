"""Expected free energy of policies, in both equivalent formulations.

For a policy pi starting at time t, the expected free energy decomposes over
future steps tau = t+1..T as G = sum_tau G_tau with

    G_tau = -( E_{q(o_tau|pi)}[ KL( q(s_tau|o_tau,pi) || q(s_tau|pi) ) ]
               + E_{q(o_tau|pi)}[ ln p_C(o_tau) ] )                (epistemic form)

          =  E_{q(s_tau|pi)}[ H[p(o_tau|s_tau)] ]
               + KL( q(o_tau|pi) || p_C(o_tau) )                   (ambiguity form)

The first bracketed term of the epistemic form is the epistemic value
(information gain), the second is utility; the ambiguity form splits the same
quantity into ambiguity plus risk. The two forms coincide exactly when the
preference distribution is normalized; otherwise they differ by a
policy-independent constant per step, so the softmax policy posterior is
identical either way.

Lookahead modes
---------------
``stepwise`` (default) scores every future step by applying a single
transition, with that step's scheduled action, to the *current* belief
q_t(s_t). This is the convention under which the published T-maze policy
tables were produced. ``rollout`` chains transitions through the policy
prefix instead (Chapman-Kolmogorov), so later steps see the effect of earlier
actions. Both modes agree on the first future step and on length-1 policies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import BeliefState, predict_state
from .model import GenerativeModel, PreferenceDistribution
from .numerics import EPS, entropy, floored_log, kl_divergence  # noqa: F401  (re-exported ops)

LOOKAHEAD_MODES = ("stepwise", "rollout")


@dataclass(frozen=True)
class Policy:
    """A fixed sequence of future actions a_t..a_{T-1} starting at time t."""

    actions: tuple[int, ...]
    start_time: int

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if self.start_time < 1:
            raise ValueError("policies start at a 1-based time step")

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class EfeStep:
    """Per-step terms of the expected free energy, all in nats."""

    tau: int
    epistemic_value: float
    utility: float
    ambiguity: float
    risk: float
    g: float


@dataclass(frozen=True)
class EfeBreakdown:
    """Per-step records plus the total G of one policy."""

    steps: tuple[EfeStep, ...]
    total: float


def log_preferences(prefs: PreferenceDistribution) -> list[np.ndarray]:
    """Per-modality log-preference vectors ln p_C(o^m) as used in the utility term.

    With ``normalize_before_log`` the weights are renormalized per modality
    and logged; otherwise the weights already are the log-preferences.
    """
    if prefs.normalize_before_log:
        return [floored_log(w / w.sum()) for w in prefs.weights]
    return [np.asarray(w, dtype=float) for w in prefs.weights]


def _joint_log_preferences(model: GenerativeModel) -> tuple[np.ndarray, float]:
    """ln p_C over joint observations, plus the total log-normalizer.

    Returns ``(ln_c, log_z)`` where ``ln_c[o] = sum_m ln p_C(o^m)`` and
    ``log_z`` is the log of the preference mass, so ``ln_c - log_z`` is the
    log of the normalized preference distribution (zero when the weights are
    already normalized).
    """
    per_mod = log_preferences(model.C)
    n_o = model.n_obs
    obs_multi = np.unravel_index(np.arange(n_o), model.obs_space.modality_sizes)
    ln_c = np.zeros(n_o)
    log_z = 0.0
    for m, ln_w in enumerate(per_mod):
        ln_c += ln_w[obs_multi[m]]
        log_z += float(np.log(np.exp(ln_w - ln_w.max()).sum()) + ln_w.max())
    return ln_c, log_z


def _lookahead_beliefs(
    model: GenerativeModel, belief_now: BeliefState, policy: Policy, lookahead: str
) -> list[np.ndarray]:
    """Joint-state beliefs for tau = t+1..T under the chosen lookahead mode."""
    if lookahead not in LOOKAHEAD_MODES:
        raise ValueError(f"unknown lookahead mode {lookahead!r}; expected one of {LOOKAHEAD_MODES}")
    if len(policy) == 0:
        return []
    if lookahead == "rollout":
        return [b.as_joint() for b in predict_state(model, belief_now, policy.actions)]
    q_now = belief_now.as_joint()
    return [model.joint_transition(a) @ q_now for a in policy.actions]


def _step_terms(model: GenerativeModel, q_s: np.ndarray, ln_c: np.ndarray, log_z: float):
    """All four G_tau terms for one future step with belief q_s."""
    table = model.likelihood_table
    q_o = table @ q_s
    support = q_o > EPS

    # epistemic value: expected KL between the conditioned and predicted belief
    joint = table[support] * q_s[None, :]          # q(o, s) rows restricted to support
    post = joint / q_o[support, None]              # q(s | o)
    log_ratio = floored_log(post) - floored_log(q_s)[None, :]
    epistemic = float(np.sum(q_o[support] * np.sum(post * np.where(post > 0, log_ratio, 0.0), axis=1)))

    utility = float(q_o[support] @ ln_c[support])
    ambiguity = float(q_s @ model.outcome_entropies)
    risk = float(q_o[support] @ (np.log(q_o[support]) - (ln_c[support] - log_z)))
    return epistemic, utility, ambiguity, risk


def efe_epistemic_form(
    model: GenerativeModel,
    belief_now: BeliefState,
    policy: Policy,
    preferences: PreferenceDistribution | None = None,
    lookahead: str = "stepwise",
) -> EfeBreakdown:
    """G via the epistemic-value/utility formulation.

    Each future step contributes the negated sum of expected information gain
    and expected log-preference; observations with zero predicted probability
    are skipped (the 0 * ln 0 = 0 convention).
    """
    return _efe(model, belief_now, policy, preferences, lookahead, form="epistemic")


def efe_ambiguity_form(
    model: GenerativeModel,
    belief_now: BeliefState,
    policy: Policy,
    preferences: PreferenceDistribution | None = None,
    lookahead: str = "stepwise",
) -> EfeBreakdown:
    """G via the ambiguity/risk formulation.

    Risk is a true KL against the *normalized* preference distribution, so
    with unnormalized preference weights this form is shifted against the
    epistemic form by a policy-independent constant per step.
    """
    return _efe(model, belief_now, policy, preferences, lookahead, form="ambiguity")


def _efe(model, belief_now, policy, preferences, lookahead, form) -> EfeBreakdown:
    if preferences is not None:
        model = _with_preferences(model, preferences)
    ln_c, log_z = _joint_log_preferences(model)
    beliefs = _lookahead_beliefs(model, belief_now, policy, lookahead)
    t = policy.start_time
    steps = []
    total = 0.0
    for k, q_s in enumerate(beliefs):
        epistemic, utility, ambiguity, risk = _step_terms(model, q_s, ln_c, log_z)
        g = -(epistemic + utility) if form == "epistemic" else ambiguity + risk
        steps.append(
            EfeStep(
                tau=t + 1 + k,
                epistemic_value=epistemic,
                utility=utility,
                ambiguity=ambiguity,
                risk=risk,
                g=g,
            )
        )
        total += g
    return EfeBreakdown(steps=tuple(steps), total=total)


def _with_preferences(model: GenerativeModel, preferences: PreferenceDistribution) -> GenerativeModel:
    """A shallow model copy with a different preference distribution."""
    return GenerativeModel(
        state_space=model.state_space,
        obs_space=model.obs_space,
        action_space=model.action_space,
        A=list(model.A),
        B=list(model.B),
        C=preferences,
        D=list(model.D),
        horizon=model.horizon,
    )
