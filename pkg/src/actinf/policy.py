"""Policy enumeration, the softmax policy posterior, and action selection.

Policies are scored by expected free energy and turned into a distribution
with a temperature-1 softmax: q(pi) = sigma(ln E(pi) - G(pi)), where the
habit term E defaults to uniform (so q(pi) = sigma(-G)). A new policy is
sampled at every time step; only its first action is executed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .efe import EfeBreakdown, Policy, efe_epistemic_form
from .errors import CombinatorialLimitError
from .inference import BeliefState, History
from .model import GenerativeModel
from .numerics import floored_log, softmax  # noqa: F401  (softmax re-exported as a public op)

POLICY_CAP = 1_000_000


@dataclass(frozen=True)
class HabitPrior:
    """Non-negative policy weights, either one per policy or one per first action."""

    weights: np.ndarray
    per_first_action: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("habit weights must be non-negative with at least one positive entry")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def log_weights(self, policies: list[Policy]) -> np.ndarray:
        if not self.per_first_action:
            if len(self.weights) != len(policies):
                raise ValueError(f"expected {len(policies)} habit weights, got {len(self.weights)}")
            return floored_log(self.weights)
        # broadcast over the first action; empty policies get a neutral weight
        return np.array(
            [floored_log(self.weights[p.actions[0]]) if len(p) else 0.0 for p in policies]
        )


@dataclass(frozen=True)
class PolicyPosterior:
    """The softmax distribution over enumerated policies at one time step."""

    policies: tuple[Policy, ...]
    probabilities: np.ndarray
    g_values: np.ndarray
    breakdowns: tuple[EfeBreakdown, ...]
    habit_log_weights: np.ndarray | None = None

    @property
    def start_time(self) -> int:
        return self.policies[0].start_time

    def first_action_marginals(self, n_actions: int) -> np.ndarray:
        """Probability of each first action under the policy distribution."""
        out = np.zeros(n_actions)
        for p, prob in zip(self.policies, self.probabilities):
            if len(p):
                out[p.actions[0]] += prob
        return out


def enumerate_policies(
    action_count: int, t: int, horizon: int, cap: int = POLICY_CAP
) -> list[Policy]:
    """All action sequences a_t..a_{T-1}, in lexicographic order.

    The first slot varies slowest; t = T yields the single empty policy.
    """
    if t > horizon:
        raise ValueError(f"start time {t} exceeds horizon {horizon}")
    length = horizon - t
    count = action_count**length
    if count > cap:
        raise CombinatorialLimitError(
            f"{action_count}^{length} = {count} policies exceeds the cap of {cap}"
        )
    return [Policy(actions=seq, start_time=t) for seq in product(range(action_count), repeat=length)]


def policy_posterior(
    model: GenerativeModel,
    belief_now: BeliefState,
    history: History,
    habit: HabitPrior | None = None,
    lookahead: str = "stepwise",
    cap: int = POLICY_CAP,
) -> PolicyPosterior:
    """Score every policy from the current time step and softmax the result.

    ``belief_now`` must be the filtered belief q_t(s_t) for ``history``; past
    actions stay fixed to the history, so G only ranges over future steps.
    """
    t = history.t
    policies = enumerate_policies(model.n_actions, t, model.horizon, cap=cap)
    breakdowns = tuple(
        efe_epistemic_form(model, belief_now, p, lookahead=lookahead) for p in policies
    )
    g = np.array([b.total for b in breakdowns])
    habit_log = habit.log_weights(policies) if habit is not None else None
    scores = -g if habit_log is None else habit_log - g
    return PolicyPosterior(
        policies=tuple(policies),
        probabilities=softmax(scores),
        g_values=g,
        breakdowns=breakdowns,
        habit_log_weights=habit_log,
    )


def sample_policy(posterior: PolicyPosterior, rng_seed: int) -> Policy:
    """Draw one policy from the posterior with a seeded generator (PCG64)."""
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(len(posterior.policies), p=posterior.probabilities)
    return posterior.policies[int(idx)]


def select_action(posterior: PolicyPosterior, rng_seed: int) -> int:
    """Sample a policy and return its first action; the rest is discarded."""
    pol = sample_policy(posterior, rng_seed)
    if len(pol) == 0:
        raise ValueError("cannot select an action from an empty policy (t = T)")
    return pol.actions[0]


def greedy_action(posterior: PolicyPosterior) -> int:
    """First action of the most probable policy; ties break to the lowest index."""
    idx = int(np.argmax(posterior.probabilities))
    pol = posterior.policies[idx]
    if len(pol) == 0:
        raise ValueError("cannot select an action from an empty policy (t = T)")
    return pol.actions[0]
