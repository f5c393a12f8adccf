"""Posterior beliefs over hidden states: filtering, prediction, and smoothing.

The default representation is exact: beliefs are probability vectors over the
joint state, and all updates are plain Bayes rule / Chapman-Kolmogorov steps
on that vector. A mean-field alternative, which keeps one belief vector per
state factor and resolves the coupling through the likelihood by fixed-point
iteration, is available via :func:`filter_step_factorized` for models whose
joint space is too large to enumerate.

Notation used in docstrings: q_t(.) is the posterior given the history
(o_{1:t}, a_{1:t-1}); tau indexes arbitrary time steps, 1-based, and T is the
model horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import AllZeroPosteriorError, NonConvergenceError
from .model import GenerativeModel, StateSpace

FIXED_POINT_TOL = 1e-8


@dataclass(frozen=True)
class History:
    """The agent's record: joint observation indices o_{1:t} and actions a_{1:t-1}."""

    observations: tuple[int, ...]
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(int(o) for o in self.observations))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.observations) < 1:
            raise ValueError("a history contains at least the first observation")
        if len(self.actions) != len(self.observations) - 1:
            raise ValueError(
                f"history with {len(self.observations)} observations needs "
                f"{len(self.observations) - 1} actions, got {len(self.actions)}"
            )

    @property
    def t(self) -> int:
        """Current time step (1-based)."""
        return len(self.observations)

    def extended(self, action: int, observation: int) -> "History":
        return History(self.observations + (int(observation),), self.actions + (int(action),))


@dataclass(frozen=True)
class BeliefState:
    """A categorical belief over hidden states at one time index.

    Exactly one representation is populated: ``joint`` (a vector over the
    joint state) or ``factors`` (one vector per state factor, their outer
    product being the implied joint belief).
    """

    joint: np.ndarray | None = None
    factors: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if (self.joint is None) == (self.factors is None):
            raise ValueError("exactly one of joint/factors must be given")
        if self.joint is not None:
            arr = np.asarray(self.joint, dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, "joint", arr)
        else:
            fs = tuple(np.asarray(f, dtype=float) for f in self.factors)
            for f in fs:
                f.flags.writeable = False
            object.__setattr__(self, "factors", fs)

    @property
    def is_joint(self) -> bool:
        return self.joint is not None

    def as_joint(self) -> np.ndarray:
        """The joint-state vector; outer product of the factors in factored mode."""
        if self.joint is not None:
            return self.joint
        return reduce(np.kron, self.factors)

    def factor_marginals(self, space: StateSpace) -> tuple[np.ndarray, ...]:
        """Per-factor marginals of the belief."""
        if self.factors is not None:
            return self.factors
        cube = self.joint.reshape(space.factor_sizes)
        out = []
        for f in range(space.n_factors):
            axes = tuple(i for i in range(space.n_factors) if i != f)
            out.append(cube.sum(axis=axes))
        return tuple(out)


def initial_belief(model: GenerativeModel, factored: bool = False) -> BeliefState:
    """The prior belief D, before any observation."""
    if factored:
        return BeliefState(factors=tuple(d.copy() for d in model.D))
    return BeliefState(joint=model.initial_prior)


@dataclass(frozen=True)
class SmoothedPosterior:
    """Marginals of the full-sequence posterior q_t(s_{1:T}).

    ``marginals[i]`` is the joint-state singleton marginal at time i+1;
    ``pairwise[i]`` couples times (i+1, i+2) with layout [next, previous],
    matching the transition kernels.
    """

    marginals: tuple[np.ndarray, ...]
    pairwise: tuple[np.ndarray, ...]
    state_space: StateSpace

    @property
    def horizon(self) -> int:
        return len(self.marginals)

    def factor_marginal(self, tau: int, f: int) -> np.ndarray:
        """Marginal of factor ``f`` at time ``tau`` (1-based)."""
        cube = self.marginals[tau - 1].reshape(self.state_space.factor_sizes)
        axes = tuple(i for i in range(self.state_space.n_factors) if i != f)
        return cube.sum(axis=axes)

    def factor_pairwise(self, tau: int, f: int) -> np.ndarray:
        """Pairwise marginal of factor ``f`` over (s_tau, s_{tau-1}); tau >= 2."""
        sizes = self.state_space.factor_sizes
        block = self.pairwise[tau - 2].reshape(*sizes, *sizes)
        n = len(sizes)
        axes = tuple(i for i in range(n) if i != f) + tuple(n + i for i in range(n) if i != f)
        return block.sum(axis=axes)


# -- exact (joint-state) operations ----------------------------------------


def _one_step(model: GenerativeModel, q: np.ndarray, action: int) -> np.ndarray:
    return model.joint_transition(action) @ q


def filter_step(
    model: GenerativeModel,
    prior_belief: BeliefState,
    action: int | None,
    observation: int,
) -> BeliefState:
    """One Bayes filtering update.

    q(s_t | o_{1:t}, a_{1:t-1}) is proportional to
    p(o_t | s_t) * sum_{s_{t-1}} p(s_t | s_{t-1}, a_{t-1}) q(s_{t-1}); for the
    first step (``action`` is None) the predictive prior is ``prior_belief``
    itself, i.e. D.
    """
    q = prior_belief.as_joint()
    predictive = q if action is None else _one_step(model, q, action)
    post = model.likelihood_column(observation) * predictive
    total = post.sum()
    if total <= 0.0:
        raise AllZeroPosteriorError(
            f"observation {observation} has probability zero under the predictive prior"
        )
    return BeliefState(joint=post / total)


def filter_history(model: GenerativeModel, history: History) -> BeliefState:
    """Run the filter over a whole history; returns q_t(s_t)."""
    belief = filter_step(model, initial_belief(model), None, history.observations[0])
    for a, o in zip(history.actions, history.observations[1:]):
        belief = filter_step(model, belief, a, o)
    return belief


def predict_state(
    model: GenerativeModel, belief: BeliefState, actions: tuple[int, ...] | list[int]
) -> list[BeliefState]:
    """Roll a belief forward through the transition kernels, one entry per action.

    No observation conditioning: this is q(s_tau | o_{1:t}, a_{1:tau-1}) for
    each future tau, obtained by chaining Chapman-Kolmogorov steps.
    """
    if len(actions) < 1:
        raise ValueError("need at least one action to predict forward")
    out: list[BeliefState] = []
    if belief.is_joint:
        q = belief.as_joint()
        for a in actions:
            q = _one_step(model, q, a)
            out.append(BeliefState(joint=q))
    else:
        qs = list(belief.factors)
        for a in actions:
            qs = [model.B[f][:, :, a] @ qs[f] for f in range(len(qs))]
            out.append(BeliefState(factors=tuple(qs)))
    return out


def condition_on_observation(
    model: GenerativeModel, predicted: BeliefState, observation: int
) -> BeliefState:
    """Bayes-condition a predicted belief on one hypothetical observation."""
    q = predicted.as_joint()
    post = model.likelihood_column(observation) * q
    total = post.sum()
    if total <= 0.0:
        raise AllZeroPosteriorError(
            f"observation {observation} has probability zero under the predicted belief"
        )
    return BeliefState(joint=post / total)


def predict_observation(model: GenerativeModel, belief: BeliefState) -> np.ndarray:
    """q(o | .) = sum_s p(o | s) q(s), a vector over joint observations."""
    return model.likelihood_table @ belief.as_joint()


def smooth(
    model: GenerativeModel,
    history: History,
    future_actions: tuple[int, ...] | list[int] = (),
) -> SmoothedPosterior:
    """Forward-backward smoothing over the whole episode.

    Computes singleton and pairwise marginals of the sequence posterior
    proportional to prod_{tau<=t} p(o_tau|s_tau) * p(s_1)
    prod_{tau>=2} p(s_tau|s_{tau-1}, a_{tau-1}), where actions beyond the
    history come from ``future_actions`` (so the result covers times 1..T
    with T = t + len(future_actions); steps after t carry no evidence).
    """
    t = history.t
    horizon = t + len(future_actions)
    actions = history.actions + tuple(int(a) for a in future_actions)
    n = model.n_states

    def evidence(tau: int) -> np.ndarray:
        if tau <= t:
            return model.likelihood_column(history.observations[tau - 1])
        return np.ones(n)

    # forward pass, locally renormalized for stability
    fwd = np.empty((horizon, n))
    post = evidence(1) * model.initial_prior
    total = post.sum()
    if total <= 0.0:
        raise AllZeroPosteriorError("history has probability zero under the model")
    fwd[0] = post / total
    for tau in range(2, horizon + 1):
        pred = _one_step(model, fwd[tau - 2], actions[tau - 2])
        post = evidence(tau) * pred
        total = post.sum()
        if total <= 0.0:
            raise AllZeroPosteriorError("history has probability zero under the model")
        fwd[tau - 1] = post / total

    bwd = np.empty((horizon, n))
    bwd[horizon - 1] = 1.0
    for tau in range(horizon - 1, 0, -1):
        msg = model.joint_transition(actions[tau - 1]).T @ (evidence(tau + 1) * bwd[tau])
        total = msg.sum()
        if total <= 0.0:
            raise AllZeroPosteriorError("history has probability zero under the model")
        bwd[tau - 1] = msg / total

    marginals = []
    for tau in range(1, horizon + 1):
        g = fwd[tau - 1] * bwd[tau - 1]
        marginals.append(g / g.sum())

    pairwise = []
    for tau in range(2, horizon + 1):
        trans = model.joint_transition(actions[tau - 2])
        block = (evidence(tau) * bwd[tau - 1])[:, None] * trans * fwd[tau - 2][None, :]
        pairwise.append(block / block.sum())

    return SmoothedPosterior(
        marginals=tuple(marginals), pairwise=tuple(pairwise), state_space=model.state_space
    )


# -- mean-field (per-factor) filtering --------------------------------------


def filter_step_factorized(
    model: GenerativeModel,
    prior_factors: BeliefState,
    action: int | None,
    observation: int,
    iters: int = 50,
) -> BeliefState:
    """One filtering update on per-factor beliefs via fixed-point iteration.

    The likelihood couples state factors, so the factored posterior has no
    closed form; each sweep updates factors in ascending order using

        q(s^f) \\propto m^f(s^f) * sum over the other factors of
                 q(other factors) p(o | s),

    where m^f is the per-factor predictive prior. Sweeps stop when the
    max-abs change falls below 1e-8; exhausting ``iters`` raises
    :class:`NonConvergenceError` carrying the last iterate and residual.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    priors = prior_factors.factor_marginals(model.state_space)
    n_f = len(priors)
    if action is None:
        pred = [p.copy() for p in priors]
    else:
        pred = [model.B[f][:, :, action] @ priors[f] for f in range(n_f)]

    like_cube = model.likelihood_column(observation).reshape(model.state_space.factor_sizes)
    qs = [p.copy() for p in pred]

    residual = np.inf
    for _ in range(iters):
        residual = 0.0
        for f in range(n_f):
            # contract p(o|s) with the other factors' current beliefs;
            # descending order keeps remaining axis indices valid
            contracted = like_cube
            for g in sorted((g for g in range(n_f) if g != f), reverse=True):
                contracted = np.tensordot(qs[g], contracted, axes=([0], [g]))
            new = contracted * pred[f]
            total = new.sum()
            if total <= 0.0:
                raise AllZeroPosteriorError(
                    f"observation {observation} has probability zero under the factored prior"
                )
            new = new / total
            residual = max(residual, float(np.max(np.abs(new - qs[f]))))
            qs[f] = new
        if residual < FIXED_POINT_TOL:
            return BeliefState(factors=tuple(qs))
    raise NonConvergenceError(
        f"fixed-point iteration did not converge in {iters} sweeps (residual {residual:.3g})",
        last_iterate=tuple(qs),
        residual=residual,
    )
