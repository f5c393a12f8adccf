"""Generative processes: the environments an agent acts in.

Environments emit joint observation indices using the same row-major
flattening as the model kernels. An episode delivers one observation at
reset and one per step, up to the horizon; stepping past the horizon raises
:class:`StepAfterDoneError`.

Includes the two-factor T-maze task (location x reward side, with a reward
cue revealed only at the cue location) and a generic sampler that plays any
valid :class:`GenerativeModel` as the true process.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import StepAfterDoneError
from .learning import DirichletParams, uniform_alpha
from .model import (
    ActionSpace,
    GenerativeModel,
    ObservationSpace,
    PreferenceDistribution,
    StateSpace,
)

# T-maze index conventions (shared by the model builder and the environment)
LOCATIONS = ("center", "right arm", "left arm", "cue location")
REWARD_SIDES = ("right", "left")
REWARD_OUTCOMES = ("no reward", "reward", "loss")
CUE_OUTCOMES = ("cue right", "cue left")
ACTION_LABELS = ("center", "right arm", "left arm", "cue location")

CENTER, RIGHT_ARM, LEFT_ARM, CUE_LOCATION = range(4)
REWARD_PROB = 0.98


class Environment(ABC):
    """Episode protocol: reset(seed) -> o_1, then step(action) -> o_(t+1)."""

    @abstractmethod
    def reset(self, seed: int | None = None) -> int: ...

    @abstractmethod
    def step(self, action: int) -> int: ...

    @property
    @abstractmethod
    def done(self) -> bool: ...


def build_tmaze_model() -> tuple[GenerativeModel, PreferenceDistribution, DirichletParams]:
    """The two-factor T-maze model: spaces, kernels, preferences, and flat priors.

    States: location in {center, right arm, left arm, cue location} times
    reward side in {right, left}. Observations: location (exact), reward
    signal (reward with probability 0.98 in the matching arm, loss with 0.98
    in the opposite arm, no reward elsewhere), and a cue that reveals the
    reward side only at the cue location. Actions move the agent to the named
    location from center/cue; arms are absorbing. Preference weights (2, 3, 1)
    over (no reward, reward, loss) enter the EFE as log-preferences
    (``normalize_before_log=False``), which is the convention the published
    policy tables require. Horizon 3, uniform initial prior.
    """
    space = StateSpace((4, 2))
    obs = ObservationSpace((4, 3, 2))
    actions = ActionSpace(4, labels=ACTION_LABELS)

    a_loc = np.zeros((4, 4, 2))
    for loc in range(4):
        a_loc[loc, loc, :] = 1.0

    a_rew = np.zeros((3, 4, 2))
    for side in range(2):
        a_rew[0, CENTER, side] = 1.0
        a_rew[0, CUE_LOCATION, side] = 1.0
    for arm, side_matching in ((RIGHT_ARM, 0), (LEFT_ARM, 1)):
        for side in range(2):
            if side == side_matching:
                a_rew[1, arm, side] = REWARD_PROB
                a_rew[2, arm, side] = 1.0 - REWARD_PROB
            else:
                a_rew[1, arm, side] = 1.0 - REWARD_PROB
                a_rew[2, arm, side] = REWARD_PROB

    a_cue = np.full((2, 4, 2), 0.5)
    a_cue[:, CUE_LOCATION, :] = 0.0
    a_cue[0, CUE_LOCATION, 0] = 1.0  # reward right -> cue right
    a_cue[1, CUE_LOCATION, 1] = 1.0  # reward left -> cue left

    b_loc = np.zeros((4, 4, 4))
    for a in range(4):
        for prev in range(4):
            nxt = prev if prev in (RIGHT_ARM, LEFT_ARM) else a
            b_loc[nxt, prev, a] = 1.0
    b_rew = np.stack([np.eye(2)] * 4, axis=2)

    prefs = PreferenceDistribution(
        weights=(np.ones(4), np.array([2.0, 3.0, 1.0]), np.ones(2)),
        normalize_before_log=False,
    )
    model = GenerativeModel(
        state_space=space,
        obs_space=obs,
        action_space=actions,
        A=[a_loc, a_rew, a_cue],
        B=[b_loc, b_rew],
        C=prefs,
        D=[np.full(4, 0.25), np.full(2, 0.5)],
        horizon=3,
    )
    return model, prefs, uniform_alpha(model)


class TMazeEnv(Environment):
    """The T-maze generative process.

    The reward side is drawn uniformly at reset (or forced via
    ``force_reward_side``) and stays constant through the episode; arm
    locations are absorbing; the reward signal matches the 0.98 kernel and
    the cue flips a fair coin away from the cue location.
    """

    def __init__(self, horizon: int = 3, force_reward_side: str | None = None):
        if force_reward_side is not None and force_reward_side not in REWARD_SIDES:
            raise ValueError(f"force_reward_side must be one of {REWARD_SIDES}")
        self.horizon = int(horizon)
        self.force_reward_side = force_reward_side
        self.reward_side: int | None = None
        self.agent_location: int | None = None
        self._observations_emitted = 0
        self._rng = None
        self._obs_space = ObservationSpace((4, 3, 2))

    @property
    def done(self) -> bool:
        return self._observations_emitted >= self.horizon

    def reset(self, seed: int | None = None) -> int:
        self._rng = np.random.default_rng(seed)
        if self.force_reward_side is not None:
            self.reward_side = REWARD_SIDES.index(self.force_reward_side)
        else:
            self.reward_side = int(self._rng.integers(2))
        self.agent_location = CENTER
        self._observations_emitted = 0
        return self._emit()

    def step(self, action: int) -> int:
        if self._rng is None:
            raise StepAfterDoneError("reset the environment before stepping")
        if self.done:
            raise StepAfterDoneError(f"episode ended after {self.horizon} observations")
        if not 0 <= int(action) < 4:
            raise IndexError(f"action index {action} out of range")
        if self.agent_location not in (RIGHT_ARM, LEFT_ARM):
            self.agent_location = int(action)
        return self._emit()

    def _emit(self) -> int:
        loc = self.agent_location
        if loc in (CENTER, CUE_LOCATION):
            reward_obs = 0
        else:
            matching = (loc == RIGHT_ARM and self.reward_side == 0) or (
                loc == LEFT_ARM and self.reward_side == 1
            )
            p_reward = REWARD_PROB if matching else 1.0 - REWARD_PROB
            reward_obs = 1 if self._rng.random() < p_reward else 2
        if loc == CUE_LOCATION:
            cue_obs = self.reward_side
        else:
            cue_obs = int(self._rng.integers(2))
        self._observations_emitted += 1
        return self._obs_space.ravel((loc, reward_obs, cue_obs))


class ModelEnv(Environment):
    """Plays an arbitrary generative model as the true process.

    States are sampled from D, evolved through B for each action, and
    observations drawn from A given the current joint state.
    """

    def __init__(self, model: GenerativeModel):
        self.model = model
        self.state: tuple[int, ...] | None = None
        self._observations_emitted = 0
        self._rng = None

    @property
    def done(self) -> bool:
        return self._observations_emitted >= self.model.horizon

    def reset(self, seed: int | None = None) -> int:
        self._rng = np.random.default_rng(seed)
        self.state = tuple(
            int(self._rng.choice(len(d), p=d / d.sum())) for d in self.model.D
        )
        self._observations_emitted = 0
        return self._emit()

    def step(self, action: int) -> int:
        if self._rng is None:
            raise StepAfterDoneError("reset the environment before stepping")
        if self.done:
            raise StepAfterDoneError(f"episode ended after {self.model.horizon} observations")
        a = int(action)
        self.state = tuple(
            int(self._rng.choice(b.shape[0], p=b[:, s, a] / b[:, s, a].sum()))
            for b, s in zip(self.model.B, self.state)
        )
        return self._emit()

    def _emit(self) -> int:
        joint_state = self.model.state_space.ravel(self.state)
        outcome = []
        for m, a_m in enumerate(self.model.A):
            col = a_m.reshape(a_m.shape[0], -1)[:, joint_state]
            outcome.append(int(self._rng.choice(len(col), p=col / col.sum())))
        self._observations_emitted += 1
        return self.model.obs_space.ravel(tuple(outcome))
