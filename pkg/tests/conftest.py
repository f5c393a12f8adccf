import numpy as np
import pytest

from actinf.model import (
    ActionSpace,
    GenerativeModel,
    ObservationSpace,
    PreferenceDistribution,
    StateSpace,
)


def random_model(
    rng: np.random.Generator,
    max_joint: int = 6,
    max_factors: int = 2,
    max_modalities: int = 2,
    max_modality_size: int = 3,
    n_actions: int | None = None,
    horizon: int | None = None,
    c_normalize: bool = True,
) -> GenerativeModel:
    """A random valid model with dense (strictly positive) kernels."""
    n_factors = int(rng.integers(1, max_factors + 1))
    sizes = []
    joint = 1
    for _ in range(n_factors):
        hi = max(2, max_joint // joint)
        s = int(rng.integers(2, min(3, hi) + 1)) if hi >= 2 else 1
        sizes.append(s)
        joint *= s
    sizes = tuple(sizes)
    msizes = tuple(int(rng.integers(2, max_modality_size + 1)) for _ in range(int(rng.integers(1, max_modalities + 1))))
    n_a = n_actions if n_actions is not None else int(rng.integers(2, 4))
    T = horizon if horizon is not None else int(rng.integers(2, 5))

    n_joint = int(np.prod(sizes))
    A = []
    for m_size in msizes:
        cols = rng.dirichlet(np.ones(m_size), size=n_joint).T  # (m_size, n_joint)
        A.append(cols.reshape(m_size, *sizes))
    B = []
    for s in sizes:
        b = np.zeros((s, s, n_a))
        for k in range(s):
            for a in range(n_a):
                b[:, k, a] = rng.dirichlet(np.ones(s))
        B.append(b)
    C = PreferenceDistribution(
        weights=tuple(rng.uniform(0.2, 3.0, size=m) for m in msizes),
        normalize_before_log=c_normalize,
    )
    D = [rng.dirichlet(np.ones(s)) for s in sizes]
    return GenerativeModel(
        state_space=StateSpace(sizes),
        obs_space=ObservationSpace(msizes),
        action_space=ActionSpace(n_a),
        A=A,
        B=B,
        C=C,
        D=D,
        horizon=T,
    )


def random_history(rng: np.random.Generator, model: GenerativeModel, t: int):
    """A random observation/action record of length t (not necessarily likely)."""
    obs = tuple(int(rng.integers(model.n_obs)) for _ in range(t))
    acts = tuple(int(rng.integers(model.n_actions)) for _ in range(t - 1))
    return obs, acts


@pytest.fixture
def tmaze():
    from actinf.env import build_tmaze_model

    model, prefs, alpha = build_tmaze_model()
    return model


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
