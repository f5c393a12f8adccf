"""Dirichlet hyperparameter learning over the model kernels.

After a complete episode (t = T), the hyperparameters are incremented by the
smoothed posterior mass assigned to each state, observation-state pair, and
state-transition triple:

    alpha_D[j]      += q_T(s_1 = j)                               (per factor)
    alpha_A[i, j]   += sum_tau 1[o_tau = i] q_T(s_tau = j)        (per modality,
                                                                   j a joint state)
    alpha_B[j, k, l] += sum_{tau>=2} q_T(s_tau = j) q_T(s_{tau-1} = k)
                                     1[a_{tau-1} = l]             (per factor)

The B update multiplies singleton marginals, mirroring the mean-field
factorization of the sequence posterior; an opt-in flag substitutes the
smoother's pairwise marginals instead. Point kernels are recovered from
hyperparameters via the Dirichlet mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .inference import History, SmoothedPosterior
from .model import GenerativeModel, ModelFormatError, PreferenceDistribution


@dataclass(frozen=True)
class DirichletParams:
    """Positive hyperparameters mirroring the shapes of A, B, and D."""

    alpha_a: tuple[np.ndarray, ...]
    alpha_b: tuple[np.ndarray, ...]
    alpha_d: tuple[np.ndarray, ...]

    def __post_init__(self):
        for name in ("alpha_a", "alpha_b", "alpha_d"):
            arrs = tuple(np.asarray(a, dtype=float) for a in getattr(self, name))
            for a in arrs:
                if np.any(a <= 0):
                    raise ValueError(f"{name} entries must be strictly positive")
                a.flags.writeable = False
            object.__setattr__(self, name, arrs)

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.alpha_b)

    @property
    def modality_sizes(self) -> tuple[int, ...]:
        return tuple(a.shape[0] for a in self.alpha_a)


def uniform_alpha(model: GenerativeModel, concentration: float = 1.0) -> DirichletParams:
    """All-ones (scaled) hyperparameters matching a model's kernel shapes."""
    return DirichletParams(
        alpha_a=tuple(np.full(a.shape, concentration) for a in model.A),
        alpha_b=tuple(np.full(b.shape, concentration) for b in model.B),
        alpha_d=tuple(np.full(d.shape, concentration) for d in model.D),
    )


def learn_episode(
    alpha: DirichletParams,
    smoothed: SmoothedPosterior,
    history: History,
    learning_rate: float = 1.0,
    use_pairwise: bool = False,
) -> DirichletParams:
    """Apply one episode's Dirichlet updates; inputs are left unmodified.

    ``smoothed`` must cover the full horizon and have been computed with the
    pre-update model. ``use_pairwise`` replaces the product of singleton
    marginals in the B update with the smoother's pairwise marginals.
    """
    if history.t != smoothed.horizon:
        raise ValueError(
            f"history covers t={history.t} but the smoothed posterior has horizon {smoothed.horizon}"
        )
    sizes = smoothed.state_space.factor_sizes
    if alpha.factor_sizes != sizes:
        raise ValueError(f"alpha factor sizes {alpha.factor_sizes} != smoothed {sizes}")
    msizes = alpha.modality_sizes
    horizon = smoothed.horizon
    lr = float(learning_rate)

    new_d = [a.copy() for a in alpha.alpha_d]
    for f in range(len(sizes)):
        new_d[f] += lr * smoothed.factor_marginal(1, f)

    new_a = [a.copy() for a in alpha.alpha_a]
    for tau in range(1, horizon + 1):
        outcome = np.unravel_index(history.observations[tau - 1], msizes)
        q_tau = smoothed.marginals[tau - 1].reshape(sizes)
        for m in range(len(msizes)):
            new_a[m][outcome[m]] += lr * q_tau

    new_b = [b.copy() for b in alpha.alpha_b]
    for tau in range(2, horizon + 1):
        action = history.actions[tau - 2]
        for f in range(len(sizes)):
            if use_pairwise:
                pair = smoothed.factor_pairwise(tau, f)
            else:
                pair = np.outer(smoothed.factor_marginal(tau, f), smoothed.factor_marginal(tau - 1, f))
            new_b[f][:, :, action] += lr * pair

    return DirichletParams(alpha_a=tuple(new_a), alpha_b=tuple(new_b), alpha_d=tuple(new_d))


def dirichlet_mean(alpha_vector: np.ndarray) -> np.ndarray:
    """Mean of a Dirichlet distribution: alpha_i / sum_j alpha_j."""
    v = np.asarray(alpha_vector, dtype=float)
    if np.any(v <= 0):
        raise ValueError("Dirichlet hyperparameters must be strictly positive")
    return v / v.sum()


def model_from_alpha(alpha: DirichletParams, template: GenerativeModel) -> GenerativeModel:
    """Point-estimate model: every kernel column replaced by its Dirichlet mean.

    Spaces, preferences, and horizon are copied from the template.
    """
    if alpha.factor_sizes != template.state_space.factor_sizes:
        raise ValueError("alpha factor sizes do not match the template")
    if alpha.modality_sizes != template.obs_space.modality_sizes:
        raise ValueError("alpha modality sizes do not match the template")
    A = []
    for a in alpha.alpha_a:
        flat = a.reshape(a.shape[0], -1)
        A.append((flat / flat.sum(axis=0)).reshape(a.shape))
    B = [b / b.sum(axis=0) for b in alpha.alpha_b]
    D = [dirichlet_mean(d) for d in alpha.alpha_d]
    return GenerativeModel(
        state_space=template.state_space,
        obs_space=template.obs_space,
        action_space=template.action_space,
        A=A,
        B=B,
        C=PreferenceDistribution(template.C.weights, template.C.normalize_before_log),
        D=D,
        horizon=template.horizon,
    )


# Alpha checkpoints reuse the model-file layout with alpha_* field names.


def save_alpha(alpha: DirichletParams, path: str | Path) -> None:
    n_s = int(np.prod(alpha.factor_sizes))
    doc = {
        "state_factors": list(alpha.factor_sizes),
        "obs_modalities": list(alpha.modality_sizes),
        "num_actions": int(alpha.alpha_b[0].shape[2]),
        "alpha_A": [a.reshape(a.shape[0], n_s).T.tolist() for a in alpha.alpha_a],
        "alpha_B": [b.transpose(2, 1, 0).tolist() for b in alpha.alpha_b],
        "alpha_D": [d.tolist() for d in alpha.alpha_d],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_alpha(path: str | Path) -> DirichletParams:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    try:
        sizes = tuple(int(n) for n in doc["state_factors"])
        msizes = tuple(int(n) for n in doc["obs_modalities"])
        alpha_a = tuple(
            np.asarray(doc["alpha_A"][m], dtype=float).T.reshape(msizes[m], *sizes)
            for m in range(len(msizes))
        )
        alpha_b = tuple(
            np.asarray(doc["alpha_B"][f], dtype=float).transpose(2, 1, 0) for f in range(len(sizes))
        )
        alpha_d = tuple(np.asarray(doc["alpha_D"][f], dtype=float) for f in range(len(sizes)))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: bad alpha checkpoint: {e}") from e
    n_actions = alpha_b[0].shape[2] if alpha_b else 0
    if any(a.shape != (msizes[m], *sizes) for m, a in enumerate(alpha_a)) or any(
        b.shape != (s, s, n_actions) for b, s in zip(alpha_b, sizes)
    ) or any(d.shape != (s,) for d, s in zip(alpha_d, sizes)):
        raise ModelFormatError(f"{path}: alpha shapes inconsistent with declared spaces")
    return DirichletParams(alpha_a=alpha_a, alpha_b=alpha_b, alpha_d=alpha_d)
