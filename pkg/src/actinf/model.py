"""Factorized categorical generative models for discrete POMDPs.

A model bundles

* a state space made of independent factors,
* an observation space made of independent modalities,
* a likelihood kernel ``A`` (one tensor per modality, conditioned on the
  joint state, since observations may couple factors),
* transition kernels ``B`` (one matrix stack per factor; factors evolve
  independently given the action),
* a preference weighting ``C`` over observations,
* an initial state prior ``D`` (one vector per factor),
* a fixed episode horizon.

Joint state and joint observation indices are row-major flattenings with
factor/modality 0 varying slowest; the same convention is used everywhere in
the package and in the model file format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path

import numpy as np

from .errors import CombinatorialLimitError, ModelFormatError
from .numerics import EPS

# Tolerance for "columns sum to one" checks on stored kernels.
COLUMN_TOL = 1e-12

# Guard for materializing the joint observation-by-state likelihood matrix.
JOINT_TABLE_CAP = 4_000_000


@dataclass(frozen=True)
class StateSpace:
    """Cardinalities of the hidden state factors."""

    factor_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factor_sizes", tuple(int(n) for n in self.factor_sizes))
        if any(n < 1 for n in self.factor_sizes):
            raise ValueError(f"factor sizes must be >= 1, got {self.factor_sizes}")

    @property
    def n_factors(self) -> int:
        return len(self.factor_sizes)

    @property
    def n_joint(self) -> int:
        return int(np.prod(self.factor_sizes))

    def ravel(self, multi: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(multi, self.factor_sizes))

    def unravel(self, joint: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(joint, self.factor_sizes))


@dataclass(frozen=True)
class ObservationSpace:
    """Cardinalities of the observation modalities."""

    modality_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modality_sizes", tuple(int(n) for n in self.modality_sizes))
        if any(n < 1 for n in self.modality_sizes):
            raise ValueError(f"modality sizes must be >= 1, got {self.modality_sizes}")

    @property
    def n_modalities(self) -> int:
        return len(self.modality_sizes)

    @property
    def n_joint(self) -> int:
        return int(np.prod(self.modality_sizes))

    def ravel(self, multi: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(multi, self.modality_sizes))

    def unravel(self, joint: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(joint, self.modality_sizes))


@dataclass(frozen=True)
class ActionSpace:
    """Discrete actions, optionally with human-readable labels."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "size", int(self.size))
        if self.size < 1:
            raise ValueError("action space must have at least one action")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError("number of labels must match action count")
            object.__setattr__(self, "labels", labels)

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels else f"action {a}"


@dataclass(frozen=True)
class PreferenceDistribution:
    """Per-modality observation preference weights.

    ``normalize_before_log`` selects how the weights enter the expected free
    energy: when True, each modality's weights are normalized into a
    probability vector whose log is used; when False, the weights themselves
    are used as log-preferences (the convention that reproduces the published
    T-maze policy tables).
    """

    weights: tuple[np.ndarray, ...]
    normalize_before_log: bool = True

    def __post_init__(self):
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        for w in ws:
            w.flags.writeable = False
        object.__setattr__(self, "weights", ws)


@dataclass(eq=False)
class GenerativeModel:
    """A complete factorized POMDP model; immutable after construction.

    Kernel layouts:

    * ``A[m]`` has shape ``(modality_sizes[m], *factor_sizes)``; for every
      joint state, ``A[m][:, s]`` is a distribution over outcomes.
    * ``B[f]`` has shape ``(n_f, n_f, n_actions)`` ordered (next, previous,
      action); each column ``B[f][:, k, l]`` is a distribution over next
      states.
    * ``D[f]`` is a distribution over factor ``f``'s initial state.
    """

    state_space: StateSpace
    obs_space: ObservationSpace
    action_space: ActionSpace
    A: list[np.ndarray]
    B: list[np.ndarray]
    C: PreferenceDistribution
    D: list[np.ndarray]
    horizon: int
    _joint_B: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.A = [np.ascontiguousarray(a, dtype=float) for a in self.A]
        self.B = [np.ascontiguousarray(b, dtype=float) for b in self.B]
        self.D = [np.ascontiguousarray(d, dtype=float) for d in self.D]
        for arr in (*self.A, *self.B, *self.D):
            arr.flags.writeable = False
        self.horizon = int(self.horizon)

    # -- joint-index helpers ------------------------------------------------

    @property
    def n_states(self) -> int:
        return self.state_space.n_joint

    @property
    def n_obs(self) -> int:
        return self.obs_space.n_joint

    @property
    def n_actions(self) -> int:
        return self.action_space.size

    @cached_property
    def initial_prior(self) -> np.ndarray:
        """Prior over the joint state: the outer product of the factor priors."""
        return reduce(np.kron, self.D).copy()

    @cached_property
    def likelihood_table(self) -> np.ndarray:
        """Dense p(o | s) with joint observation rows and joint state columns."""
        n_o, n_s = self.n_obs, self.n_states
        if n_o * n_s > JOINT_TABLE_CAP:
            raise CombinatorialLimitError(
                f"joint likelihood table of {n_o}x{n_s} exceeds cap {JOINT_TABLE_CAP}"
            )
        obs_multi = np.unravel_index(np.arange(n_o), self.obs_space.modality_sizes)
        table = np.ones((n_o, n_s))
        for m, a_m in enumerate(self.A):
            table *= a_m.reshape(a_m.shape[0], n_s)[obs_multi[m], :]
        table.flags.writeable = False
        return table

    @cached_property
    def outcome_entropies(self) -> np.ndarray:
        """H[p(o | s)] per joint state, in nats."""
        table = self.likelihood_table
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(table > 0, np.log(np.maximum(table, EPS)), 0.0)
        return -(table * logs).sum(axis=0)

    def joint_transition(self, action: int) -> np.ndarray:
        """Dense p(s' | s, a) over joint states for one action."""
        a = int(action)
        if not 0 <= a < self.n_actions:
            raise IndexError(f"action index {a} out of range")
        if a not in self._joint_B:
            mat = reduce(np.kron, [b[:, :, a] for b in self.B])
            mat.flags.writeable = False
            self._joint_B[a] = mat
        return self._joint_B[a]

    def likelihood_column(self, observation: int) -> np.ndarray:
        """p(o | s) over joint states for a fixed joint observation index."""
        o = int(observation)
        if not 0 <= o < self.n_obs:
            raise IndexError(f"observation index {o} out of range")
        return self.likelihood_table[o]


@dataclass(frozen=True)
class Violation:
    """One failed model invariant: which kernel, where, and what broke."""

    kernel: str
    index: tuple | None
    constraint: str

    def __str__(self) -> str:
        where = f" at {self.index}" if self.index is not None else ""
        return f"{self.kernel}{where}: {self.constraint}"


def validate_model(model: GenerativeModel) -> list[Violation]:
    """Check every kernel invariant; returns an empty list iff the model is valid.

    Reports violations rather than raising, so a single pass surfaces every
    problem in a hand-written model file.
    """
    v: list[Violation] = []
    sizes = model.state_space.factor_sizes
    msizes = model.obs_space.modality_sizes
    n_a = model.action_space.size

    if model.horizon < 2:
        v.append(Violation("horizon", None, f"horizon must be >= 2, got {model.horizon}"))

    if len(model.A) != len(msizes):
        v.append(Violation("A", None, f"expected {len(msizes)} modalities, got {len(model.A)}"))
    else:
        for m, a_m in enumerate(model.A):
            want = (msizes[m], *sizes)
            if a_m.shape != want:
                v.append(Violation("A", (m,), f"shape {a_m.shape} != expected {want}"))
                continue
            flat = a_m.reshape(msizes[m], -1)
            if np.any(flat < 0) or np.any(flat > 1):
                s = int(np.flatnonzero((flat < 0) | (flat > 1))[0] % flat.shape[1])
                v.append(Violation("A", (m, s), "entries must lie in [0, 1]"))
            col_sums = flat.sum(axis=0)
            bad = np.flatnonzero(np.abs(col_sums - 1.0) > COLUMN_TOL)
            for s in bad:
                v.append(
                    Violation("A", (m, int(s)), f"column sums to {col_sums[s]:.12g}, expected 1")
                )

    if len(model.B) != len(sizes):
        v.append(Violation("B", None, f"expected {len(sizes)} factors, got {len(model.B)}"))
    else:
        for f, b_f in enumerate(model.B):
            want = (sizes[f], sizes[f], n_a)
            if b_f.shape != want:
                v.append(Violation("B", (f,), f"shape {b_f.shape} != expected {want}"))
                continue
            if np.any(b_f < 0) or np.any(b_f > 1):
                v.append(Violation("B", (f,), "entries must lie in [0, 1]"))
            col_sums = b_f.sum(axis=0)
            for k, l in zip(*np.nonzero(np.abs(col_sums - 1.0) > COLUMN_TOL)):
                v.append(
                    Violation(
                        "B",
                        (f, int(k), int(l)),
                        f"column sums to {col_sums[k, l]:.12g}, expected 1",
                    )
                )

    if len(model.C.weights) != len(msizes):
        v.append(Violation("C", None, f"expected {len(msizes)} modalities, got {len(model.C.weights)}"))
    else:
        for m, w in enumerate(model.C.weights):
            if w.shape != (msizes[m],):
                v.append(Violation("C", (m,), f"shape {w.shape} != expected ({msizes[m]},)"))
                continue
            if np.any(w < 0):
                v.append(Violation("C", (m, int(np.flatnonzero(w < 0)[0])), "weights must be >= 0"))
            if not np.any(w > 0):
                v.append(Violation("C", (m,), "at least one weight must be positive"))

    if len(model.D) != len(sizes):
        v.append(Violation("D", None, f"expected {len(sizes)} factors, got {len(model.D)}"))
    else:
        for f, d_f in enumerate(model.D):
            if d_f.shape != (sizes[f],):
                v.append(Violation("D", (f,), f"shape {d_f.shape} != expected ({sizes[f]},)"))
                continue
            if np.any(d_f < 0):
                v.append(Violation("D", (f,), "entries must be >= 0"))
            total = d_f.sum()
            if abs(total - 1.0) > COLUMN_TOL:
                v.append(Violation("D", (f,), f"sums to {total:.12g}, expected 1"))

    return v


def joint_likelihood(model: GenerativeModel, observation: int, state: int) -> float:
    """p(o | s) for joint indices: the product of the per-modality kernels."""
    if not 0 <= int(state) < model.n_states:
        raise IndexError(f"state index {state} out of range")
    return float(model.likelihood_column(int(observation))[int(state)])


# -- file format -----------------------------------------------------------
#
# A model file is one JSON document:
#   state_factors:   [int]                      factor cardinalities
#   obs_modalities:  [int]                      modality cardinalities
#   num_actions:     int
#   horizon:         int
#   A: [modality][joint_state][outcome]
#   B: [factor][action][prev][next]
#   C: [modality][outcome]
#   D: [factor][state]
#   c_normalize:     bool
# Joint-state flattening is row-major with factor 0 slowest.

_REQUIRED_FIELDS = (
    "state_factors",
    "obs_modalities",
    "num_actions",
    "horizon",
    "A",
    "B",
    "C",
    "D",
    "c_normalize",
)


def save_model(model: GenerativeModel, path: str | Path) -> None:
    """Write a model as a JSON document (see the schema comment above)."""
    n_s = model.n_states
    doc = {
        "state_factors": list(model.state_space.factor_sizes),
        "obs_modalities": list(model.obs_space.modality_sizes),
        "num_actions": model.action_space.size,
        "horizon": model.horizon,
        "A": [a.reshape(a.shape[0], n_s).T.tolist() for a in model.A],
        "B": [b.transpose(2, 1, 0).tolist() for b in model.B],
        "C": [w.tolist() for w in model.C.weights],
        "D": [d.tolist() for d in model.D],
        "c_normalize": bool(model.C.normalize_before_log),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path: str | Path) -> GenerativeModel:
    """Read a model file; raises :class:`ModelFormatError` with diagnostics."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object at top level")
    missing = [k for k in _REQUIRED_FIELDS if k not in doc]
    if missing:
        raise ModelFormatError(f"{path}: missing fields {missing}")

    try:
        sizes = tuple(int(n) for n in doc["state_factors"])
        msizes = tuple(int(n) for n in doc["obs_modalities"])
        space = StateSpace(sizes)
        obs = ObservationSpace(msizes)
        actions = ActionSpace(int(doc["num_actions"]))
    except (TypeError, ValueError) as e:
        raise ModelFormatError(f"{path}: bad space declaration: {e}") from e

    n_s = space.n_joint

    def _field_array(name: str, entry, want_shape: tuple[int, ...]) -> np.ndarray:
        try:
            arr = np.asarray(entry, dtype=float)
        except (TypeError, ValueError) as e:
            raise ModelFormatError(f"{path}: field {name}: not numeric: {e}") from e
        if arr.shape != want_shape:
            raise ModelFormatError(f"{path}: field {name}: shape {arr.shape} != expected {want_shape}")
        return arr

    if len(doc["A"]) != obs.n_modalities:
        raise ModelFormatError(f"{path}: field A: expected {obs.n_modalities} modalities")
    A = [
        _field_array(f"A[{m}]", doc["A"][m], (n_s, msizes[m])).T.reshape(msizes[m], *sizes)
        for m in range(obs.n_modalities)
    ]
    if len(doc["B"]) != space.n_factors:
        raise ModelFormatError(f"{path}: field B: expected {space.n_factors} factors")
    B = [
        _field_array(f"B[{f}]", doc["B"][f], (actions.size, sizes[f], sizes[f])).transpose(2, 1, 0)
        for f in range(space.n_factors)
    ]
    if len(doc["C"]) != obs.n_modalities:
        raise ModelFormatError(f"{path}: field C: expected {obs.n_modalities} modalities")
    C = PreferenceDistribution(
        weights=tuple(_field_array(f"C[{m}]", doc["C"][m], (msizes[m],)) for m in range(obs.n_modalities)),
        normalize_before_log=bool(doc["c_normalize"]),
    )
    if len(doc["D"]) != space.n_factors:
        raise ModelFormatError(f"{path}: field D: expected {space.n_factors} factors")
    D = [_field_array(f"D[{f}]", doc["D"][f], (sizes[f],)) for f in range(space.n_factors)]

    return GenerativeModel(
        state_space=space,
        obs_space=obs,
        action_space=actions,
        A=A,
        B=B,
        C=C,
        D=D,
        horizon=int(doc["horizon"]),
    )


def models_equal(a: GenerativeModel, b: GenerativeModel) -> bool:
    """Field-for-field equality of everything the file format stores."""
    return (
        a.state_space == b.state_space
        and a.obs_space == b.obs_space
        and a.action_space.size == b.action_space.size
        and a.horizon == b.horizon
        and a.C.normalize_before_log == b.C.normalize_before_log
        and all(np.array_equal(x, y) for x, y in zip(a.A, b.A))
        and all(np.array_equal(x, y) for x, y in zip(a.B, b.B))
        and all(np.array_equal(x, y) for x, y in zip(a.C.weights, b.C.weights))
        and all(np.array_equal(x, y) for x, y in zip(a.D, b.D))
    )
