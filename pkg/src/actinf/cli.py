"""Episode runner: agent x environment simulation with trajectory logging.

Runs the perception -> policy scoring -> action loop for one or more
episodes, writes one JSON record per step to ``trajectory.jsonl`` plus a
``summary.json``, and can print the policy-posterior tables. Runs with the
same seed and configuration produce byte-identical logs (no timestamps, one
deterministic generator, PCG64 via numpy's default_rng).

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .efe import _joint_log_preferences
from .env import (
    ACTION_LABELS,
    CUE_OUTCOMES,
    LOCATIONS,
    REWARD_OUTCOMES,
    Environment,
    ModelEnv,
    TMazeEnv,
    build_tmaze_model,
)
from .errors import ActinfError
from .inference import History, filter_step, initial_belief
from .learning import learn_episode, model_from_alpha, save_alpha, uniform_alpha
from .model import GenerativeModel, PreferenceDistribution, load_model, validate_model
from .policy import PolicyPosterior, greedy_action, policy_posterior, select_action
from .inference import smooth

RNG_NAME = "numpy default_rng (PCG64)"

TMAZE_OUTCOME_LABELS = (LOCATIONS, REWARD_OUTCOMES, CUE_OUTCOMES)


class ConfigError(Exception):
    """Invalid run configuration (maps to exit code 2)."""


@dataclass
class RunConfig:
    model: str = "tmaze"
    episodes: int = 1
    seed: int | None = None
    mode: str = "greedy"
    learn: bool = False
    out: str = "runs"
    c_normalize: bool | None = None
    force_reward_side: str | None = None
    emit_tables: bool = False

    def validate(self) -> None:
        if self.episodes < 1:
            raise ConfigError(f"--episodes must be >= 1, got {self.episodes}")
        if self.mode not in ("sample", "greedy"):
            raise ConfigError(f"--mode must be sample or greedy, got {self.mode!r}")
        if self.mode == "sample" and self.seed is None:
            raise ConfigError("--seed is required when --mode sample")
        if self.force_reward_side not in (None, "left", "right"):
            raise ConfigError("--force-reward-side must be left or right")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="actinf",
        description="Simulate an active inference agent in a discrete environment.",
    )
    p.add_argument("--model", default="tmaze", help="model file path, or the builtin 'tmaze'")
    p.add_argument("--episodes", type=int, default=1, help="number of episodes to run")
    p.add_argument("--seed", type=lambda s: int(s) & (2**64 - 1), default=None, help="master seed")
    p.add_argument("--mode", choices=("sample", "greedy"), default="greedy",
                   help="sample: draw the policy from its posterior; greedy: take the argmax")
    p.add_argument("--learn", action="store_true",
                   help="update Dirichlet hyperparameters after each episode and carry them forward")
    p.add_argument("--out", default="runs", help="output directory for logs")
    p.add_argument("--c-normalize", type=_parse_bool, default=None, metavar="true|false",
                   help="override the model's preference convention (normalize weights before log)")
    p.add_argument("--force-reward-side", choices=("left", "right"), default=None,
                   help="pin the T-maze reward side instead of drawing it at reset")
    p.add_argument("--emit-tables", action="store_true",
                   help="print the policy-posterior table at every decision step")
    return p


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        model=args.model,
        episodes=args.episodes,
        seed=args.seed,
        mode=args.mode,
        learn=args.learn,
        out=args.out,
        c_normalize=args.c_normalize,
        force_reward_side=args.force_reward_side,
        emit_tables=args.emit_tables,
    )
    cfg.validate()
    return cfg


def emit_table(posterior: PolicyPosterior, action_labels: tuple[str, ...]) -> str:
    """Fixed-width policy-posterior table, probabilities to three decimals.

    Length-2 policies render as a matrix (rows: first action, columns:
    second action); length-1 policies as one row; the empty policy as a
    single cell.
    """
    lengths = {len(p) for p in posterior.policies}
    if lengths == {0}:
        return "1.000"
    width = max(max(len(s) for s in action_labels), 6) + 2
    if lengths == {2}:
        n = len(action_labels)
        grid = {(p.actions[0], p.actions[1]): prob
                for p, prob in zip(posterior.policies, posterior.probabilities)}
        head = "a1 \\ a2".ljust(width) + "".join(s.rjust(width) for s in action_labels)
        rows = [
            action_labels[i].ljust(width)
            + "".join(f"{grid[(i, j)]:.3f}".rjust(width) for j in range(n))
            for i in range(n)
        ]
        return "\n".join([head] + rows)
    if lengths == {1}:
        head = "".join(action_labels[p.actions[0]].rjust(width) for p in posterior.policies)
        row = "".join(f"{prob:.3f}".rjust(width) for prob in posterior.probabilities)
        return "\n".join([head, row])
    # mixed or longer policies: one line per policy
    return "\n".join(
        f"{'-'.join(action_labels[a] for a in p.actions) or '(empty)'}: {prob:.3f}"
        for p, prob in zip(posterior.policies, posterior.probabilities)
    )


def _outcome_labels(model: GenerativeModel, builtin_tmaze: bool, outcome: tuple[int, ...]) -> list[str]:
    if builtin_tmaze:
        return [TMAZE_OUTCOME_LABELS[m][i] for m, i in enumerate(outcome)]
    return [f"modality{m}={i}" for m, i in enumerate(outcome)]


def _posterior_record(posterior: PolicyPosterior) -> list[dict]:
    out = []
    for pol, prob, g, bd in zip(
        posterior.policies, posterior.probabilities, posterior.g_values, posterior.breakdowns
    ):
        out.append(
            {
                "actions": list(pol.actions),
                "p": float(prob),
                "G": float(g),
                "steps": [
                    {
                        "tau": s.tau,
                        "epistemic": s.epistemic_value,
                        "utility": s.utility,
                        "ambiguity": s.ambiguity,
                        "risk": s.risk,
                        "g": s.g,
                    }
                    for s in bd.steps
                ],
            }
        )
    return out


def _apply_c_override(model: GenerativeModel, c_normalize: bool) -> GenerativeModel:
    return GenerativeModel(
        state_space=model.state_space,
        obs_space=model.obs_space,
        action_space=model.action_space,
        A=list(model.A),
        B=list(model.B),
        C=PreferenceDistribution(model.C.weights, normalize_before_log=c_normalize),
        D=list(model.D),
        horizon=model.horizon,
    )


def run(config: RunConfig) -> int:
    """Execute the configured episodes; returns the process exit code."""
    try:
        config.validate()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        builtin_tmaze = config.model == "tmaze"
        if builtin_tmaze:
            true_model, _, alpha = build_tmaze_model()
            env: Environment = TMazeEnv(
                horizon=true_model.horizon, force_reward_side=config.force_reward_side
            )
        else:
            true_model = load_model(config.model)
            alpha = uniform_alpha(true_model)
            env = ModelEnv(true_model)

        if config.c_normalize is not None:
            true_model = _apply_c_override(true_model, config.c_normalize)
        problems = validate_model(true_model)
        if problems:
            raise ActinfError("invalid model: " + "; ".join(str(v) for v in problems[:5]))

        # Without learning the agent uses the exact model; with learning it
        # starts from the Dirichlet means of the carried hyperparameters.
        agent_model = model_from_alpha(alpha, true_model) if config.learn else true_model
        action_labels = tuple(
            true_model.action_space.label(a) for a in range(true_model.n_actions)
        )
        ln_c_norm = None  # realized utility uses the normalized preference convention

        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        trajectory_path = out_dir / "trajectory.jsonl"
        seed = config.seed if config.seed is not None else 0
        root = np.random.SeedSequence(seed)
        episode_seeds = root.spawn(config.episodes)

        utilities: list[float] = []
        with trajectory_path.open("w") as log:
            for episode in range(config.episodes):
                env_seq, action_seq = episode_seeds[episode].spawn(2)
                env_seed = int(env_seq.generate_state(1, np.uint64)[0])
                step_seeds = action_seq.spawn(true_model.horizon)

                ln_c, log_z = _joint_log_preferences(agent_model)
                ln_c_norm = ln_c - log_z

                obs = env.reset(env_seed)
                belief = filter_step(agent_model, initial_belief(agent_model), None, obs)
                history = History((obs,), ())
                utility = float(ln_c_norm[obs])

                for t in range(1, true_model.horizon + 1):
                    posterior = policy_posterior(agent_model, belief, history)
                    action = None
                    if t < true_model.horizon:
                        if config.mode == "greedy":
                            action = greedy_action(posterior)
                        else:
                            action = select_action(
                                posterior, int(step_seeds[t - 1].generate_state(1, np.uint64)[0])
                            )
                    outcome = true_model.obs_space.unravel(history.observations[-1])
                    record = {
                        "episode": episode,
                        "t": t,
                        "observation": {
                            "joint": history.observations[-1],
                            "outcomes": list(outcome),
                            "labels": _outcome_labels(true_model, builtin_tmaze, outcome),
                        },
                        "belief": [float(x) for x in belief.as_joint()],
                        "policy_posterior": _posterior_record(posterior),
                        "action": action,
                        "action_label": action_labels[action] if action is not None else None,
                    }
                    log.write(json.dumps(record) + "\n")
                    if config.emit_tables:
                        print(f"episode {episode}, t={t}")
                        print(emit_table(posterior, action_labels))
                        print()
                    if action is None:
                        break
                    obs = env.step(action)
                    belief = filter_step(agent_model, belief, action, obs)
                    history = history.extended(action, obs)
                    utility += float(ln_c_norm[obs])

                episode_record = {"episode": episode, "end": True, "utility": utility}
                if config.learn:
                    smoothed = smooth(agent_model, history)
                    new_alpha = learn_episode(alpha, smoothed, history)
                    episode_record["alpha_delta"] = {
                        "D": [
                            (n - o).tolist() for n, o in zip(new_alpha.alpha_d, alpha.alpha_d)
                        ],
                        "A_mass": [
                            float((n - o).sum()) for n, o in zip(new_alpha.alpha_a, alpha.alpha_a)
                        ],
                        "B_mass": [
                            float((n - o).sum()) for n, o in zip(new_alpha.alpha_b, alpha.alpha_b)
                        ],
                    }
                    alpha = new_alpha
                    agent_model = model_from_alpha(alpha, true_model)
                log.write(json.dumps(episode_record) + "\n")
                utilities.append(utility)
                print(f"episode {episode}: utility={utility:.6f}")

        summary = {
            "config": {
                "model": config.model,
                "episodes": config.episodes,
                "seed": seed,
                "mode": config.mode,
                "learn": config.learn,
                "c_normalize": config.c_normalize,
                "force_reward_side": config.force_reward_side,
            },
            "rng": RNG_NAME,
            "per_episode_utility": utilities,
            "mean_utility": float(np.mean(utilities)),
        }
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
        if config.learn:
            save_alpha(alpha, out_dir / "alpha.json")
        return 0
    except ActinfError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
