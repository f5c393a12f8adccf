import numpy as np
import pytest

from actinf.efe import (
    Policy,
    _joint_log_preferences,
    _lookahead_beliefs,
    efe_ambiguity_form,
    efe_epistemic_form,
    entropy,
    kl_divergence,
)
from actinf.errors import SupportViolationError
from actinf.inference import BeliefState, History, filter_step, initial_belief
from actinf.model import (
    ActionSpace,
    GenerativeModel,
    ObservationSpace,
    PreferenceDistribution,
    StateSpace,
)
from actinf.numerics import softmax

from conftest import random_model
from oracles import sequence_efe


class TestInformationHelpers:
    def test_entropy_of_a_point_mass_is_zero(self):
        assert entropy([1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)

    def test_entropy_of_uniform(self):
        assert entropy([0.25] * 4) == pytest.approx(np.log(4), abs=1e-12)

    def test_kl_of_identical_distributions_is_zero(self):
        assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)

    def test_kl_point_mass_against_uniform(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2), abs=1e-12)

    def test_kl_support_violation(self):
        with pytest.raises(SupportViolationError):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_kl_nonnegative_on_random_pairs(self, rng):
        for _ in range(50):
            p = rng.dirichlet(np.ones(4))
            q = rng.dirichlet(np.ones(4))
            assert kl_divergence(p, q) >= 0.0


def tmaze_belief_after(tmaze, observations, actions):
    belief = filter_step(tmaze, initial_belief(tmaze), None, observations[0])
    for a, o in zip(actions, observations[1:]):
        belief = filter_step(tmaze, belief, a, o)
    return belief


class TestEfeOnTheTmaze:
    def test_epistemic_value_vanishes_once_the_cue_is_seen(self, tmaze):
        o1 = tmaze.obs_space.ravel((0, 0, 0))
        o2 = tmaze.obs_space.ravel((3, 0, 0))
        b2 = tmaze_belief_after(tmaze, (o1, o2), (3,))
        breakdown = efe_epistemic_form(tmaze, b2, Policy((2,), start_time=2))
        assert breakdown.steps[0].tau == 3
        assert breakdown.steps[0].epistemic_value == pytest.approx(0.0, abs=1e-12)

    def test_empty_policy_has_zero_g(self, tmaze):
        o1 = tmaze.obs_space.ravel((0, 0, 0))
        b1 = tmaze_belief_after(tmaze, (o1,), ())
        breakdown = efe_epistemic_form(tmaze, b1, Policy((), start_time=3))
        assert breakdown.steps == ()
        assert breakdown.total == 0.0


def uniform_model(rng, n_states=3, n_obs=3, n_actions=2, horizon=3):
    """Uninformative likelihood and uniform preferences: no reason to act."""
    a = np.full((n_obs, n_states), 1.0 / n_obs)
    b = np.zeros((n_states, n_states, n_actions))
    for act in range(n_actions):
        for s in range(n_states):
            b[:, s, act] = rng.dirichlet(np.ones(n_states))
    return GenerativeModel(
        state_space=StateSpace((n_states,)),
        obs_space=ObservationSpace((n_obs,)),
        action_space=ActionSpace(n_actions),
        A=[a],
        B=[b],
        C=PreferenceDistribution((np.ones(n_obs),), normalize_before_log=True),
        D=[rng.dirichlet(np.ones(n_states))],
        horizon=horizon,
    )


class TestDegenerateCases:
    def test_uniform_likelihood_and_preferences_score_all_policies_equally(self, rng):
        model = uniform_model(rng)
        belief = BeliefState(joint=rng.dirichlet(np.ones(model.n_states)))
        totals = []
        for a1 in range(2):
            for a2 in range(2):
                totals.append(efe_epistemic_form(model, belief, Policy((a1, a2), 1)).total)
        np.testing.assert_allclose(totals, totals[0], atol=1e-12)
        np.testing.assert_allclose(softmax(-np.asarray(totals)), 0.25, atol=1e-12)

    def test_deterministic_likelihood_has_zero_ambiguity(self, rng):
        n = 3
        a = np.eye(n)
        b = np.zeros((n, n, 2))
        for act in range(2):
            for s in range(n):
                b[:, s, act] = rng.dirichlet(np.ones(n))
        model = GenerativeModel(
            state_space=StateSpace((n,)),
            obs_space=ObservationSpace((n,)),
            action_space=ActionSpace(2),
            A=[a],
            B=[b],
            C=PreferenceDistribution((np.ones(n),)),
            D=[rng.dirichlet(np.ones(n))],
            horizon=3,
        )
        belief = BeliefState(joint=rng.dirichlet(np.ones(n)))
        for a1 in range(2):
            breakdown = efe_ambiguity_form(model, belief, Policy((a1, a1), 1))
            for step in breakdown.steps:
                assert step.ambiguity == pytest.approx(0.0, abs=1e-12)

    def test_risk_is_zero_when_predictions_match_preferences(self, rng):
        model = random_model(rng, max_modalities=1, c_normalize=True)
        belief = BeliefState(joint=rng.dirichlet(np.ones(model.n_states)))
        policy = Policy((0,), start_time=model.horizon - 1)
        q_o = model.likelihood_table @ _lookahead_beliefs(model, belief, policy, "stepwise")[0]
        matched = GenerativeModel(
            state_space=model.state_space,
            obs_space=model.obs_space,
            action_space=model.action_space,
            A=list(model.A),
            B=list(model.B),
            C=PreferenceDistribution((q_o,), normalize_before_log=True),
            D=list(model.D),
            horizon=model.horizon,
        )
        breakdown = efe_ambiguity_form(matched, belief, policy)
        assert breakdown.steps[0].risk == pytest.approx(0.0, abs=1e-10)


class TestSequenceOracle:
    @pytest.mark.parametrize("lookahead", ["stepwise", "rollout"])
    @pytest.mark.parametrize("c_normalize", [True, False])
    def test_mean_field_total_matches_exhaustive_sequence_sums(self, rng, lookahead, c_normalize):
        for _ in range(8):
            model = random_model(
                rng, max_joint=4, max_factors=2, max_modalities=1, horizon=3,
                c_normalize=c_normalize,
            )
            history = History((int(rng.integers(model.n_obs)),), ())
            belief = filter_step(model, initial_belief(model), None, history.observations[0])
            policy = Policy(
                tuple(int(rng.integers(model.n_actions)) for _ in range(2)), start_time=1
            )
            beliefs = _lookahead_beliefs(model, belief, policy, lookahead)
            ln_c, log_z = _joint_log_preferences(model)
            oracle_epi, oracle_amb = sequence_efe(model, beliefs, ln_c)

            ours_epi = efe_epistemic_form(model, belief, policy, lookahead=lookahead).total
            np.testing.assert_allclose(ours_epi, oracle_epi, atol=1e-9)
            # the ambiguity-form oracle uses raw preferences; our risk term is
            # normalized, shifting the total by len(policy) * log_z
            ours_amb = efe_ambiguity_form(model, belief, policy, lookahead=lookahead).total
            np.testing.assert_allclose(ours_amb - len(policy) * log_z, oracle_amb, atol=1e-9)


class TestFormEquivalence:
    def test_forms_agree_exactly_with_normalized_preferences(self, rng):
        for _ in range(30):
            model = random_model(rng, c_normalize=True)
            history = History((int(rng.integers(model.n_obs)),), ())
            belief = filter_step(model, initial_belief(model), None, history.observations[0])
            length = model.horizon - 1
            policy = Policy(tuple(int(rng.integers(model.n_actions)) for _ in range(length)), 1)
            g1 = efe_epistemic_form(model, belief, policy).total
            g2 = efe_ambiguity_form(model, belief, policy).total
            assert abs(g1 - g2) < 1e-9

    def test_forms_differ_by_a_policy_independent_constant_otherwise(self, rng):
        for _ in range(10):
            model = random_model(rng, c_normalize=False)
            history = History((int(rng.integers(model.n_obs)),), ())
            belief = filter_step(model, initial_belief(model), None, history.observations[0])
            length = model.horizon - 1
            gaps = []
            for _ in range(4):
                policy = Policy(
                    tuple(int(rng.integers(model.n_actions)) for _ in range(length)), 1
                )
                gaps.append(
                    efe_ambiguity_form(model, belief, policy).total
                    - efe_epistemic_form(model, belief, policy).total
                )
            np.testing.assert_allclose(gaps, gaps[0], atol=1e-9)


class TestEfeProperties:
    def test_terms_are_nonnegative(self, rng):
        for _ in range(20):
            model = random_model(rng, c_normalize=bool(rng.integers(2)))
            obs = int(rng.integers(model.n_obs))
            belief = filter_step(model, initial_belief(model), None, obs)
            length = model.horizon - 1
            policy = Policy(tuple(int(rng.integers(model.n_actions)) for _ in range(length)), 1)
            for breakdown in (
                efe_epistemic_form(model, belief, policy),
                efe_ambiguity_form(model, belief, policy),
            ):
                for step in breakdown.steps:
                    assert step.epistemic_value >= -1e-12
                    assert step.ambiguity >= -1e-12
                    assert step.risk >= -1e-12

    def test_breakdown_identity_links_the_two_forms(self, rng):
        # g (epistemic form) = -(epistemic + utility); ambiguity + risk differs
        # only by the preference normalizer
        for _ in range(10):
            model = random_model(rng, c_normalize=False)
            obs = int(rng.integers(model.n_obs))
            belief = filter_step(model, initial_belief(model), None, obs)
            policy = Policy((0,), start_time=model.horizon - 1)
            _, log_z = _joint_log_preferences(model)
            step = efe_epistemic_form(model, belief, policy).steps[0]
            assert step.g == pytest.approx(-(step.epistemic_value + step.utility), abs=1e-12)
            assert step.ambiguity + step.risk - log_z == pytest.approx(step.g, abs=1e-9)

    def test_constant_log_preference_shift_leaves_the_posterior_unchanged(self, rng):
        for _ in range(10):
            model = random_model(rng, c_normalize=False)
            shifted = GenerativeModel(
                state_space=model.state_space,
                obs_space=model.obs_space,
                action_space=model.action_space,
                A=list(model.A),
                B=list(model.B),
                C=PreferenceDistribution(
                    tuple(w + 1.7 for w in model.C.weights), normalize_before_log=False
                ),
                D=list(model.D),
                horizon=model.horizon,
            )
            obs = int(rng.integers(model.n_obs))
            belief = filter_step(model, initial_belief(model), None, obs)
            length = model.horizon - 1
            policies = [
                Policy(tuple(int(rng.integers(model.n_actions)) for _ in range(length)), 1)
                for _ in range(5)
            ]
            g0 = np.array([efe_epistemic_form(model, belief, p).total for p in policies])
            g1 = np.array([efe_epistemic_form(shifted, belief, p).total for p in policies])
            np.testing.assert_allclose(g1 - g0, g1[0] - g0[0], atol=1e-10)
            np.testing.assert_allclose(softmax(-g0), softmax(-g1), atol=1e-10)

    def test_total_is_the_sum_of_the_steps(self, rng):
        model = random_model(rng, horizon=4)
        obs = int(rng.integers(model.n_obs))
        belief = filter_step(model, initial_belief(model), None, obs)
        policy = Policy(tuple(int(rng.integers(model.n_actions)) for _ in range(3)), 1)
        breakdown = efe_epistemic_form(model, belief, policy)
        assert breakdown.total == pytest.approx(sum(s.g for s in breakdown.steps), abs=1e-12)
