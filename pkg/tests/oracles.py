"""Independent brute-force oracles the tests compare the package against.

Everything here recomputes quantities by exhaustive enumeration (or exact
quadrature) straight from the kernel definitions, deliberately avoiding the
package's vectorized code paths.
"""

from __future__ import annotations

from itertools import product

import numpy as np


def _likelihood(model, o_joint: int, s_joint: int) -> float:
    out = model.obs_space.unravel(o_joint)
    p = 1.0
    for m, a_m in enumerate(model.A):
        p *= a_m.reshape(a_m.shape[0], -1)[out[m], s_joint]
    return p


def _transition(model, s_next: int, s_prev: int, action: int) -> float:
    nxt = model.state_space.unravel(s_next)
    prv = model.state_space.unravel(s_prev)
    p = 1.0
    for f, b_f in enumerate(model.B):
        p *= b_f[nxt[f], prv[f], action]
    return p


def _prior(model, s_joint: int) -> float:
    multi = model.state_space.unravel(s_joint)
    p = 1.0
    for f, d_f in enumerate(model.D):
        p *= d_f[multi[f]]
    return p


def path_posterior(model, observations, actions, length):
    """Joint posterior over state paths s_{1:length} given the evidence.

    ``observations`` may be shorter than ``length`` (steps beyond the
    evidence carry likelihood one); ``actions`` must have length - 1 entries.
    Returns a dict path -> probability.
    """
    n_s = model.n_states
    weights = {}
    for path in product(range(n_s), repeat=length):
        w = _prior(model, path[0])
        if len(observations) >= 1:
            w *= _likelihood(model, observations[0], path[0])
        for tau in range(2, length + 1):
            w *= _transition(model, path[tau - 1], path[tau - 2], actions[tau - 2])
            if tau <= len(observations):
                w *= _likelihood(model, observations[tau - 1], path[tau - 1])
        if w > 0:
            weights[path] = w
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def brute_filter(model, observations, actions):
    """Filtering marginal q(s_t | o_{1:t}, a_{1:t-1}) by path enumeration."""
    t = len(observations)
    post = path_posterior(model, observations, actions, t)
    out = np.zeros(model.n_states)
    for path, w in post.items():
        out[path[-1]] += w
    return out


def brute_smooth(model, observations, actions, future_actions=()):
    """Singleton and pairwise smoothed marginals by path enumeration."""
    horizon = len(observations) + len(future_actions)
    post = path_posterior(model, observations, tuple(actions) + tuple(future_actions), horizon)
    n_s = model.n_states
    singles = [np.zeros(n_s) for _ in range(horizon)]
    pairs = [np.zeros((n_s, n_s)) for _ in range(horizon - 1)]
    for path, w in post.items():
        for tau in range(horizon):
            singles[tau][path[tau]] += w
        for tau in range(1, horizon):
            pairs[tau - 1][path[tau], path[tau - 1]] += w
    return singles, pairs


def brute_predict(model, belief, actions):
    """Predicted marginals after each action, starting from a joint belief."""
    n_s = model.n_states
    out = []
    current = np.asarray(belief, dtype=float)
    for k, a in enumerate(actions):
        nxt = np.zeros(n_s)
        for s_next in range(n_s):
            for s_prev in range(n_s):
                nxt[s_next] += _transition(model, s_next, s_prev, a) * current[s_prev]
        out.append(nxt)
        current = nxt
    return out


def sequence_efe(model, step_beliefs, log_pref_joint):
    """The sequence-form expected free energy by exhaustive summation.

    Uses the mean-field factorization: the sequence belief is the product of
    the per-step beliefs, and preferences factorize across steps. Sums run
    over every joint observation sequence and every joint state sequence.
    Returns (epistemic-form G, ambiguity-form G) where the ambiguity form
    divergences use the same (possibly unnormalized) log-preferences.
    """
    n_s, n_o = model.n_states, model.n_obs
    steps = len(step_beliefs)

    # per-step observation predictives and conditionals
    q_o = []
    cond = []  # cond[k][o] = q(s | o) at step k
    for q_s in step_beliefs:
        qo = np.zeros(n_o)
        c = np.zeros((n_o, n_s))
        for o in range(n_o):
            for s in range(n_s):
                c[o, s] = _likelihood(model, o, s) * q_s[s]
            qo[o] = c[o].sum()
            if qo[o] > 0:
                c[o] /= qo[o]
        q_o.append(qo)
        cond.append(c)

    g_epi = 0.0
    g_amb = 0.0

    # ambiguity term: expected entropy of the sequence likelihood
    for s_seq in product(range(n_s), repeat=steps):
        w = np.prod([step_beliefs[k][s_seq[k]] for k in range(steps)])
        if w == 0:
            continue
        h = 0.0
        for o_seq in product(range(n_o), repeat=steps):
            like = np.prod([_likelihood(model, o_seq[k], s_seq[k]) for k in range(steps)])
            if like > 0:
                h -= like * np.log(like)
        g_amb += w * h

    for o_seq in product(range(n_o), repeat=steps):
        p_seq = np.prod([q_o[k][o_seq[k]] for k in range(steps)])
        if p_seq == 0:
            continue
        # KL between the conditioned and unconditioned sequence beliefs
        kl = 0.0
        for s_seq in product(range(n_s), repeat=steps):
            post = np.prod([cond[k][o_seq[k], s_seq[k]] for k in range(steps)])
            if post == 0:
                continue
            prior = np.prod([step_beliefs[k][s_seq[k]] for k in range(steps)])
            kl += post * (np.log(post) - np.log(prior))
        ln_c = sum(log_pref_joint[o] for o in o_seq)
        g_epi += p_seq * (-(kl + ln_c))
        g_amb += p_seq * (np.log(p_seq) - ln_c)

    return g_epi, g_amb


def dirichlet_update_by_paths(alpha_shapes, model, observations, actions, step_marginals):
    """Dirichlet increments by enumerating state paths under the factorized posterior.

    ``step_marginals[tau]`` is the smoothed singleton marginal over the joint
    state at time tau+1; the sequence posterior is their product (mean-field
    over time steps). Returns (delta_a, delta_b, delta_d) matching the shapes
    in ``alpha_shapes`` = (modality sizes, factor sizes, action count).
    """
    msizes, sizes, n_actions = alpha_shapes
    horizon = len(observations)
    n_s = model.n_states
    delta_d = [np.zeros(s) for s in sizes]
    delta_a = [np.zeros((m, *sizes)) for m in msizes]
    delta_b = [np.zeros((s, s, n_actions)) for s in sizes]

    for path in product(range(n_s), repeat=horizon):
        w = 1.0
        for tau, s_joint in enumerate(path):
            w *= step_marginals[tau][s_joint]
        if w == 0:
            continue
        first = model.state_space.unravel(path[0])
        for f in range(len(sizes)):
            delta_d[f][first[f]] += w
        for tau in range(horizon):
            outcome = model.obs_space.unravel(observations[tau])
            multi = model.state_space.unravel(path[tau])
            for m in range(len(msizes)):
                delta_a[m][(outcome[m], *multi)] += w
        for tau in range(2, horizon + 1):
            cur = model.state_space.unravel(path[tau - 1])
            prev = model.state_space.unravel(path[tau - 2])
            a = actions[tau - 2]
            for f in range(len(sizes)):
                delta_b[f][cur[f], prev[f], a] += w

    return delta_a, delta_b, delta_d


def latent_posterior_moments_by_quadrature(alpha_prior, alpha_likelihood, x, nodes=24):
    """Exact posterior means for the 2-latent/2-outcome model via Gauss-Legendre.

    Parametrizes theta_D = (d, 1-d) and theta_A[:, j] = (a_j, 1-a_j); the
    integrand is polynomial for integer hyperparameters, so enough nodes make
    the quadrature exact to machine precision.
    """
    assert len(alpha_prior) == 2 and alpha_likelihood.shape == (2, 2)
    pts, wts = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (pts + 1.0)  # map to (0, 1)
    w = 0.5 * wts

    d = u[:, None, None]
    a0 = u[None, :, None]
    a1 = u[None, None, :]
    weight = (
        w[:, None, None] * w[None, :, None] * w[None, None, :]
    )

    def beta_density(v, a, b):
        return v ** (a - 1.0) * (1.0 - v) ** (b - 1.0)

    prior = (
        beta_density(d, alpha_prior[0], alpha_prior[1])
        * beta_density(a0, alpha_likelihood[0, 0], alpha_likelihood[1, 0])
        * beta_density(a1, alpha_likelihood[0, 1], alpha_likelihood[1, 1])
    )
    theta_a_x = (a0, 1.0 - a0)[x], (a1, 1.0 - a1)[x]
    evidence_term = theta_a_x[0] * d + theta_a_x[1] * (1.0 - d)
    post = prior * evidence_term

    z = np.sum(post * weight)
    mean_d = np.array([np.sum(post * weight * d) / z, np.sum(post * weight * (1.0 - d)) / z])
    mean_a = np.array(
        [
            [np.sum(post * weight * a0) / z, np.sum(post * weight * a1) / z],
            [np.sum(post * weight * (1.0 - a0)) / z, np.sum(post * weight * (1.0 - a1)) / z],
        ]
    )
    return mean_d, mean_a
