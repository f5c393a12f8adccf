"""Variational free energy machinery on a small categorical latent model.

This module is the verification layer behind the learning rules: it provides
the free energy functional F and its ELBO decomposition, the closed-form
softmax minimizer, coordinate-ascent variational inference (CAVI) for the
Dirichlet-categorical model with one latent variable, and the exact
(mixture-of-Dirichlets) posterior-moment oracle that CAVI approximates.

The latent model is

    p(z = j)            = theta_D[j]
    p(x = i | z = j)    = theta_A[i, j]

with independent Dirichlet priors on theta_D and on each column of theta_A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln

from .errors import CombinatorialLimitError
from .numerics import floored_log, normalize, softmax

ORACLE_SIZE_CAP = 6


@dataclass(frozen=True)
class CategoricalLatentModel:
    """Point kernels plus Dirichlet hyperparameters for the one-latent model."""

    prior: np.ndarray            # theta_D, shape (m,)
    likelihood: np.ndarray       # theta_A, shape (n, m); columns normalized
    alpha_prior: np.ndarray      # shape (m,)
    alpha_likelihood: np.ndarray  # shape (n, m)

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float)
        lik = np.asarray(self.likelihood, dtype=float)
        a_d = np.asarray(self.alpha_prior, dtype=float)
        a_a = np.asarray(self.alpha_likelihood, dtype=float)
        if lik.ndim != 2 or prior.ndim != 1 or lik.shape[1] != prior.shape[0]:
            raise ValueError("likelihood must be (n, m) with prior of length m")
        if a_d.shape != prior.shape or a_a.shape != lik.shape:
            raise ValueError("hyperparameter shapes must mirror the kernels")
        if np.any(a_d <= 0) or np.any(a_a <= 0):
            raise ValueError("Dirichlet hyperparameters must be strictly positive")
        for arr in (prior, lik, a_d, a_a):
            arr.flags.writeable = False
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "likelihood", lik)
        object.__setattr__(self, "alpha_prior", a_d)
        object.__setattr__(self, "alpha_likelihood", a_a)

    @property
    def n_latent(self) -> int:
        return self.prior.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.likelihood.shape[0]

    def joint(self, x: int) -> np.ndarray:
        """p(x, z) over z for a fixed outcome, using the point kernels."""
        return self.likelihood[int(x), :] * self.prior

    def evidence(self, x: int) -> float:
        return float(self.joint(x).sum())

    def posterior(self, x: int) -> np.ndarray:
        return normalize(self.joint(x))


@dataclass(frozen=True)
class VfeValue:
    """F in nats with its ELBO decomposition F = KL(q || p(z|x)) - ln p(x)."""

    total: float
    kl_to_posterior: float
    neg_log_evidence: float


def vfe(q: np.ndarray, model: CategoricalLatentModel, x: int) -> VfeValue:
    """F(q | x) = sum_z q(z) (ln q(z) - ln p(x, z)), with floored logs."""
    q = np.asarray(q, dtype=float)
    joint = model.joint(x)
    total = float(np.sum(q * (floored_log(q) - floored_log(joint))))
    post = model.posterior(x)
    kl = float(np.sum(q * (floored_log(q) - floored_log(post))))
    return VfeValue(total=total, kl_to_posterior=kl, neg_log_evidence=-float(np.log(model.evidence(x))))


def exact_minimizer(f_values: np.ndarray) -> np.ndarray:
    """Minimizer of the generalized free energy F_f: the softmax of f.

    When f = ln p(x, .), this is exactly the Bayes posterior p(. | x).
    """
    return softmax(f_values)


@dataclass(frozen=True)
class CaviResult:
    q_z: np.ndarray
    alpha_prior: np.ndarray
    alpha_likelihood: np.ndarray
    f_trace: tuple[float, ...]


def _dirichlet_kl(a: np.ndarray, b: np.ndarray) -> float:
    """KL( Dir(a) || Dir(b) ) in nats."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, b0 = a.sum(), b.sum()
    return float(
        gammaln(a0)
        - gammaln(a).sum()
        - gammaln(b0)
        + gammaln(b).sum()
        + np.sum((a - b) * (digamma(a) - digamma(a0)))
    )


def _cavi_free_energy(
    model: CategoricalLatentModel, x: int, q_z: np.ndarray, a_d: np.ndarray, a_a: np.ndarray
) -> float:
    """F of the mean-field pair (q(z), q(theta) = Dir(a_d) x Dir(a_a columns)).

    F = E[ln q(z)] + KL(q(theta) || p(theta | alpha))
        - E_{q(z) q(theta)}[ln p(x | z, theta_A) + ln p(z | theta_D)].
    """
    e_ln_d = digamma(a_d) - digamma(a_d.sum())
    e_ln_a = digamma(a_a) - digamma(a_a.sum(axis=0))[None, :]
    entropy_term = float(np.sum(q_z * floored_log(q_z)))
    cross = float(np.sum(q_z * (e_ln_a[int(x), :] + e_ln_d)))
    kl_theta = _dirichlet_kl(a_d, model.alpha_prior) + sum(
        _dirichlet_kl(a_a[:, j], model.alpha_likelihood[:, j]) for j in range(model.n_latent)
    )
    return entropy_term - cross + kl_theta


def cavi(model: CategoricalLatentModel, x: int, sweeps: int) -> CaviResult:
    """Coordinate-ascent variational inference on (q(z), q(theta)).

    q(theta) starts at the prior. Each sweep first sets
    q(z) proportional to exp(E_{q(theta)}[ln p(z | x, theta)]) (Dirichlet
    expected logs, i.e. digamma differences), then refreshes q(theta) to the
    Dirichlet with alpha' = alpha + the q(z)-weighted counts. F is recorded
    after every half-sweep, so the trace length is 2 * sweeps.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    x = int(x)
    a_d = model.alpha_prior.copy()
    a_a = model.alpha_likelihood.copy()
    q_z = normalize(np.ones(model.n_latent))
    trace: list[float] = []
    for _ in range(sweeps):
        # latent update under the current q(theta)
        log_q = (digamma(a_a[x, :]) - digamma(a_a.sum(axis=0))) + (digamma(a_d) - digamma(a_d.sum()))
        q_z = softmax(log_q)
        trace.append(_cavi_free_energy(model, x, q_z, a_d, a_a))
        # Dirichlet update, always relative to the prior hyperparameters
        a_d = model.alpha_prior + q_z
        a_a = model.alpha_likelihood.copy()
        a_a[x, :] += q_z
        trace.append(_cavi_free_energy(model, x, q_z, a_d, a_a))
    return CaviResult(q_z=q_z, alpha_prior=a_d, alpha_likelihood=a_a, f_trace=tuple(trace))


def exact_theta_posterior_moments(
    model: CategoricalLatentModel, x: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact posterior means of theta_D and theta_A after observing x.

    The exact parameter posterior is a mixture over the latent value j: each
    component is the conjugate update "z = j observed, x emitted from column
    j", weighted by the prior-mean probability that j produced x:

        w_j  proportional to  E[theta_A[x, j]] * E[theta_D[j]].

    Means follow from Dirichlet moment identities; no numeric integration.
    Only intended at oracle scale (n, m <= 6).
    """
    if model.n_latent > ORACLE_SIZE_CAP or model.n_outcomes > ORACLE_SIZE_CAP:
        raise CombinatorialLimitError(
            f"exact posterior oracle capped at {ORACLE_SIZE_CAP} states/outcomes"
        )
    x = int(x)
    a_d = model.alpha_prior
    a_a = model.alpha_likelihood
    w = (a_a[x, :] / a_a.sum(axis=0)) * (a_d / a_d.sum())
    w = normalize(w)

    m = model.n_latent
    mean_d = np.zeros(m)
    mean_a = np.zeros_like(a_a)
    for j in range(m):
        d_j = a_d.copy()
        d_j[j] += 1.0
        mean_d += w[j] * (d_j / d_j.sum())
        comp = a_a / a_a.sum(axis=0)
        col = a_a[:, j].copy()
        col[x] += 1.0
        comp = comp.copy()
        comp[:, j] = col / col.sum()
        mean_a += w[j] * comp
    return mean_d, mean_a
