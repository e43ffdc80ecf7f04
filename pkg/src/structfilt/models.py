"""Experiment models: likelihoods, outcome simulators, and loss functions.

Three two-outcome (or small finite outcome) experiment families are
provided behind one interface:

* ``RabiModel``: single-frequency precession, P(0) = cos^2(w t / 2).
* ``RgeModel``: randomized gap estimation. The survival probability
  averages cos^2 over every eigenvalue gap, so the likelihood depends on
  the spectrum only through its gaps and the posterior is exactly
  degenerate under the induced symmetries.
* ``CfpeModel``: collapse-free phase estimation. Data is generated by a
  superposition of eigenvalues, while the inference model tracks a
  single eigenvalue hedged toward the uniform distribution to temper
  overconfident updates under the mismatch.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.typing import NDArray

from structfilt.errors import AmplitudesNotNormalized
from structfilt.smc import ParticleCloud, stable_sum

__all__ = [
    "Experiment",
    "ExperimentModel",
    "RabiModel",
    "RgeModel",
    "CfpeModel",
    "rabi_likelihood",
    "rge_single_shot_probability",
    "rge_batch_likelihood",
    "cfpe_model_likelihood",
    "cfpe_true_probability",
    "canonicalize",
    "canonical_loss",
    "min_loss",
    "make_model",
]


@dataclass(frozen=True)
class Experiment:
    """Controls of one experiment: evolution time and inversion phase.

    ``theta`` is only meaningful for phase-estimation experiments; other
    models ignore it.
    """

    t: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.t) or self.t <= 0:
            raise ValueError("evolution time t must be finite and positive")


def rabi_likelihood(outcome: int, omega: float, t: float) -> float:
    """P(outcome | omega; t) for a single two-outcome precession shot."""
    c2 = np.cos(omega * t / 2.0) ** 2
    return float(c2 if outcome == 0 else 1.0 - c2)


def _rge_pair_indices(n_levels: int) -> tuple[NDArray, NDArray]:
    i_idx, j_idx = np.triu_indices(n_levels, k=1)
    return i_idx, j_idx


def rge_single_shot_probability(lambdas: NDArray, t: float) -> float:
    """Survival probability for one randomized-state shot.

    The eigenvalue set is ``{0, lambda_1, ..., lambda_k}`` with the ground
    value pinned to zero; the probability averages ``cos^2(gap * t / 2)``
    over all unordered pairs, so it is 1 at ``t = 0`` and depends only on
    the gaps.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    full = np.concatenate(([0.0], lam))
    i_idx, j_idx = _rge_pair_indices(full.size)
    gaps = full[i_idx] - full[j_idx]
    return float(np.mean(np.cos(gaps * t / 2.0) ** 2))


def rge_batch_likelihood(
    zero_count: int, lambdas: NDArray, t: float, n_meas: int
) -> float:
    """Binomial mass of seeing ``zero_count`` survivals in ``n_meas`` shots."""
    if not 0 <= zero_count <= n_meas:
        raise ValueError("zero_count must lie in {0..n_meas}")
    p = rge_single_shot_probability(lambdas, t)
    return float(
        comb(n_meas, zero_count)
        * p**zero_count
        * (1.0 - p) ** (n_meas - zero_count)
    )


def cfpe_model_likelihood(
    outcome: int,
    energy: float,
    t: float,
    theta: float,
    h: float,
    hedge_to_half: bool = True,
) -> float:
    """Hedged single-eigenvalue likelihood for phase estimation.

    With ``hedge_to_half`` the cos^2 model is mixed with the uniform
    distribution, ``(1 - h) cos^2 + h / 2``, so ``h = 1`` is maximally
    uninformative. Setting it false uses the additive-offset variant
    ``(1 - h) cos^2 + h`` instead, which biases toward outcome 0.
    """
    offset = h / 2.0 if hedge_to_half else h
    p0 = (1.0 - h) * np.cos((energy - theta) * t / 2.0) ** 2 + offset
    return float(p0 if outcome == 0 else 1.0 - p0)


def cfpe_true_probability(
    energies: NDArray, amplitudes: NDArray, t: float, theta: float
) -> float:
    """P(0) for a superposition of eigenvalues, sum |a_j|^2 cos^2 terms."""
    e = np.asarray(energies, dtype=float)
    a = np.asarray(amplitudes)
    a2 = np.abs(a) ** 2
    if abs(a2.sum() - 1.0) > 1e-10:
        raise AmplitudesNotNormalized("sum |a_j|^2 must equal 1")
    return float(np.sum(a2 * np.cos((e - theta) * t / 2.0) ** 2))


def _canonicalize_rows(lam: NDArray) -> NDArray:
    """Map each (l1, l2) row to its degeneracy-class representative."""
    hi = np.max(lam, axis=1)
    m = np.min(lam, axis=1)
    lo = np.minimum(m, hi - m)
    return np.column_stack([hi, lo])


def canonicalize(lambda_1: float, lambda_2: float) -> tuple[float, float]:
    """Unique representative of a two-eigenvalue degeneracy class.

    Gap data cannot distinguish ``(l1, l2)`` from its swap or from the
    pair built on the complementary gap ``hi - lo``; all four collapse to
    ``(hi, min(lo, hi - lo))``. Idempotent.
    """
    row = _canonicalize_rows(np.array([[lambda_1, lambda_2]], dtype=float))[0]
    return float(row[0]), float(row[1])


def canonical_loss(cloud: ParticleCloud, true_lambdas: NDArray) -> float:
    """Weighted quadratic loss after canonicalizing particles and truth."""
    if cloud.dimension != 2:
        raise ValueError("canonical loss is defined for two eigenvalues")
    canon = _canonicalize_rows(cloud.particles)
    target = _canonicalize_rows(
        np.asarray(true_lambdas, dtype=float).reshape(1, 2)
    )[0]
    sq = np.einsum("nd,nd->n", canon - target, canon - target)
    return float(stable_sum(cloud.weights * sq))


def min_loss(cloud: ParticleCloud, candidates: NDArray) -> float:
    """Smallest weighted quadratic loss over candidate true values (1D)."""
    if cloud.dimension != 1:
        raise ValueError("min loss is defined for one-dimensional clouds")
    x = cloud.particles[:, 0]
    losses = [
        stable_sum(cloud.weights * (float(e) - x) ** 2)
        for e in np.atleast_1d(np.asarray(candidates, dtype=float))
    ]
    return float(min(losses))


class ExperimentModel(abc.ABC):
    """Likelihood, simulator, and benchmark plumbing for one experiment type.

    ``likelihood_array`` is the hot path: evaluated on every particle of
    every filter leaf per update. Outcomes are small nonnegative integers
    in ``outcome_space``, and the likelihood sums to 1 over it.
    """

    parameter_dimension: int
    outcome_space: range

    @abc.abstractmethod
    def likelihood_array(
        self, outcome: int, particles: NDArray, experiment: Experiment
    ) -> NDArray:
        """Per-particle likelihood of ``outcome``, shape (n,)."""

    def likelihood(
        self, outcome: int, particle: NDArray, experiment: Experiment
    ) -> float:
        arr = np.asarray(particle, dtype=float).reshape(1, -1)
        return float(self.likelihood_array(outcome, arr, experiment)[0])

    @abc.abstractmethod
    def simulate(
        self, truth: NDArray, experiment: Experiment, rng: np.random.Generator
    ) -> int:
        """Draw one outcome under the true parameters."""

    @abc.abstractmethod
    def sample_prior(self, rng: np.random.Generator, n: int) -> NDArray:
        """Draw n particles from the prior, shape (n, parameter_dimension)."""

    @abc.abstractmethod
    def sample_truth(self, rng: np.random.Generator) -> NDArray:
        """Draw a ground-truth parameter set for benchmark trials."""

    @abc.abstractmethod
    def loss(self, cloud: ParticleCloud, truth: NDArray) -> float:
        """Benchmark loss of a flattened posterior against the truth."""


class RabiModel(ExperimentModel):
    """Single-frequency precession with a uniform prior on omega."""

    parameter_dimension = 1
    outcome_space = range(2)

    def __init__(self, omega_range: tuple[float, float] = (-1.0, 1.0)) -> None:
        self.omega_range = omega_range

    def likelihood_array(
        self, outcome: int, particles: NDArray, experiment: Experiment
    ) -> NDArray:
        c2 = np.cos(particles[:, 0] * experiment.t / 2.0) ** 2
        return c2 if outcome == 0 else 1.0 - c2

    def simulate(
        self, truth: NDArray, experiment: Experiment, rng: np.random.Generator
    ) -> int:
        p0 = rabi_likelihood(0, float(np.asarray(truth).ravel()[0]), experiment.t)
        return 0 if rng.random() < p0 else 1

    def sample_prior(self, rng: np.random.Generator, n: int) -> NDArray:
        lo, hi = self.omega_range
        return rng.uniform(lo, hi, size=(n, 1))

    def sample_truth(self, rng: np.random.Generator) -> NDArray:
        lo, hi = self.omega_range
        return np.array([rng.uniform(lo, hi)])

    def loss(self, cloud: ParticleCloud, truth: NDArray) -> float:
        # The likelihood cannot tell +omega from -omega, so score against
        # the better of the two.
        w = float(np.asarray(truth).ravel()[0])
        return min_loss(cloud, np.array([w, -w]))


class RgeModel(ExperimentModel):
    """Randomized gap estimation with batched two-outcome measurements.

    Particles hold the nonzero eigenvalues ``(l_1, ..., l_k)``; the
    ground eigenvalue is pinned to zero. Each experiment performs
    ``n_meas`` shots and reports the number of survivals, distributed
    binomially around the single-shot probability.
    """

    def __init__(self, n_levels: int = 3, n_meas: int = 3) -> None:
        if n_levels < 2:
            raise ValueError("n_levels must be at least 2")
        if n_meas < 1:
            raise ValueError("n_meas must be at least 1")
        self.n_levels = n_levels
        self.n_meas = n_meas
        self.parameter_dimension = n_levels - 1
        self.outcome_space = range(n_meas + 1)
        self._pair_idx = _rge_pair_indices(n_levels)

    def _survival(self, particles: NDArray, t: float) -> NDArray:
        n = particles.shape[0]
        full = np.concatenate([np.zeros((n, 1)), particles], axis=1)
        i_idx, j_idx = self._pair_idx
        gaps = full[:, i_idx] - full[:, j_idx]
        p = np.mean(np.cos(gaps * t / 2.0) ** 2, axis=1)
        return np.clip(p, 0.0, 1.0)

    def likelihood_array(
        self, outcome: int, particles: NDArray, experiment: Experiment
    ) -> NDArray:
        p = self._survival(particles, experiment.t)
        k = self.n_meas
        return comb(k, outcome) * p**outcome * (1.0 - p) ** (k - outcome)

    def simulate(
        self, truth: NDArray, experiment: Experiment, rng: np.random.Generator
    ) -> int:
        p = rge_single_shot_probability(truth, experiment.t)
        return int(rng.binomial(self.n_meas, p))

    def sample_prior(self, rng: np.random.Generator, n: int) -> NDArray:
        return rng.uniform(0.0, 1.0, size=(n, self.parameter_dimension))

    def sample_truth(self, rng: np.random.Generator) -> NDArray:
        return rng.uniform(0.0, 1.0, size=self.parameter_dimension)

    def loss(self, cloud: ParticleCloud, truth: NDArray) -> float:
        return canonical_loss(cloud, truth)


class CfpeModel(ExperimentModel):
    """Collapse-free phase estimation with a hedged one-eigenvalue model.

    The simulator draws data from a fixed superposition (``amplitudes``
    over the true eigenvalues); inference tracks a single eigenvalue and
    hedges its likelihood by ``h``.
    """

    parameter_dimension = 1
    outcome_space = range(2)

    def __init__(
        self,
        h: float = 0.5,
        hedge_to_half: bool = True,
        amplitudes: tuple[float, ...] = (2.0**-0.5, 2.0**-0.5),
    ) -> None:
        if not 0.0 <= h <= 1.0:
            raise ValueError("hedging h must lie in [0, 1]")
        self.h = h
        self.hedge_to_half = hedge_to_half
        self.amplitudes = np.asarray(amplitudes, dtype=float)

    def likelihood_array(
        self, outcome: int, particles: NDArray, experiment: Experiment
    ) -> NDArray:
        offset = self.h / 2.0 if self.hedge_to_half else self.h
        arg = (particles[:, 0] - experiment.theta) * experiment.t / 2.0
        p0 = (1.0 - self.h) * np.cos(arg) ** 2 + offset
        return p0 if outcome == 0 else 1.0 - p0

    def simulate(
        self, truth: NDArray, experiment: Experiment, rng: np.random.Generator
    ) -> int:
        p0 = cfpe_true_probability(
            truth, self.amplitudes, experiment.t, experiment.theta
        )
        return 0 if rng.random() < p0 else 1

    def sample_prior(self, rng: np.random.Generator, n: int) -> NDArray:
        return rng.uniform(0.0, 1.0, size=(n, 1))

    def sample_truth(self, rng: np.random.Generator) -> NDArray:
        return rng.uniform(0.0, 1.0, size=self.amplitudes.size)

    def loss(self, cloud: ParticleCloud, truth: NDArray) -> float:
        return min_loss(cloud, np.asarray(truth, dtype=float))


def make_model(name: str, **kwargs) -> ExperimentModel:
    """Instantiate a model by its short name (rabi, rge, cfpe)."""
    registry = {"rabi": RabiModel, "rge": RgeModel, "cfpe": CfpeModel}
    if name not in registry:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(registry)}")
    return registry[name](**kwargs)
