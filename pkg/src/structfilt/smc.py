"""Weighted-particle primitives for sequential Monte Carlo.

A posterior is approximated by a :class:`ParticleCloud`: a set of
hypothesis vectors carrying normalized weights. Bayes updates reweight
the cloud in place of integration; the Liu-West resampler redraws the
support around the weighted mean so that the first two moments are
preserved while weight degeneracy is undone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from structfilt.errors import AllZeroLikelihood

__all__ = [
    "ParticleCloud",
    "Moments",
    "LiuWestConfig",
    "stable_sum",
    "ess",
    "moments",
    "bayes_update",
    "liu_west_resample",
]


def stable_sum(values: NDArray | list[float]) -> float:
    """Sum with an extended-precision accumulator.

    Weight normalizations run thousands of times per inference, so plain
    float64 accumulation would let round-off drift into the weights.
    """
    return float(np.sum(np.asarray(values), dtype=np.longdouble))


class ParticleCloud:
    """Weighted set of model-parameter vectors.

    Particles are stored as an ``(n, d)`` array, weights as an ``(n,)``
    array summing to one. Both arrays are owned by the cloud; callers
    must not mutate them afterwards.
    """

    __slots__ = ("particles", "weights")

    def __init__(
        self,
        particles: NDArray,
        weights: NDArray | None = None,
        normalize: bool = True,
    ) -> None:
        arr = np.asarray(particles, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("particles must be a nonempty (n, d) array")
        if weights is None:
            w = np.full(arr.shape[0], 1.0 / arr.shape[0])
        else:
            w = np.asarray(weights, dtype=float).copy()
        if w.shape != (arr.shape[0],):
            raise ValueError("weights must match the number of particles")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if normalize:
            total = stable_sum(w)
            if total <= 0:
                raise ValueError("weights must have positive total")
            w /= total
        self.particles = arr
        self.weights = w

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]

    @property
    def dimension(self) -> int:
        return self.particles.shape[1]

    def validate(self, tol: float = 1e-12) -> None:
        """Raise ``ValueError`` unless all cloud invariants hold."""
        if self.particles.ndim != 2 or self.particles.shape[0] < 1:
            raise ValueError("particles must be a nonempty (n, d) array")
        if self.weights.shape != (self.n_particles,):
            raise ValueError("weights length mismatch")
        if np.any(self.weights < 0):
            raise ValueError("negative weight")
        if abs(stable_sum(self.weights) - 1.0) > tol:
            raise ValueError("weights do not sum to 1")

    def copy(self) -> "ParticleCloud":
        return ParticleCloud(
            self.particles.copy(), self.weights.copy(), normalize=False
        )


@dataclass(frozen=True)
class Moments:
    """Weighted mean vector and covariance matrix of a cloud."""

    mean: NDArray
    covariance: NDArray


@dataclass(frozen=True)
class LiuWestConfig:
    """Shrinkage parameter of the Liu-West resampler.

    ``a = 1`` reproduces the bootstrap filter (pure redraw from the
    support), ``a = 0`` draws from a Gaussian with the cloud's moments.
    """

    a: float = 0.98

    def __post_init__(self) -> None:
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("shrinkage a must lie in [0, 1]")


def ess(cloud: ParticleCloud) -> float:
    """Effective sample size 1 / sum(w_i^2); in [1, n]."""
    return 1.0 / stable_sum(cloud.weights**2)


def moments(cloud: ParticleCloud) -> Moments:
    """Weighted mean and covariance of the cloud."""
    w = cloud.weights
    mean = w @ cloud.particles
    centered = cloud.particles - mean
    cov = np.einsum("n,ni,nj->ij", w, centered, centered)
    cov = 0.5 * (cov + cov.T)
    return Moments(mean=mean, covariance=cov)


def bayes_update(
    cloud: ParticleCloud, likelihoods: NDArray | list[float]
) -> tuple[ParticleCloud, float]:
    """Reweight by per-particle likelihoods.

    Returns the updated cloud and the normalizer ``Z = sum w_j L_j``,
    which callers propagate up the belief tree as the node's total
    likelihood for the datum.

    Raises:
        AllZeroLikelihood: if ``Z = 0``, i.e. the datum is inconsistent
            with every particle. The caller decides how to react.
    """
    lik = np.asarray(likelihoods, dtype=float)
    if lik.shape != (cloud.n_particles,):
        raise ValueError("likelihoods must match the number of particles")
    if np.any(lik < 0):
        raise ValueError("likelihoods must be nonnegative")
    raw = cloud.weights * lik
    z = stable_sum(raw)
    if z <= 0.0:
        raise AllZeroLikelihood("all particles assign zero likelihood")
    return ParticleCloud(cloud.particles, raw, normalize=True), z


def _covariance_factor(cov: NDArray) -> NDArray:
    """Lower-triangular factor ``A`` with ``A @ A.T ~= cov``.

    Clouds concentrate to near-points late in inference, so the
    covariance is routinely singular. Jitter proportional to the trace
    (absolute 1e-15 when the trace is zero) is added and escalated until
    the factorization succeeds; an eigenvalue-clipping fallback covers
    pathological inputs.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    dim = cov.shape[0]
    trace = float(np.trace(cov))
    eps = 1e-12 * trace / dim if trace > 0 else 1e-15
    for _ in range(12):
        try:
            return np.linalg.cholesky(cov + eps * np.eye(dim))
        except np.linalg.LinAlgError:
            eps *= 10.0
    evals, evecs = np.linalg.eigh(cov)
    evals = np.clip(evals, eps, None)
    return evecs * np.sqrt(evals)


def liu_west_resample(
    cloud: ParticleCloud,
    cfg: LiuWestConfig,
    n_out: int,
    rng: np.random.Generator,
) -> ParticleCloud:
    """Moment-preserving redraw of the cloud.

    Each output particle selects an ancestor ``x_j`` with probability
    ``w_j``, shrinks it towards the weighted mean, ``a x_j + (1 - a) mu``,
    and adds Gaussian noise with covariance ``(1 - a^2) Sigma``. Output
    weights are uniform, so the effective sample size resets to
    ``n_out`` while mean and covariance are preserved in expectation.
    """
    if n_out < 1:
        raise ValueError("n_out must be at least 1")
    idx = rng.choice(cloud.n_particles, size=n_out, p=cloud.weights)
    picked = cloud.particles[idx]
    if cfg.a == 1.0:
        out = picked.copy()
    else:
        m = moments(cloud)
        centers = cfg.a * picked + (1.0 - cfg.a) * m.mean
        factor = _covariance_factor(m.covariance)
        scale = np.sqrt(1.0 - cfg.a**2)
        noise = rng.standard_normal((n_out, cloud.dimension)) @ (scale * factor).T
        out = centers + noise
    return ParticleCloud(out, np.full(n_out, 1.0 / n_out))
