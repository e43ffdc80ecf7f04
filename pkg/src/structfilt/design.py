"""Adaptive experiment design.

Evolution times follow the particle-guess heuristic: two distinct
particles are drawn from the posterior by weight and the time is the
reciprocal of their distance (optionally squared), scaled by a constant.
Short distances, i.e. concentrated posteriors, thus produce long, more
informative evolutions. When the tree entertains several structural
hypotheses, the design is taken from the filter leaf with the smallest
root-to-leaf weight product, deliberately conditioning the experiment on
the least probable explanation of the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from structfilt.errors import DegenerateCloud
from structfilt.models import Experiment
from structfilt.smc import ParticleCloud, moments
from structfilt.tree import Node, iter_filter_leaves

__all__ = ["PghConfig", "select_design_node", "pgh", "design_experiment"]

_MAX_DISTINCT_DRAWS = 100


@dataclass(frozen=True)
class PghConfig:
    """Time-guess parameters: ``t = constant / distance**exponent``.

    ``t_max`` caps the time so a collapsed posterior cannot request an
    unbounded evolution.
    """

    constant: float = 1.0
    exponent: int = 1
    t_max: float = 1e8

    def __post_init__(self) -> None:
        if self.constant <= 0:
            raise ValueError("constant must be positive")
        if self.exponent not in (1, 2):
            raise ValueError("exponent must be 1 or 2")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")


def select_design_node(root: Node) -> Node:
    """Filter leaf with the minimal root-to-leaf edge-weight product.

    Ties go to the earlier leaf in depth-first order.
    """
    best: Node | None = None
    best_bf = np.inf

    def visit(node: Node, path_weight: float) -> None:
        nonlocal best, best_bf
        if node.is_filter:
            if path_weight < best_bf:
                best, best_bf = node, path_weight
            return
        for child, weight in zip(node.children, node.edge_weights):
            visit(child, path_weight * weight)

    visit(root, 1.0)
    if best is None:
        raise ValueError("tree has no filter leaves")
    return best


def pgh(
    cloud: ParticleCloud, cfg: PghConfig, rng: np.random.Generator
) -> Experiment:
    """Draw two distinct particles by weight and guess the next experiment.

    The inversion phase is the first coordinate of the second draw;
    models that have no phase ignore it.

    Raises:
        DegenerateCloud: if no distinct second particle was found within
            the draw cap. Callers should fall back to a spread-based
            guess (see :func:`design_experiment`).
    """
    x1 = cloud.particles[rng.choice(cloud.n_particles, p=cloud.weights)]
    for _ in range(_MAX_DISTINCT_DRAWS):
        x2 = cloud.particles[rng.choice(cloud.n_particles, p=cloud.weights)]
        if not np.array_equal(x1, x2):
            break
    else:
        raise DegenerateCloud("no distinct particle pair found")
    distance = float(np.linalg.norm(x1 - x2))
    t = min(cfg.constant / distance**cfg.exponent, cfg.t_max)
    return Experiment(t=t, theta=float(x2[0]))


def design_experiment(
    cloud: ParticleCloud, cfg: PghConfig, rng: np.random.Generator
) -> Experiment:
    """Particle-guess design with a fallback for collapsed clouds.

    When the cloud has effectively one support point, the time guess
    falls back to the posterior spread, ``t = constant / sqrt(trace of
    the covariance)``, with jitter keeping the trace nonzero; the phase
    falls back to the posterior mean. The returned time is always finite
    and positive.
    """
    try:
        return pgh(cloud, cfg, rng)
    except DegenerateCloud:
        m = moments(cloud)
        spread = np.sqrt(max(float(np.trace(m.covariance)), 1e-30))
        t = min(cfg.constant / spread, cfg.t_max)
        return Experiment(t=t, theta=float(m.mean[0]))
