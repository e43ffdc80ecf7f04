"""Shared builders and oracles for the test suite."""

from __future__ import annotations

import numpy as np

from structfilt.smc import ParticleCloud
from structfilt.tree import Context, Node, NodeKind, _refresh_depths


def full_context(**overrides) -> Context:
    base = dict(
        prune=True,
        mixture_floor=0.0,
        decision_floor=0.1,
        champion_threshold=2000.0,
        region_champions=1,
    )
    base.update(overrides)
    return Context(**base)


def random_cloud(rng: np.random.Generator, dim: int = 1, max_particles: int = 50) -> ParticleCloud:
    n = int(rng.integers(1, max_particles + 1))
    particles = rng.uniform(-1.0, 1.0, (n, dim))
    weights = rng.dirichlet(np.ones(n))
    return ParticleCloud(particles, weights)


def random_tree(
    rng: np.random.Generator,
    dim: int = 1,
    max_depth: int = 4,
    max_leaves: int = 6,
    max_particles: int = 50,
    chain_probability: float = 0.3,
) -> Node:
    """Random valid tree grown by repeatedly splitting filter leaves.

    With ``chain_probability`` an internal node is occasionally wrapped
    in a redundant single-child intermediate, exercising the only-child
    and single-child pruning preconditions.
    """
    root = Node(NodeKind.DECISION, context=full_context())
    root.add_child(Node(NodeKind.FILTER), 1.0)
    n_leaves = 1
    for _ in range(int(rng.integers(0, 6))):
        leaves = [
            node
            for node in _walk(root)
            if node.is_filter and node.depth <= max_depth - 2
        ]
        if not leaves or n_leaves >= max_leaves:
            break
        leaf = leaves[int(rng.integers(len(leaves)))]
        k = int(rng.integers(2, min(4, max_leaves - n_leaves + 2)))
        kind = NodeKind.MIXTURE if rng.random() < 0.5 else NodeKind.DECISION
        inner = Node(kind)
        for weight in rng.dirichlet(np.ones(k)):
            inner.add_child(Node(NodeKind.FILTER), float(weight))
        if (
            rng.random() < chain_probability
            and leaf.depth <= max_depth - 3
        ):
            wrapper = Node(
                NodeKind.MIXTURE if rng.random() < 0.5 else NodeKind.DECISION
            )
            wrapper.add_child(inner, 1.0)
            inner = wrapper
        parent = leaf.parent
        i = parent.children.index(leaf)
        parent.children[i] = inner
        inner.parent = parent
        n_leaves += k - 1
    _refresh_depths(root)
    for node in _walk(root):
        if node.is_filter:
            node.cloud = random_cloud(rng, dim=dim, max_particles=max_particles)
    return root


def _walk(node: Node):
    yield node
    for child in node.children:
        yield from _walk(child)


def identity_resampler(cloud: ParticleCloud, n_out: int, rng) -> ParticleCloud:
    """No-op local resampler for split-without-resample checks."""
    return cloud


def cloud_as_value_map(cloud: ParticleCloud) -> dict[tuple, float]:
    """Aggregate weights by particle value, for order-insensitive compares."""
    out: dict[tuple, float] = {}
    for row, weight in zip(cloud.particles, cloud.weights):
        key = tuple(row)
        out[key] = out.get(key, 0.0) + weight
    return out


def max_value_map_discrepancy(a: dict[tuple, float], b: dict[tuple, float]) -> float:
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)
