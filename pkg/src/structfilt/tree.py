"""The belief-state tree: taxonomy, updates, restructuring, and regions.

The posterior is represented by a rooted tree. Filter leaves hold
particle clouds assumed to be roughly unimodal. Mixture nodes combine
their subtrees as components of one distribution. Decision nodes weigh
their subtrees as competing hypotheses about the posterior's structure;
the root is always a decision node. Edge weights on each internal node
sum to one, and the weight of a particle in the overall posterior is its
local weight times the product of edge weights on its root-to-leaf path.

Restructuring happens through five moves: the champion rule collapses a
node onto an overwhelmingly favored child, floor rules drop children
below a minimum edge weight, only-child and single-child rules remove
redundant intermediate nodes without changing the represented
distribution, and the splitting move replaces a filter leaf by a
decision over candidate clusterings of its cloud.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields, replace
from math import fsum
from typing import Callable, Iterator

import numpy as np
from numpy.typing import NDArray
from scipy.stats import chi2

from structfilt.clustering import Clustering, weighted_kmeans
from structfilt.errors import (
    AllZeroLikelihood,
    TreeInvariantViolation,
    UnsetContextField,
)
from structfilt.smc import (
    LiuWestConfig,
    ParticleCloud,
    ess,
    liu_west_resample,
    moments,
    stable_sum,
)

__all__ = [
    "NodeKind",
    "Node",
    "Context",
    "GlobalConfig",
    "RegionEstimate",
    "init_tree",
    "resolve_context",
    "update",
    "flatten",
    "node_bayes_factor",
    "iter_filter_leaves",
    "champion_leaf_count",
    "prune",
    "structured_resample",
    "region_estimate",
    "audit_tree",
    "tree_snapshot",
    "snapshot_to_dot",
    "to_dot",
]

Resampler = Callable[[ParticleCloud, int, np.random.Generator], ParticleCloud]
Clusterer = Callable[[NDArray, NDArray, int, np.random.Generator], Clustering]


class NodeKind(enum.Enum):
    FILTER = "filter"
    MIXTURE = "mixture"
    DECISION = "decision"


@dataclass
class Context:
    """Per-node restructuring parameters; unset fields inherit from ancestors.

    ``prune`` gates all pruning rules in a subtree. The floors set the
    minimum surviving edge weight per node kind. ``champion_threshold``
    is the weight-odds ratio beyond which a child is declared the sole
    champion. ``region_champions`` bounds how many children of a
    decision node contribute to region estimates.
    """

    prune: bool | None = None
    mixture_floor: float | None = None
    decision_floor: float | None = None
    champion_threshold: float | None = None
    region_champions: int | None = None

    def __post_init__(self) -> None:
        for name in ("mixture_floor", "decision_floor"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.champion_threshold is not None and self.champion_threshold <= 1.0:
            raise ValueError("champion_threshold must exceed 1")
        if self.region_champions is not None and self.region_champions < 1:
            raise ValueError("region_champions must be at least 1")

    def set_fields(self) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if getattr(self, f.name) is not None
        }


@dataclass(frozen=True)
class GlobalConfig:
    """Tree-wide limits and resampling parameters."""

    n_particles: int
    n_min_particles: int
    d_max: int
    n_cluster_set: tuple[int, ...] = (1, 2)
    resample_threshold: float = 0.5
    liu_west: LiuWestConfig = field(default_factory=LiuWestConfig)

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("n_particles must be at least 1")
        if not 0 <= self.n_min_particles <= self.n_particles:
            raise ValueError("n_min_particles must lie in [0, n_particles]")
        if self.d_max < 1:
            raise ValueError("d_max must be at least 1")
        if not self.n_cluster_set or any(k < 1 for k in self.n_cluster_set):
            raise ValueError("cluster counts must be positive")
        if not 0.0 <= self.resample_threshold <= 1.0:
            raise ValueError("resample_threshold must lie in [0, 1]")


@dataclass(eq=False)
class Node:
    """One vertex of the belief tree.

    Filter nodes are leaves and own a cloud; mixture and decision nodes
    own children with parallel outgoing edge weights.
    """

    kind: NodeKind
    cloud: ParticleCloud | None = None
    children: list["Node"] = field(default_factory=list)
    edge_weights: list[float] = field(default_factory=list)
    context: Context = field(default_factory=Context)
    parent: "Node | None" = field(default=None, repr=False)
    depth: int = 0

    @property
    def is_filter(self) -> bool:
        return self.kind is NodeKind.FILTER

    def add_child(self, child: "Node", weight: float) -> None:
        self.children.append(child)
        self.edge_weights.append(float(weight))
        child.parent = self
        child.depth = self.depth + 1


def _pre_order(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def _attached(node: Node, root: Node) -> bool:
    cur = node
    while cur.parent is not None:
        cur = cur.parent
    return cur is root


def _refresh_depths(root: Node, base: int = 0) -> None:
    root.depth = base
    stack = [root]
    while stack:
        cur = stack.pop()
        for child in cur.children:
            child.depth = cur.depth + 1
            stack.append(child)


def iter_filter_leaves(root: Node) -> Iterator[Node]:
    """Filter leaves in depth-first (left-to-right) order."""
    for node in _pre_order(root):
        if node.is_filter:
            yield node


def init_tree(
    prior_sampler: Callable[[np.random.Generator, int], NDArray],
    cfg: GlobalConfig,
    root_context: Context,
    rng: np.random.Generator,
) -> Node:
    """Decision root over a single filter leaf drawn from the prior."""
    particles = prior_sampler(rng, cfg.n_particles)
    leaf = Node(NodeKind.FILTER, cloud=ParticleCloud(particles))
    root = Node(NodeKind.DECISION, context=root_context)
    root.add_child(leaf, 1.0)
    return root


def resolve_context(node: Node, field_name: str):
    """Nearest explicit value of a context field on the root-to-node path.

    Raises:
        UnsetContextField: if no node on the path sets the field.
    """
    cur: Node | None = node
    while cur is not None:
        value = getattr(cur.context, field_name)
        if value is not None:
            return value
        cur = cur.parent
    raise UnsetContextField(field_name)


def _merge_context_into(removed: Context, child: Node) -> None:
    # A removed intermediate node may carry explicit context its subtree
    # inherited; fold it into the promoted child so resolution is unchanged.
    for name, value in removed.set_fields().items():
        if getattr(child.context, name) is None:
            child.context = replace(child.context, **{name: value})


def update(root: Node, outcome: int, experiment, model) -> Node:
    """Absorb one datum by post-order traversal.

    Each filter leaf is reweighted by the model likelihood and reports
    its normalizer; each internal node multiplies its outgoing edges by
    the children's normalizers, reports their sum upward, and
    renormalizes. A subtree whose normalizer is zero keeps its internal
    state and has its incoming edge set to zero, leaving it to the floor
    and champion rules. Nothing is committed unless the datum is
    consistent with at least one leaf.

    Raises:
        AllZeroLikelihood: if every leaf assigns the datum zero
            likelihood; the tree is left untouched.
    """
    leaf_plan: list[tuple[Node, NDArray | None]] = []
    edge_plan: list[tuple[Node, list[float] | None]] = []

    def visit(node: Node) -> float:
        if node.is_filter:
            lik = np.asarray(
                model.likelihood_array(outcome, node.cloud.particles, experiment),
                dtype=float,
            )
            raw = node.cloud.weights * lik
            z = stable_sum(raw)
            leaf_plan.append((node, raw / z if z > 0 else None))
            return z
        factors = [visit(child) for child in node.children]
        new_edges = [e * f for e, f in zip(node.edge_weights, factors)]
        z = fsum(new_edges)
        edge_plan.append((node, [e / z for e in new_edges] if z > 0 else None))
        return z

    total = visit(root)
    if total <= 0.0:
        raise AllZeroLikelihood("datum inconsistent with every filter leaf")
    for leaf, new_weights in leaf_plan:
        if new_weights is not None:
            leaf.cloud = ParticleCloud(leaf.cloud.particles, new_weights)
    for node, new_edges in edge_plan:
        if new_edges is not None:
            node.edge_weights = new_edges
    return root


def flatten(root: Node, champions_only: bool = False) -> ParticleCloud:
    """Collapse the tree to one cloud of path-weighted leaf particles.

    With ``champions_only`` each decision node contributes only its
    heaviest child (at weight one), giving the posterior conditioned on
    the most probable structure.
    """
    parts: list[NDArray] = []
    wts: list[NDArray] = []

    def visit(node: Node, path_weight: float) -> None:
        if node.is_filter:
            parts.append(node.cloud.particles)
            wts.append(node.cloud.weights * path_weight)
            return
        if champions_only and node.kind is NodeKind.DECISION:
            best = int(np.argmax(node.edge_weights))
            visit(node.children[best], path_weight)
            return
        for child, weight in zip(node.children, node.edge_weights):
            visit(child, path_weight * weight)

    visit(root, 1.0)
    return ParticleCloud(np.vstack(parts), np.concatenate(wts))


def champion_leaf_count(root: Node) -> int:
    """Number of filter leaves in the most-probable structure.

    Decision nodes follow only their heaviest child; mixture nodes keep
    all children.
    """
    count = 0

    def visit(node: Node) -> None:
        nonlocal count
        if node.is_filter:
            count += 1
        elif node.kind is NodeKind.DECISION:
            visit(node.children[int(np.argmax(node.edge_weights))])
        else:
            for child in node.children:
                visit(child)

    visit(root)
    return count


def node_bayes_factor(root: Node, leaf: Node) -> float:
    """Product of edge weights on the root-to-leaf path."""
    bf = 1.0
    cur = leaf
    while cur is not root:
        parent = cur.parent
        if parent is None:
            raise ValueError("node is not a descendant of the given root")
        bf *= parent.edge_weights[parent.children.index(cur)]
        cur = parent
    return bf


def _detach(node: Node) -> None:
    node.parent = None


def _champion_rule(node: Node) -> None:
    if len(node.children) < 2:
        return
    threshold = resolve_context(node, "champion_threshold")
    i = int(np.argmax(node.edge_weights))
    w = node.edge_weights[i]
    if w >= 1.0 or w / (1.0 - w) > threshold:
        for j, child in enumerate(node.children):
            if j != i:
                _detach(child)
        node.children = [node.children[i]]
        node.edge_weights = [1.0]


def _floor_rule(node: Node) -> None:
    if node.kind is NodeKind.DECISION:
        floor = resolve_context(node, "decision_floor")
    elif node.kind is NodeKind.MIXTURE:
        floor = resolve_context(node, "mixture_floor")
    else:
        return
    if floor <= 0.0 or not node.children:
        return
    keep = [i for i, w in enumerate(node.edge_weights) if w >= floor]
    if not keep:
        # Never leave an internal node childless: retain the heaviest child.
        keep = [int(np.argmax(node.edge_weights))]
    if len(keep) == len(node.children):
        return
    for i, child in enumerate(node.children):
        if i not in keep:
            _detach(child)
    node.children = [node.children[i] for i in keep]
    total = fsum(node.edge_weights[i] for i in keep)
    node.edge_weights = [node.edge_weights[i] / total for i in keep]


def _only_child_rule(node: Node) -> None:
    parent = node.parent
    if parent is None or len(parent.children) != 1 or not node.children:
        return
    for child in node.children:
        child.parent = parent
        _merge_context_into(node.context, child)
    parent.children = list(node.children)
    parent.edge_weights = list(node.edge_weights)
    node.children = []
    node.edge_weights = []
    _detach(node)


def _single_child_rule(node: Node) -> None:
    parent = node.parent
    if parent is None or len(node.children) != 1:
        return
    child = node.children[0]
    i = parent.children.index(node)
    parent.children[i] = child
    child.parent = parent
    _merge_context_into(node.context, child)
    node.children = []
    node.edge_weights = []
    _detach(node)


def prune(root: Node) -> Node:
    """One sweep of champion, floor, only-child, and single-child rules.

    Rules run in that order at each node, visiting nodes top-down; nodes
    detached mid-sweep are skipped. Nodes where the ``prune`` context
    resolves false are left alone. The root is never removed: a root
    whose sole child is a filter leaf is a legal terminal shape.
    """
    for node in list(_pre_order(root)):
        if not _attached(node, root):
            continue
        if not resolve_context(node, "prune"):
            continue
        _champion_rule(node)
        _floor_rule(node)
        _only_child_rule(node)
        if _attached(node, root):
            _single_child_rule(node)
    _refresh_depths(root)
    return root


def _split_leaf(
    leaf: Node,
    cfg: GlobalConfig,
    rng: np.random.Generator,
    resampler: Resampler,
    clusterer: Clusterer,
) -> None:
    cloud = leaf.cloud
    n = cloud.n_particles
    children: list[Node] = []
    n_distinct: int | None = None
    for n_c in sorted(set(cfg.n_cluster_set)):
        if n_c == 1:
            children.append(
                Node(NodeKind.FILTER, cloud=resampler(cloud, n, rng))
            )
            continue
        if n_distinct is None:
            n_distinct = np.unique(cloud.particles, axis=0).shape[0]
        if n_c > n_distinct:
            continue
        result = clusterer(cloud.particles, cloud.weights, n_c, rng)
        mix = Node(NodeKind.MIXTURE)
        for j in range(n_c):
            mask = result.labels == j
            wsum = stable_sum(cloud.weights[mask]) if mask.any() else 0.0
            if wsum <= 0.0:
                # A cluster with no posterior mass contributes nothing.
                continue
            sub = ParticleCloud(cloud.particles[mask], cloud.weights[mask])
            n_draw = max(cfg.n_min_particles, int(mask.sum()))
            mix.add_child(
                Node(NodeKind.FILTER, cloud=resampler(sub, n_draw, rng)), wsum
            )
        if not mix.children:
            continue
        total = fsum(mix.edge_weights)
        mix.edge_weights = [w / total for w in mix.edge_weights]
        children.append(mix)
    if not children:
        leaf.cloud = resampler(cloud, n, rng)
        return
    delta = Node(NodeKind.DECISION, context=leaf.context)
    for child in children:
        delta.add_child(child, 1.0 / len(children))
    parent = leaf.parent
    i = parent.children.index(leaf)
    parent.children[i] = delta
    delta.parent = parent
    leaf.context = Context()
    _detach(leaf)
    _refresh_depths(delta, base=parent.depth + 1)


def structured_resample(
    root: Node,
    cfg: GlobalConfig,
    rng: np.random.Generator,
    resampler: Resampler | None = None,
    clusterer: Clusterer | None = None,
) -> Node:
    """Resample weight-degenerate leaves, splitting where depth allows.

    A filter leaf whose effective sample size drops below
    ``resample_threshold * n`` is either replaced by a decision over
    candidate clusterings (one branch per entry of ``n_cluster_set``:
    the single-cluster branch is a plain resampled copy, each k > 1
    branch a mixture of per-cluster filters with edge weights equal to
    the cluster weight sums) or, when a split would push nodes past
    ``d_max``, locally resampled in place. Cluster leaves are populated
    with ``max(n_min_particles, cluster size)`` draws at uniform weight,
    so thin clusters stay numerically stable. Candidate cluster counts
    exceeding the number of distinct particles are omitted.
    """
    if resampler is None:

        def resampler(cloud: ParticleCloud, n_out: int, r: np.random.Generator) -> ParticleCloud:
            return liu_west_resample(cloud, cfg.liu_west, n_out, r)

    if clusterer is None:
        clusterer = weighted_kmeans
    for leaf in list(iter_filter_leaves(root)):
        n = leaf.cloud.n_particles
        if ess(leaf.cloud) / n >= cfg.resample_threshold:
            continue
        if leaf.depth <= cfg.d_max - 2:
            _split_leaf(leaf, cfg, rng, resampler, clusterer)
        else:
            leaf.cloud = resampler(leaf.cloud, n, rng)
    return root


@dataclass
class RegionEstimate:
    """Union of credibility ellipsoids; one per contributing leaf.

    A point belongs to the region when it lies inside any ellipsoid:
    ``(x - center) @ inv(shape) @ (x - center) <= radius^2``.
    """

    ellipsoids: list[tuple[NDArray, NDArray, float]]
    credibility: float

    def contains(self, x: NDArray) -> bool:
        point = np.asarray(x, dtype=float)
        for center, shape, radius in self.ellipsoids:
            d = point - center
            if d @ np.linalg.solve(shape, d) <= radius**2:
                return True
        return False

    def to_dict(self) -> dict:
        return {
            "credibility": self.credibility,
            "ellipsoids": [
                {
                    "center": center.tolist(),
                    "shape": shape.tolist(),
                    "radius": radius,
                }
                for center, shape, radius in self.ellipsoids
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegionEstimate":
        return cls(
            ellipsoids=[
                (
                    np.asarray(e["center"], dtype=float),
                    np.asarray(e["shape"], dtype=float),
                    float(e["radius"]),
                )
                for e in data["ellipsoids"]
            ],
            credibility=float(data["credibility"]),
        )


def _spd_shape(cov: NDArray) -> NDArray:
    """Return cov nudged to positive definiteness by escalating jitter."""
    dim = cov.shape[0]
    trace = float(np.trace(cov))
    eps = 1e-12 * trace / dim if trace > 0 else 1e-15
    candidate = cov
    for _ in range(20):
        try:
            np.linalg.cholesky(candidate)
            return candidate
        except np.linalg.LinAlgError:
            candidate = cov + eps * np.eye(dim)
            eps *= 10.0
    raise np.linalg.LinAlgError("covariance could not be regularized")


def region_estimate(root: Node, alpha: float) -> RegionEstimate:
    """Credible region at level ``alpha`` from the tree structure.

    Filter leaves contribute covariance ellipsoids (chi-squared radius
    at ``alpha`` with one degree of freedom per dimension). Mixture
    nodes take the union over all children. Decision nodes take the
    union over their ``region_champions`` heaviest children, ties broken
    by child index.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    ellipsoids: list[tuple[NDArray, NDArray, float]] = []

    def visit(node: Node) -> None:
        if node.is_filter:
            m = moments(node.cloud)
            radius = float(np.sqrt(chi2.ppf(alpha, df=node.cloud.dimension)))
            ellipsoids.append((m.mean, _spd_shape(m.covariance), radius))
            return
        if node.kind is NodeKind.MIXTURE:
            for child in node.children:
                visit(child)
            return
        n_keep = resolve_context(node, "region_champions")
        order = np.argsort(-np.asarray(node.edge_weights), kind="stable")
        for i in order[:n_keep]:
            visit(node.children[i])

    visit(root)
    return RegionEstimate(ellipsoids=ellipsoids, credibility=alpha)


def audit_tree(root: Node, d_max: int | None = None, tol: float = 1e-12) -> None:
    """Check every structural invariant; raise on the first violation.

    Intended for tests and debugging sweeps, not hot loops.
    """
    if root.kind is not NodeKind.DECISION:
        raise TreeInvariantViolation("root must be a decision node")
    if root.parent is not None:
        raise TreeInvariantViolation("root must not have a parent")
    if root.depth != 0:
        raise TreeInvariantViolation("root depth must be 0")
    for node in _pre_order(root):
        if node.is_filter:
            if node.children or node.edge_weights:
                raise TreeInvariantViolation("filter nodes must be leaves")
            if node.cloud is None:
                raise TreeInvariantViolation("filter nodes must hold a cloud")
            try:
                node.cloud.validate(tol=tol)
            except ValueError as exc:
                raise TreeInvariantViolation(f"invalid cloud: {exc}") from exc
        else:
            if node.cloud is not None:
                raise TreeInvariantViolation("internal nodes must not hold clouds")
            if not node.children:
                raise TreeInvariantViolation(
                    f"{node.kind.value} node must have children"
                )
            if len(node.children) != len(node.edge_weights):
                raise TreeInvariantViolation("children/edge weight length mismatch")
            if any(w < -tol or w > 1 + tol for w in node.edge_weights):
                raise TreeInvariantViolation("edge weights must lie in [0, 1]")
            if abs(fsum(node.edge_weights) - 1.0) > tol:
                raise TreeInvariantViolation("outgoing edge weights must sum to 1")
            for child in node.children:
                if child.parent is not node:
                    raise TreeInvariantViolation("broken parent pointer")
                if child.depth != node.depth + 1:
                    raise TreeInvariantViolation("inconsistent depth")
        if d_max is not None and node.depth > d_max:
            raise TreeInvariantViolation(
                f"node depth {node.depth} exceeds d_max {d_max}"
            )


def tree_snapshot(node: Node, include_particles: bool = False) -> dict:
    """Recursive plain-dict record of the tree for logging."""
    record: dict = {
        "kind": node.kind.value,
        "depth": node.depth,
        "context": node.context.set_fields(),
    }
    if node.is_filter:
        m = moments(node.cloud)
        record.update(
            n_particles=node.cloud.n_particles,
            ess=ess(node.cloud),
            mean=m.mean.tolist(),
            covariance=m.covariance.tolist(),
        )
        if include_particles:
            record["particles"] = node.cloud.particles.tolist()
            record["weights"] = node.cloud.weights.tolist()
    else:
        record["edge_weights"] = list(node.edge_weights)
        record["children"] = [
            tree_snapshot(child, include_particles) for child in node.children
        ]
    return record


_DOT_SHAPES = {"filter": "square", "mixture": "triangle", "decision": "circle"}


def snapshot_to_dot(snapshot: dict) -> str:
    """Graphviz rendering of a tree snapshot.

    Filter, mixture, and decision nodes are drawn as squares, triangles,
    and circles; edges carry their weights to four decimal places and
    filter nodes are annotated with particle count and effective sample
    size.
    """
    lines = ["digraph belief_tree {", "  node [fontsize=10];"]
    counter = 0

    def visit(record: dict) -> str:
        nonlocal counter
        name = f"n{counter}"
        counter += 1
        shape = _DOT_SHAPES[record["kind"]]
        if record["kind"] == "filter":
            label = f"n={record['n_particles']}\\ness={record['ess']:.1f}"
        else:
            label = ""
        lines.append(f'  {name} [shape={shape}, label="{label}"];')
        for child, weight in zip(
            record.get("children", []), record.get("edge_weights", [])
        ):
            child_name = visit(child)
            lines.append(f'  {name} -> {child_name} [label="{weight:.4f}"];')
        return name

    visit(snapshot)
    lines.append("}")
    return "\n".join(lines)


def to_dot(root: Node) -> str:
    return snapshot_to_dot(tree_snapshot(root))


def snapshot_to_json(snapshot: dict) -> str:
    return json.dumps(snapshot, sort_keys=True)
