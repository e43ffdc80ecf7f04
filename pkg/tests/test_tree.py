import json

import numpy as np
import pytest

from structfilt.errors import (
    AllZeroLikelihood,
    TreeInvariantViolation,
    UnsetContextField,
)
from structfilt.models import Experiment, RabiModel
from structfilt.smc import ParticleCloud, ess, moments
from structfilt.tree import (
    Context,
    GlobalConfig,
    Node,
    NodeKind,
    audit_tree,
    champion_leaf_count,
    flatten,
    init_tree,
    iter_filter_leaves,
    node_bayes_factor,
    prune,
    region_estimate,
    resolve_context,
    snapshot_to_dot,
    structured_resample,
    tree_snapshot,
    update,
)

from tests.util import (
    cloud_as_value_map,
    full_context,
    identity_resampler,
    max_value_map_discrepancy,
    random_cloud,
    random_tree,
)


class ConstantModel:
    """Likelihood equal to each particle's first coordinate, any outcome."""

    def likelihood_array(self, outcome, particles, experiment):
        return particles[:, 0]


class ZeroAboveModel:
    """Zero likelihood for particles with first coordinate above a cutoff."""

    def __init__(self, cutoff):
        self.cutoff = cutoff

    def likelihood_array(self, outcome, particles, experiment):
        return (particles[:, 0] <= self.cutoff).astype(float)


def two_leaf_tree(w1=0.5, w2=0.5, x1=0.8, x2=0.2):
    root = Node(NodeKind.DECISION, context=full_context())
    root.add_child(Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([x1]))), w1)
    root.add_child(Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([x2]))), w2)
    return root


def test_init_tree_single_particle():
    cfg = GlobalConfig(n_particles=1, n_min_particles=1, d_max=2)
    rng = np.random.default_rng(0)
    tree = init_tree(lambda r, n: r.uniform(0, 1, (n, 1)), cfg, full_context(), rng)
    audit_tree(tree, d_max=cfg.d_max)
    assert tree.kind is NodeKind.DECISION
    assert tree.edge_weights == [1.0]
    assert tree.children[0].cloud.n_particles == 1


def test_init_tree_prior_mean():
    cfg = GlobalConfig(n_particles=5000, n_min_particles=100, d_max=4)
    rng = np.random.default_rng(1)
    tree = init_tree(lambda r, n: r.uniform(0, 1, (n, 2)), cfg, full_context(), rng)
    flat = flatten(tree)
    se = np.sqrt(1.0 / 12 / 5000)
    assert np.all(np.abs(moments(flat).mean - 0.5) < 5 * se)


def test_context_resolution_and_inheritance():
    root = two_leaf_tree()
    leaf = root.children[0]
    assert resolve_context(leaf, "champion_threshold") == 2000.0
    leaf.context = Context(champion_threshold=55.0)
    assert resolve_context(leaf, "champion_threshold") == 55.0
    assert resolve_context(root.children[1], "champion_threshold") == 2000.0
    root.context = Context()
    with pytest.raises(UnsetContextField):
        resolve_context(root.children[1], "champion_threshold")


def test_update_single_child_edge_stays_one():
    cfg = GlobalConfig(n_particles=20, n_min_particles=5, d_max=3)
    rng = np.random.default_rng(2)
    tree = init_tree(lambda r, n: r.uniform(0.1, 1, (n, 1)), cfg, full_context(), rng)
    update(tree, 0, Experiment(t=1.0), ConstantModel())
    assert tree.edge_weights == [1.0]
    audit_tree(tree, d_max=cfg.d_max)


def test_update_edge_weights_follow_normalizers():
    # Normalizers 0.8 and 0.2 on an even split give (0.8, 0.2) edges.
    root = two_leaf_tree(0.5, 0.5, x1=0.8, x2=0.2)
    update(root, 0, Experiment(t=1.0), ConstantModel())
    assert root.edge_weights == pytest.approx([0.8, 0.2], abs=1e-12)
    audit_tree(root)


def test_update_zeroed_leaf_gets_zero_edge():
    root = two_leaf_tree(0.5, 0.5, x1=0.8, x2=0.2)
    update(root, 0, Experiment(t=1.0), ZeroAboveModel(cutoff=0.5))
    assert root.edge_weights == pytest.approx([0.0, 1.0], abs=1e-12)
    # The dead leaf keeps its normalized local weights.
    audit_tree(root)


def test_update_rejects_datum_and_leaves_tree_intact():
    root = two_leaf_tree(0.7, 0.3)
    before = json.dumps(tree_snapshot(root), sort_keys=True)
    with pytest.raises(AllZeroLikelihood):
        update(root, 0, Experiment(t=1.0), ZeroAboveModel(cutoff=-1.0))
    assert json.dumps(tree_snapshot(root), sort_keys=True) == before


def test_flatten_single_leaf_identity():
    root = Node(NodeKind.DECISION, context=full_context())
    cloud = random_cloud(np.random.default_rng(3), dim=2)
    root.add_child(Node(NodeKind.FILTER, cloud=cloud), 1.0)
    flat = flatten(root)
    assert np.array_equal(flat.particles, cloud.particles)
    assert np.allclose(flat.weights, cloud.weights, atol=1e-15)


def test_flatten_two_leaves_uses_edge_weights():
    root = two_leaf_tree(0.7, 0.3, x1=1.0, x2=2.0)
    flat = flatten(root)
    assert np.allclose(flat.weights, [0.7, 0.3])


def test_flatten_matches_path_product_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        tree = random_tree(rng, dim=2)
        expected_parts = []
        expected_weights = []

        def walk(node, path):
            if node.is_filter:
                expected_parts.append(node.cloud.particles)
                expected_weights.append(node.cloud.weights * path)
                return
            for child, w in zip(node.children, node.edge_weights):
                walk(child, path * w)

        walk(tree, 1.0)
        flat = flatten(tree)
        assert np.array_equal(flat.particles, np.vstack(expected_parts))
        assert np.allclose(flat.weights, np.concatenate(expected_weights), atol=1e-12)
        assert abs(flat.weights.sum() - 1.0) < 1e-12


def test_flatten_update_commute_on_random_trees():
    rng = np.random.default_rng(5)
    model = RabiModel()
    for _ in range(20):
        tree = random_tree(rng)
        flat_before = flatten(tree)
        outcome = int(rng.integers(2))
        experiment = Experiment(t=float(rng.uniform(0.5, 20)))
        update(tree, outcome, experiment, model)
        direct, _ = __import__("structfilt.smc", fromlist=["bayes_update"]).bayes_update(
            flat_before,
            model.likelihood_array(outcome, flat_before.particles, experiment),
        )
        assert np.abs(flatten(tree).weights - direct.weights).max() < 1e-10


def test_node_bayes_factor_values():
    root = Node(NodeKind.DECISION, context=full_context())
    mid = Node(NodeKind.MIXTURE)
    leaf = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    other = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([2.0])))
    root.add_child(mid, 0.8)
    root.add_child(other, 0.2)
    mid.add_child(leaf, 0.5)
    assert node_bayes_factor(root, leaf) == pytest.approx(0.4)
    assert node_bayes_factor(root, other) == pytest.approx(0.2)
    assert node_bayes_factor(root, root) == 1.0


def test_only_child_chain_has_unit_bayes_factor():
    root = Node(NodeKind.DECISION, context=full_context())
    mid = Node(NodeKind.MIXTURE)
    leaf = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    root.add_child(mid, 1.0)
    mid.add_child(leaf, 1.0)
    assert node_bayes_factor(root, leaf) == pytest.approx(1.0)


def test_edge_ratio_matches_independent_evidence_ratio():
    # Sibling subtrees at equal structural prior: the edge-weight ratio
    # after several updates must equal the ratio of the sequentially
    # accumulated per-leaf evidences.
    rng = np.random.default_rng(6)
    clouds = [random_cloud(rng, dim=1, max_particles=20) for _ in range(2)]
    root = Node(NodeKind.DECISION, context=full_context())
    for cloud in clouds:
        root.add_child(Node(NodeKind.FILTER, cloud=cloud.copy()), 0.5)
    model = RabiModel()
    evidences = [1.0, 1.0]
    standalone = [cloud.copy() for cloud in clouds]
    from structfilt.smc import bayes_update

    for _ in range(3):
        outcome = int(rng.integers(2))
        experiment = Experiment(t=float(rng.uniform(0.5, 10)))
        update(root, outcome, experiment, model)
        for i, cloud in enumerate(standalone):
            lik = model.likelihood_array(outcome, cloud.particles, experiment)
            standalone[i], z = bayes_update(cloud, lik)
            evidences[i] *= z
    assert root.edge_weights[0] / root.edge_weights[1] == pytest.approx(
        evidences[0] / evidences[1], rel=1e-9
    )


def leaf_tree(weights, context=None):
    root = Node(NodeKind.DECISION, context=context or full_context())
    for i, w in enumerate(weights):
        root.add_child(
            Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([float(i)]))), w
        )
    return root


def test_champion_rule_keeps_dominant_child():
    root = leaf_tree([0.999, 0.001], full_context(champion_threshold=20.0))
    prune(root)
    assert len(root.children) == 1
    assert root.edge_weights == [1.0]
    assert root.children[0].cloud.particles[0, 0] == 0.0
    audit_tree(root)


def test_champion_rule_respects_threshold():
    root = leaf_tree([0.9, 0.1])  # odds 9, threshold 2000
    prune(root)
    assert len(root.children) == 2


def test_floor_rule_drops_light_children():
    root = leaf_tree([0.05, 0.95])
    prune(root)
    assert len(root.children) == 1
    assert root.edge_weights == [1.0]
    assert root.children[0].cloud.particles[0, 0] == 1.0
    audit_tree(root)


def test_floor_rule_never_empties_a_node():
    root = leaf_tree([0.5, 0.3, 0.2], full_context(decision_floor=0.95))
    prune(root)
    assert len(root.children) == 1
    assert root.children[0].cloud.particles[0, 0] == 0.0


def test_mixture_floor_disabled_by_default():
    root = Node(NodeKind.DECISION, context=full_context())
    mix = Node(NodeKind.MIXTURE)
    root.add_child(mix, 1.0)
    for i, w in enumerate([0.99, 0.01]):
        mix.add_child(
            Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([float(i)]))), w
        )
    prune(root)
    # Only-child promotion lifts the mixture's children to the root, but
    # the 0.01 child survives because the mixture floor defaults to zero.
    assert len(root.children) == 2


def test_only_child_rule_promotes_children():
    root = Node(NodeKind.DECISION, context=full_context())
    inner = Node(NodeKind.DECISION)
    root.add_child(inner, 1.0)
    a = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    b = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([2.0])))
    inner.add_child(a, 0.6)
    inner.add_child(b, 0.4)
    prune(root)
    assert root.children == [a, b]
    assert root.edge_weights == pytest.approx([0.6, 0.4])
    assert a.depth == 1 and b.depth == 1
    audit_tree(root)


def test_single_child_rule_splices_out_intermediate():
    root = Node(NodeKind.DECISION, context=full_context())
    mix = Node(NodeKind.MIXTURE)
    leaf = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    other = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([2.0])))
    root.add_child(mix, 0.7)
    root.add_child(other, 0.3)
    mix.add_child(leaf, 1.0)
    prune(root)
    assert root.children == [leaf, other]
    assert root.edge_weights == pytest.approx([0.7, 0.3])
    audit_tree(root)


def test_prune_is_identity_without_redundancy():
    root = Node(NodeKind.DECISION, context=full_context(decision_floor=0.0))
    mix = Node(NodeKind.MIXTURE)
    root.add_child(
        Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([0.0]))), 0.6
    )
    root.add_child(mix, 0.4)
    for i, w in enumerate([0.5, 0.5]):
        mix.add_child(
            Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([float(i + 1)]))), w
        )
    before = json.dumps(tree_snapshot(root), sort_keys=True)
    prune(root)
    assert json.dumps(tree_snapshot(root), sort_keys=True) == before


def test_prune_disabled_by_context():
    root = leaf_tree([0.999, 0.001], full_context(prune=False, champion_threshold=20.0))
    prune(root)
    assert len(root.children) == 2


def test_prune_context_override_applies_to_subtree_only():
    # A mixture node that disables pruning protects its own children,
    # while the sibling decision subtree still prunes.
    root = Node(NodeKind.DECISION, context=full_context(mixture_floor=0.2))
    protected = Node(NodeKind.MIXTURE, context=Context(prune=False))
    pruned = Node(NodeKind.MIXTURE)
    root.add_child(protected, 0.5)
    root.add_child(pruned, 0.5)
    for mix in (protected, pruned):
        for i, w in enumerate([0.9, 0.1]):
            mix.add_child(
                Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([float(i)]))), w
            )
    prune(root)
    assert len(protected.children) == 2
    # The unprotected mixture floored down to one child and was then
    # spliced out by the single-child rule; its survivor sits at the root.
    assert pruned.parent is None
    assert root.children[1].is_filter
    assert root.children[1].cloud.particles[0, 0] == 0.0


def test_removed_intermediate_context_is_inherited_by_children():
    root = Node(NodeKind.DECISION, context=full_context())
    inner = Node(NodeKind.DECISION, context=Context(champion_threshold=55.0))
    root.add_child(inner, 1.0)
    a = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    b = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([2.0])))
    inner.add_child(a, 0.5)
    inner.add_child(b, 0.5)
    prune(root)
    assert a.parent is root
    assert resolve_context(a, "champion_threshold") == 55.0
    assert resolve_context(root, "champion_threshold") == 2000.0


def test_representational_prunes_preserve_flatten():
    rng = np.random.default_rng(7)
    for _ in range(20):
        tree = random_tree(rng, chain_probability=0.8)
        # Disable lossy rules; keep only the representational ones.
        tree.context = full_context(
            decision_floor=0.0, mixture_floor=0.0, champion_threshold=1e12
        )
        before = cloud_as_value_map(flatten(tree))
        prune(tree)
        after = cloud_as_value_map(flatten(tree))
        assert max_value_map_discrepancy(before, after) < 1e-12
        audit_tree(tree)


def make_split_candidate(rng, n=60, skew=25.0):
    # Bimodal cloud with skewed weights, so the effective sample size is
    # low enough to trigger resampling.
    left = rng.normal(0.0, 0.05, (n // 2, 1))
    right = rng.normal(10.0, 0.05, (n - n // 2, 1))
    particles = np.vstack([left, right])
    weights = rng.dirichlet(np.ones(n) / skew)
    root = Node(NodeKind.DECISION, context=full_context())
    root.add_child(Node(NodeKind.FILTER, cloud=ParticleCloud(particles, weights)), 1.0)
    return root


def test_structured_resample_no_trigger_leaves_tree_alone():
    rng = np.random.default_rng(8)
    cfg = GlobalConfig(n_particles=40, n_min_particles=5, d_max=4)
    root = Node(NodeKind.DECISION, context=full_context())
    cloud = ParticleCloud(rng.normal(size=(40, 1)))  # uniform weights, full ess
    root.add_child(Node(NodeKind.FILTER, cloud=cloud), 1.0)
    structured_resample(root, cfg, rng)
    assert root.children[0].cloud is cloud


def test_split_produces_decision_over_clusterings():
    rng = np.random.default_rng(9)
    root = make_split_candidate(rng)
    cfg = GlobalConfig(n_particles=60, n_min_particles=10, d_max=4)
    structured_resample(root, cfg, rng, resampler=identity_resampler)
    delta = root.children[0]
    assert delta.kind is NodeKind.DECISION
    assert delta.edge_weights == pytest.approx([0.5, 0.5])
    copy_child, mixture_child = delta.children
    assert copy_child.kind is NodeKind.FILTER
    assert mixture_child.kind is NodeKind.MIXTURE
    assert len(mixture_child.children) == 2
    audit_tree(root, d_max=4)


def test_split_mixture_edges_equal_cluster_weight_sums():
    rng = np.random.default_rng(10)
    root = make_split_candidate(rng)
    original = root.children[0].cloud
    cfg = GlobalConfig(n_particles=60, n_min_particles=10, d_max=4)
    structured_resample(root, cfg, rng, resampler=identity_resampler)
    mixture = root.children[0].children[1]
    left_mass = original.weights[original.particles[:, 0] < 5.0].sum()
    assert sorted(mixture.edge_weights) == pytest.approx(
        sorted([left_mass, 1.0 - left_mass]), abs=1e-12
    )


def test_split_without_resample_preserves_flatten():
    rng = np.random.default_rng(11)
    root = make_split_candidate(rng)
    before = cloud_as_value_map(flatten(root))
    cfg = GlobalConfig(n_particles=60, n_min_particles=10, d_max=4)
    structured_resample(root, cfg, rng, resampler=identity_resampler)
    after = cloud_as_value_map(flatten(root))
    assert max_value_map_discrepancy(before, after) < 1e-12


def test_split_respects_minimum_particles():
    rng = np.random.default_rng(12)
    root = make_split_candidate(rng, n=40)
    cfg = GlobalConfig(n_particles=40, n_min_particles=30, d_max=4)
    structured_resample(root, cfg, rng)
    mixture = root.children[0].children[1]
    assert all(child.cloud.n_particles >= 30 for child in mixture.children)
    assert all(np.allclose(c.cloud.weights, 1.0 / c.cloud.n_particles) for c in mixture.children)


def test_deep_leaf_resamples_in_place():
    rng = np.random.default_rng(13)
    root = Node(NodeKind.DECISION, context=full_context())
    mix = Node(NodeKind.MIXTURE)
    root.add_child(mix, 1.0)
    skewed = ParticleCloud(
        rng.normal(size=(30, 1)), rng.dirichlet(np.ones(30) / 20)
    )
    mix.add_child(Node(NodeKind.FILTER, cloud=skewed), 1.0)
    cfg = GlobalConfig(n_particles=30, n_min_particles=5, d_max=3)
    structured_resample(root, cfg, rng)
    leaf = root.children[0].children[0]
    assert leaf.is_filter
    assert leaf.cloud is not skewed
    assert ess(leaf.cloud) == pytest.approx(30, rel=1e-9)
    audit_tree(root, d_max=3)


def test_inference_loop_respects_depth_and_cluster_bounds():
    rng = np.random.default_rng(14)
    model = RabiModel()
    cfg = GlobalConfig(n_particles=300, n_min_particles=50, d_max=4)
    tree = init_tree(model.sample_prior, cfg, full_context(), rng)
    truth = np.array([0.5])
    bound = max(cfg.n_cluster_set) ** (cfg.d_max - 1)
    for k in range(1, 41):
        experiment = Experiment(t=1.125**k)
        outcome = model.simulate(truth, experiment, rng)
        update(tree, outcome, experiment, model)
        prune(tree)
        structured_resample(tree, cfg, rng)
        audit_tree(tree, d_max=cfg.d_max)
        assert champion_leaf_count(tree) <= bound


def test_region_estimate_single_gaussian_leaf():
    rng = np.random.default_rng(15)
    cloud = ParticleCloud(rng.normal(0.0, 1.0, size=(200_000, 1)))
    root = Node(NodeKind.DECISION, context=full_context())
    root.add_child(Node(NodeKind.FILTER, cloud=cloud), 1.0)
    region = region_estimate(root, 0.95)
    assert len(region.ellipsoids) == 1
    center, shape, radius = region.ellipsoids[0]
    half_width = radius * np.sqrt(shape[0, 0])
    assert abs(center[0]) < 0.02
    assert half_width == pytest.approx(1.96, abs=0.05)
    assert region.contains(np.array([1.9]))
    assert not region.contains(np.array([2.1]))


def test_region_champions_limits_decision_children():
    rng = np.random.default_rng(16)
    root = Node(NodeKind.DECISION, context=full_context())
    means = [0.0, 5.0, 9.0]
    for mean, w in zip(means, [0.2, 0.5, 0.3]):
        cloud = ParticleCloud(rng.normal(mean, 0.1, size=(500, 1)))
        root.add_child(Node(NodeKind.FILTER, cloud=cloud), w)
    region = region_estimate(root, 0.95)
    assert len(region.ellipsoids) == 1
    assert region.ellipsoids[0][0][0] == pytest.approx(5.0, abs=0.05)
    root.context = full_context(region_champions=2)
    region = region_estimate(root, 0.95)
    assert len(region.ellipsoids) == 2


def test_region_ties_break_by_child_index():
    rng = np.random.default_rng(17)
    root = Node(NodeKind.DECISION, context=full_context())
    for mean in (0.0, 7.0):
        cloud = ParticleCloud(rng.normal(mean, 0.1, size=(300, 1)))
        root.add_child(Node(NodeKind.FILTER, cloud=cloud), 0.5)
    region = region_estimate(root, 0.95)
    assert region.ellipsoids[0][0][0] == pytest.approx(0.0, abs=0.05)


def test_region_mixture_takes_union():
    rng = np.random.default_rng(18)
    root = Node(NodeKind.DECISION, context=full_context())
    mix = Node(NodeKind.MIXTURE)
    root.add_child(mix, 1.0)
    for mean, w in zip([0.0, 7.0], [0.9, 0.1]):
        cloud = ParticleCloud(rng.normal(mean, 0.1, size=(300, 1)))
        mix.add_child(Node(NodeKind.FILTER, cloud=cloud), w)
    region = region_estimate(root, 0.95)
    assert len(region.ellipsoids) == 2
    assert region.contains(np.array([7.0]))


def test_region_roundtrips_through_dict():
    from structfilt.tree import RegionEstimate

    rng = np.random.default_rng(19)
    root = Node(NodeKind.DECISION, context=full_context())
    root.add_child(
        Node(NodeKind.FILTER, cloud=ParticleCloud(rng.normal(size=(100, 2)))), 1.0
    )
    region = region_estimate(root, 0.9)
    rebuilt = RegionEstimate.from_dict(
        json.loads(json.dumps(region.to_dict()))
    )
    assert rebuilt.credibility == region.credibility
    point = np.array([0.1, -0.2])
    assert rebuilt.contains(point) == region.contains(point)


def test_audit_detects_violations():
    root = two_leaf_tree()
    root.edge_weights = [0.5, 0.6]
    with pytest.raises(TreeInvariantViolation):
        audit_tree(root)
    root = two_leaf_tree()
    root.children[0].children = [Node(NodeKind.FILTER)]
    with pytest.raises(TreeInvariantViolation):
        audit_tree(root)
    leaf = Node(NodeKind.FILTER, cloud=ParticleCloud(np.array([1.0])))
    with pytest.raises(TreeInvariantViolation):
        audit_tree(leaf)  # root must be a decision node


def test_audit_depth_limit():
    root = two_leaf_tree()
    audit_tree(root, d_max=1)
    root.children[0].depth = 5
    with pytest.raises(TreeInvariantViolation):
        audit_tree(root, d_max=4)


def test_snapshot_and_dot_export():
    root = Node(NodeKind.DECISION, context=full_context(champion_threshold=99.0))
    mix = Node(NodeKind.MIXTURE)
    root.add_child(mix, 1.0)
    for i in range(2):
        mix.add_child(
            Node(
                NodeKind.FILTER,
                cloud=ParticleCloud(np.full((4, 1), float(i))),
            ),
            0.5,
        )
    snap = tree_snapshot(root)
    assert snap["kind"] == "decision"
    assert snap["context"]["champion_threshold"] == 99.0
    assert snap["children"][0]["children"][0]["n_particles"] == 4
    dot = snapshot_to_dot(snap)
    assert "shape=circle" in dot
    assert "shape=triangle" in dot
    assert "shape=square" in dot
    assert 'label="0.5000"' in dot
    assert "ess=4.0" in dot
    json.dumps(snap)  # snapshot must be JSON-serializable


def test_snapshot_can_include_particles():
    root = two_leaf_tree()
    snap = tree_snapshot(root, include_particles=True)
    leaf = snap["children"][0]
    assert leaf["particles"] == [[0.8]]
    assert leaf["weights"] == [1.0]
