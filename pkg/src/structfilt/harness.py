"""Batch experiment runner: single trials, ensembles, and parameter sweeps.

A trial executes the full inference loop, design, simulate, update,
prune, resample, against a simulated ground truth, logging loss and tree
shape per experiment. Ensembles repeat trials over prior-sampled truths
and aggregate mean and median loss per experiment index; sweeps repeat
ensembles over a grid of one parameter. All randomness is derived from
the configured seed, with per-trial streams spawned from the seed and
trial index so results are identical regardless of worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from structfilt.design import PghConfig, design_experiment, select_design_node
from structfilt.errors import StructFiltError
from structfilt.models import Experiment, ExperimentModel, make_model
from structfilt.smc import LiuWestConfig, ess, liu_west_resample
from structfilt.tree import (
    Context,
    GlobalConfig,
    RegionEstimate,
    flatten,
    init_tree,
    iter_filter_leaves,
    prune,
    region_estimate,
    snapshot_to_dot,
    structured_resample,
    tree_snapshot,
    update,
)

__all__ = [
    "TrialConfig",
    "TrialRecord",
    "EnsembleResult",
    "run_trial",
    "run_ensemble",
    "run_sweep",
    "load_schema",
    "validate_outputs",
    "SWEEP_PARAMETERS",
]


@dataclass(frozen=True)
class TrialConfig:
    """Everything needed to reproduce one trial.

    Defaults are desk-scale; :meth:`paper_defaults` restores the
    published parameter tables (8000 to 12000 particles), which take
    hours in ensemble runs.
    """

    model: str = "rge"
    n_experiments: int = 500
    seed: int = 0
    baseline: bool = False
    truth: tuple[float, ...] | None = None

    n_particles: int = 2000
    n_min_particles: int = 250
    d_max: int = 4
    n_cluster_set: tuple[int, ...] = (1, 2)
    resample_threshold: float = 0.5
    liu_west_a: float = 0.98

    prune_enabled: bool = True
    decision_floor: float = 0.1
    mixture_floor: float = 0.0
    champion_threshold: float = 2000.0
    region_champions: int = 1

    pgh_constant: float = 1.0
    pgh_exponent: int = 1
    t_max: float = 1e8
    schedule: tuple[tuple[float, float], ...] | None = None

    n_levels: int = 3
    n_meas: int = 3
    hedging: float = 0.5
    hedge_to_half: bool = True
    n_truth_eigenvalues: int = 2

    champion_flatten: bool = False
    region_alpha: float = 0.95
    snapshot_every: int | None = None

    @classmethod
    def paper_defaults(cls, model: str, **overrides) -> "TrialConfig":
        base = {
            "rge": dict(model="rge", n_particles=8000, n_min_particles=1000, d_max=4),
            "cfpe": dict(model="cfpe", n_particles=12000, n_min_particles=1000, d_max=6),
            "rabi": dict(model="rabi", n_particles=8000, n_min_particles=1000, d_max=4),
        }[model]
        base.update(overrides)
        return cls(**base)

    @classmethod
    def desk_defaults(cls, model: str, **overrides) -> "TrialConfig":
        base = dict(model=model, n_particles=2000, n_min_particles=250)
        base["d_max"] = 6 if model == "cfpe" else 4
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict) -> "TrialConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        coerced = dict(data)
        if coerced.get("n_cluster_set") is not None:
            coerced["n_cluster_set"] = tuple(int(k) for k in coerced["n_cluster_set"])
        if coerced.get("truth") is not None:
            coerced["truth"] = tuple(float(v) for v in coerced["truth"])
        if coerced.get("schedule") is not None:
            coerced["schedule"] = tuple(
                (float(t), float(theta)) for t, theta in coerced["schedule"]
            )
        return cls(**coerced)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["n_cluster_set"] = list(self.n_cluster_set)
        if self.truth is not None:
            out["truth"] = list(self.truth)
        if self.schedule is not None:
            out["schedule"] = [list(pair) for pair in self.schedule]
        return out


def _build_model(cfg: TrialConfig) -> ExperimentModel:
    if cfg.model == "rge":
        return make_model("rge", n_levels=cfg.n_levels, n_meas=cfg.n_meas)
    if cfg.model == "cfpe":
        m = cfg.n_truth_eigenvalues
        return make_model(
            "cfpe",
            h=cfg.hedging,
            hedge_to_half=cfg.hedge_to_half,
            amplitudes=(m**-0.5,) * m,
        )
    if cfg.model == "rabi":
        return make_model("rabi")
    raise ValueError(f"unknown model {cfg.model!r}")


def _global_config(cfg: TrialConfig) -> GlobalConfig:
    return GlobalConfig(
        n_particles=cfg.n_particles,
        n_min_particles=cfg.n_min_particles,
        d_max=cfg.d_max,
        n_cluster_set=cfg.n_cluster_set,
        resample_threshold=cfg.resample_threshold,
        liu_west=LiuWestConfig(a=cfg.liu_west_a),
    )


def _root_context(cfg: TrialConfig) -> Context:
    return Context(
        prune=cfg.prune_enabled,
        mixture_floor=cfg.mixture_floor,
        decision_floor=cfg.decision_floor,
        champion_threshold=cfg.champion_threshold,
        region_champions=cfg.region_champions,
    )


@dataclass
class TrialRecord:
    """Per-experiment metrics plus final tree artifacts for one trial."""

    config: TrialConfig
    truth: NDArray
    prior_loss: float
    t: NDArray
    theta: NDArray
    outcome: NDArray
    loss: NDArray
    ess: NDArray
    n_leaves: NDArray
    depth: NDArray
    failed: NDArray
    final_loss: float
    final_region: RegionEstimate
    final_tree: dict
    final_cloud: object = None  # flattened posterior; not serialized
    snapshots: dict[int, dict] = field(default_factory=dict)
    error: str | None = None
    failed_at: int | None = None

    @property
    def n_rows(self) -> int:
        return self.loss.shape[0]

    def to_json(self) -> str:
        payload = {
            "config": self.config.to_dict(),
            "truth": self.truth.tolist(),
            "prior_loss": self.prior_loss,
            "rows": {
                "t": self.t.tolist(),
                "theta": self.theta.tolist(),
                "outcome": self.outcome.tolist(),
                "loss": self.loss.tolist(),
                "ess": self.ess.tolist(),
                "n_leaves": self.n_leaves.tolist(),
                "depth": self.depth.tolist(),
                "failed": self.failed.tolist(),
            },
            "final_loss": self.final_loss,
            "final_region": self.final_region.to_dict(),
            "final_tree": self.final_tree,
            "snapshots": {str(k): v for k, v in self.snapshots.items()},
            "error": self.error,
            "failed_at": self.failed_at,
        }
        return json.dumps(payload, sort_keys=True)


def _tree_stats(tree) -> tuple[int, int]:
    leaves = list(iter_filter_leaves(tree))
    return len(leaves), max(leaf.depth for leaf in leaves)


def run_trial(cfg: TrialConfig) -> TrialRecord:
    """Execute one trial: init, then design/simulate/update/prune/resample.

    With ``baseline`` the tree is a single never-split filter leaf,
    resampled in place by plain Liu-West whenever its effective sample
    size ratio drops below the threshold; design, simulation, and loss
    bookkeeping are identical to the structured runs.

    Failures raised by inference (e.g. a datum rejected by every leaf)
    do not abort the batch: metrics are forward-filled from the failure
    step onward and flagged in ``failed``, keeping row counts uniform
    across trials.
    """
    rng = np.random.default_rng(cfg.seed)
    model = _build_model(cfg)
    truth = (
        np.asarray(cfg.truth, dtype=float)
        if cfg.truth is not None
        else model.sample_truth(rng)
    )
    gcfg = _global_config(cfg)
    pgh_cfg = PghConfig(
        constant=cfg.pgh_constant, exponent=cfg.pgh_exponent, t_max=cfg.t_max
    )
    tree = init_tree(model.sample_prior, gcfg, _root_context(cfg), rng)

    n = cfg.n_experiments
    t_arr = np.full(n, np.nan)
    theta_arr = np.full(n, np.nan)
    outcome_arr = np.full(n, -1, dtype=int)
    loss_arr = np.empty(n)
    ess_arr = np.empty(n)
    leaves_arr = np.empty(n, dtype=int)
    depth_arr = np.empty(n, dtype=int)
    failed_arr = np.zeros(n, dtype=bool)

    prior_loss = model.loss(flatten(tree), truth)
    last_loss = prior_loss
    last_ess = ess(flatten(tree))
    last_leaves, last_depth = _tree_stats(tree)
    error: str | None = None
    failed_at: int | None = None
    snapshots: dict[int, dict] = {}

    for i in range(n):
        try:
            if cfg.schedule is not None:
                experiment = Experiment(*cfg.schedule[i])
            else:
                node = select_design_node(tree)
                experiment = design_experiment(node.cloud, pgh_cfg, rng)
            outcome = model.simulate(truth, experiment, rng)
            update(tree, outcome, experiment, model)
            if cfg.baseline:
                leaf = next(iter_filter_leaves(tree))
                n_leaf = leaf.cloud.n_particles
                if ess(leaf.cloud) / n_leaf < cfg.resample_threshold:
                    leaf.cloud = liu_west_resample(
                        leaf.cloud, gcfg.liu_west, n_leaf, rng
                    )
            else:
                prune(tree)
                structured_resample(tree, gcfg, rng)
        except StructFiltError as exc:
            error = f"{type(exc).__name__}: {exc}"
            failed_at = i
            failed_arr[i:] = True
            loss_arr[i:] = last_loss
            ess_arr[i:] = last_ess
            leaves_arr[i:] = last_leaves
            depth_arr[i:] = last_depth
            break
        flat = flatten(tree, champions_only=cfg.champion_flatten)
        last_loss = model.loss(flat, truth)
        last_ess = ess(flat)
        last_leaves, last_depth = _tree_stats(tree)
        t_arr[i] = experiment.t
        theta_arr[i] = experiment.theta
        outcome_arr[i] = outcome
        loss_arr[i] = last_loss
        ess_arr[i] = last_ess
        leaves_arr[i] = last_leaves
        depth_arr[i] = last_depth
        if cfg.snapshot_every and (i + 1) % cfg.snapshot_every == 0:
            snapshots[i + 1] = tree_snapshot(tree)

    return TrialRecord(
        config=cfg,
        truth=truth,
        prior_loss=prior_loss,
        t=t_arr,
        theta=theta_arr,
        outcome=outcome_arr,
        loss=loss_arr,
        ess=ess_arr,
        n_leaves=leaves_arr,
        depth=depth_arr,
        failed=failed_arr,
        final_loss=last_loss,
        final_region=region_estimate(tree, cfg.region_alpha),
        final_tree=tree_snapshot(tree),
        final_cloud=flatten(tree, champions_only=cfg.champion_flatten),
        snapshots=snapshots,
        error=error,
        failed_at=failed_at,
    )


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial seed derived from the ensemble seed and trial index."""
    return int(np.random.SeedSequence([master_seed, trial_index]).generate_state(1)[0])


@dataclass
class EnsembleResult:
    """Aggregated losses per experiment index plus the trial records."""

    experiment_index: NDArray
    mean_loss: NDArray
    median_loss: NDArray
    loss_matrix: NDArray
    failed_matrix: NDArray
    records: list[TrialRecord]

    @property
    def n_trials(self) -> int:
        return self.loss_matrix.shape[0]


LOSSES_COLUMNS = ["trial", "experiment_index", "loss", "ess", "n_leaves", "depth", "failed"]
AGGREGATE_COLUMNS = ["experiment_index", "mean_loss", "median_loss"]
SWEEP_COLUMNS = ["parameter", "value", "experiment_index", "mean_loss", "median_loss"]


def load_schema() -> dict:
    """Column schema for every CSV this module writes."""
    text = resources.files("structfilt").joinpath("output_schema.json").read_text()
    return json.loads(text)


def _write_trial_files(out_dir: Path, index: int, record: TrialRecord) -> None:
    (out_dir / f"region_{index}.json").write_text(
        json.dumps(record.final_region.to_dict(), sort_keys=True)
    )
    (out_dir / f"tree_{index}_final.json").write_text(
        json.dumps(record.final_tree, sort_keys=True)
    )
    (out_dir / f"tree_{index}_final.dot").write_text(
        snapshot_to_dot(record.final_tree)
    )
    for step, snap in record.snapshots.items():
        (out_dir / f"tree_{index}_{step}.json").write_text(
            json.dumps(snap, sort_keys=True)
        )


def _append_losses(out_dir: Path, index: int, record: TrialRecord) -> None:
    path = out_dir / "losses.csv"
    new = not path.exists()
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(LOSSES_COLUMNS)
        for i in range(record.n_rows):
            writer.writerow(
                [
                    index,
                    i,
                    record.loss[i],
                    record.ess[i],
                    record.n_leaves[i],
                    record.depth[i],
                    int(record.failed[i]),
                ]
            )


def run_ensemble(
    cfg: TrialConfig,
    n_trials: int,
    jobs: int = 1,
    out_dir: str | Path | None = None,
) -> EnsembleResult:
    """Repeat a trial over independent seeds and aggregate losses.

    Unless the config pins an explicit truth, each trial samples its own
    from the prior. Outputs (when ``out_dir`` is given) are written as
    trials complete, so a crash preserves finished trials.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    out_path: Path | None = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        losses = out_path / "losses.csv"
        if losses.exists():
            losses.unlink()

    configs = [
        dataclasses.replace(cfg, seed=trial_seed(cfg.seed, i)) for i in range(n_trials)
    ]
    records: list[TrialRecord] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            iterator = pool.map(run_trial, configs)
            for i, record in enumerate(iterator):
                records.append(record)
                if out_path is not None:
                    _write_trial_files(out_path, i, record)
                    _append_losses(out_path, i, record)
    else:
        for i, config in enumerate(configs):
            record = run_trial(config)
            records.append(record)
            if out_path is not None:
                _write_trial_files(out_path, i, record)
                _append_losses(out_path, i, record)

    loss_matrix = np.vstack([r.loss for r in records]) if cfg.n_experiments else np.empty((n_trials, 0))
    failed_matrix = (
        np.vstack([r.failed for r in records]) if cfg.n_experiments else np.zeros((n_trials, 0), bool)
    )
    index = np.arange(cfg.n_experiments)
    mean_loss = loss_matrix.mean(axis=0) if cfg.n_experiments else np.empty(0)
    median_loss = np.median(loss_matrix, axis=0) if cfg.n_experiments else np.empty(0)
    result = EnsembleResult(
        experiment_index=index,
        mean_loss=mean_loss,
        median_loss=median_loss,
        loss_matrix=loss_matrix,
        failed_matrix=failed_matrix,
        records=records,
    )
    if out_path is not None:
        with (out_path / "aggregate.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(AGGREGATE_COLUMNS)
            for i in range(cfg.n_experiments):
                writer.writerow([i, mean_loss[i], median_loss[i]])
        manifest = {
            "config": cfg.to_dict(),
            "n_trials": n_trials,
            "trials": [
                {
                    "trial": i,
                    "seed": r.config.seed,
                    "truth": r.truth.tolist(),
                    "prior_loss": r.prior_loss,
                    "final_loss": r.final_loss,
                    "failed": bool(r.failed.any()),
                    "error": r.error,
                }
                for i, r in enumerate(records)
            ],
        }
        (out_path / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    return result


SWEEP_PARAMETERS = {
    "k_champ": "champion_threshold",
    "pgh_constant": "pgh_constant",
    "w_floor": "decision_floor",
}


def run_sweep(
    cfg: TrialConfig,
    parameter: str,
    values: list[float],
    n_trials: int,
    jobs: int = 1,
    out_dir: str | Path | None = None,
) -> dict[float, EnsembleResult]:
    """One ensemble per parameter value, plus a combined summary table."""
    key = parameter.lower()
    if key not in SWEEP_PARAMETERS:
        raise ValueError(
            f"unknown sweep parameter {parameter!r}; expected one of {sorted(SWEEP_PARAMETERS)}"
        )
    field_name = SWEEP_PARAMETERS[key]
    out_path = Path(out_dir) if out_dir is not None else None
    results: dict[float, EnsembleResult] = {}
    for value in values:
        sub_cfg = dataclasses.replace(cfg, **{field_name: value})
        sub_dir = out_path / f"{key}_{value:g}" if out_path is not None else None
        results[value] = run_ensemble(sub_cfg, n_trials, jobs=jobs, out_dir=sub_dir)
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        with (out_path / "sweep.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SWEEP_COLUMNS)
            for value, result in results.items():
                for i in range(result.experiment_index.size):
                    writer.writerow(
                        [key, value, i, result.mean_loss[i], result.median_loss[i]]
                    )
    return results


def validate_outputs(out_dir: str | Path, n_trials: int, n_experiments: int) -> None:
    """Check written CSVs against the published schema and row counts."""
    out_path = Path(out_dir)
    schema = load_schema()

    def check(name: str, expected_rows: int) -> None:
        with (out_path / name).open(newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != schema[name]["columns"]:
            raise ValueError(f"{name}: header {rows[0]} does not match schema")
        if len(rows) - 1 != expected_rows:
            raise ValueError(
                f"{name}: expected {expected_rows} data rows, found {len(rows) - 1}"
            )

    check("losses.csv", n_trials * n_experiments)
    check("aggregate.csv", n_experiments)
