"""Command line: ``eqtrack track | evaluate | oracle | synth``.

Every option can also be set through an environment variable named
``EQTRACK_<COMMAND>_<OPTION>``, e.g. ``EQTRACK_TRACK_ETA=750``.

Failures print ``error: <category>: <message>`` on stderr and exit with
the category's code.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import io as eio
from .config import RunConfig
from .core import ValidationError
from .evaluate import DEFAULT_REENTRY_GAP, evaluate as run_evaluate
from .flowgraph import GraphParams, brute_force_map, build_graph, dump_graph, solve

EXIT_CODES = {"input": 3, "io": 4, "oracle-mismatch": 5, "internal": 1}


class CategorizedError(click.ClickException):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category
        self.exit_code = EXIT_CODES[category]

    def show(self, file=None):
        click.echo(f"error: {self.category}: {self.format_message()}", err=True)


def _guard(fn):
    """Translate library exceptions into categorized CLI errors."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ValidationError as exc:
            raise CategorizedError("input", str(exc)) from None
        except OSError as exc:
            raise CategorizedError("io", str(exc)) from None
        except Exception as exc:  # pragma: no cover - last resort
            raise CategorizedError("internal", f"{type(exc).__name__}: {exc}") from None

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def config_options(fn):
    """Attach one option per RunConfig field."""
    d = RunConfig()
    opts = [
        click.option("--eta", type=float, default=d.eta, show_default=True, help="Max frame gap of a transition."),
        click.option("--epsilon", type=float, default=d.epsilon, show_default=True, help="MUG threshold for equalization."),
        click.option("--k1", type=float, default=d.k1, show_default=True, help="Appearance weight."),
        click.option("--k2", type=float, default=d.k2, show_default=True, help="Motion weight."),
        click.option("--lambda", "lam", type=float, default=d.lam, show_default=True, help="Motion decay rate."),
        click.option("--gamma", type=int, default=d.gamma, show_default=True, help="Minimum gait period in frames."),
        click.option("--iou-threshold", type=float, default=d.iou_threshold, show_default=True),
        click.option("--equalize/--no-equalize", default=d.equalize, show_default=True),
        click.option("--p-min", type=float, default=d.p_min, show_default=True, help="Probability floor."),
        click.option("--seed", type=int, default=d.seed, show_default=True),
        click.option("--entry-cost", type=float, default=d.entry_cost, show_default=True,
                     help="Cost of starting or ending a trajectory."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(kwargs) -> RunConfig:
    names = RunConfig.field_names()
    return RunConfig(**{k: kwargs.pop(k) for k in names})


@click.group(context_settings={"auto_envvar_prefix": "EQTRACK", "help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="Log more (repeatable).")
def main(verbose):
    """Multi-camera tracklet association by global min-cost flow."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--tracklets", "tracklets_path", type=click.Path(dir_okay=False), required=True)
@click.option("--topology", "topology_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Trajectory file.")
@click.option("--hypotheses", "hyp_path", type=click.Path(dir_okay=False), help="Per-frame hypothesis CSV.")
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), help="Equalization statistics (JSON).")
@click.option("--dump-graph", "graph_path", type=click.Path(dir_okay=False), help="Text edge list of the graph.")
@config_options
@_guard
def track(tracklets_path, topology_path, out_path, hyp_path, stats_path, graph_path, **kwargs):
    """Associate tracklets into trajectories."""
    from .pipeline import track as run_track

    cfg = _config(kwargs)
    rejected = []
    tracklets = eio.read_tracklets(tracklets_path, rejected=rejected)
    for r in rejected:
        click.echo(f"warning: rejected tracklet {r.tracklet_id}: {r.reason}", err=True)
    topology = eio.read_topology(topology_path)
    result = run_track(tracklets, topology, cfg)
    eio.write_trajectories(result.trajectories, out_path, tracklets, hypothesis_path=hyp_path)
    if stats_path:
        Path(stats_path).write_text(json.dumps(result.scores.stats.as_dict(), indent=1) + "\n", encoding="utf-8")
    if graph_path:
        with open(graph_path, "w", encoding="utf-8") as fh:
            dump_graph(result.graph, fh)
    click.echo(
        f"tracklets={len(tracklets)} transitions={result.graph.n_transitions} "
        f"trajectories={len(result.trajectories)} cost={result.trajectories.objective_cost!r}"
    )


@main.command()
@click.option("--gt", "gt_path", type=click.Path(dir_okay=False), required=True)
@click.option("--hyp", "hyp_path", type=click.Path(dir_okay=False), required=True)
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), help="Statistics written by `track --stats`.")
@click.option("--identity-match", is_flag=True, help="Pair only identical boxes (ground-truth detections as input).")
@click.option("--iou-threshold", type=float, default=RunConfig().iou_threshold, show_default=True)
@click.option("--reentry-gap", type=int, default=DEFAULT_REENTRY_GAP, show_default=True,
              help="Frames after which a same-camera return counts as inter-camera.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Also write the report here.")
@_guard
def evaluate(gt_path, hyp_path, stats_path, identity_match, iou_threshold, reentry_gap, as_json, out_path):
    """Score hypotheses against ground truth (MCTA)."""
    from .equalize import EqualizationStats

    gt = eio.read_annotations(gt_path)
    hyp = eio.read_annotations(hyp_path)
    stats = None
    if stats_path:
        try:
            stats = EqualizationStats(**json.loads(Path(stats_path).read_text(encoding="utf-8")))
        except (TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{stats_path}: bad statistics file: {exc}") from None
    report = run_evaluate(gt, hyp, iou_threshold=iou_threshold, identity_match=identity_match, reentry_gap=reentry_gap)
    for w in report.warnings:
        click.echo(f"warning: {w}", err=True)
    if as_json:
        click.echo(json.dumps(eio.report_dict(report, stats), indent=1))
    else:
        click.echo(eio.format_report(report, stats), nl=False)
    if out_path:
        eio.write_report(report, out_path, stats, as_json=as_json)


@main.command()
@click.option("--instances", type=int, default=100, show_default=True)
@click.option("--max-tracklets", type=click.IntRange(1, 10), default=8, show_default=True)
@click.option("--cameras", type=click.IntRange(1, 6), default=3, show_default=True)
@click.option("--entry-cost", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guard
def oracle(instances, max_tracklets, cameras, entry_cost, seed):
    """Compare the solver with exhaustive search on small random instances."""
    from .synth import random_instance

    rng = np.random.default_rng(seed)
    params = GraphParams(entry_cost=entry_cost)
    t0 = time.perf_counter()
    bad = []
    for k in range(instances):
        m = int(rng.integers(1, max_tracklets + 1))
        n_cam = int(rng.integers(1, cameras + 1))
        tracklets, topo, sims = random_instance(rng, m, n_cam)
        got = solve(build_graph(tracklets, topo, params, sims))
        ref = brute_force_map(tracklets, topo, params, sims)
        if got.objective_cost != ref.objective_cost:
            bad.append((k, got.objective_cost, ref.objective_cost))
    elapsed = time.perf_counter() - t0
    click.echo(f"instances={instances} mismatches={len(bad)} seconds={elapsed:.3f}")
    if bad:
        k, a, b = bad[0]
        raise CategorizedError("oracle-mismatch", f"instance {k}: solver {a!r} != brute force {b!r}")


@main.command()
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cameras", type=click.IntRange(1, 6), default=3, show_default=True)
@click.option("--targets", type=click.IntRange(0), default=10, show_default=True)
@click.option("--fragmentation", type=click.FloatRange(0, 1), default=0.0, show_default=True)
@click.option("--shift", type=click.FloatRange(0, 1), default=0.0, show_default=True,
              help="Fraction of camera-specific colour mixed into every descriptor.")
@_guard
def synth(out_dir, seed, cameras, targets, fragmentation, shift):
    """Generate a synthetic scenario with ground truth."""
    from .synth import SynthConfig, synth_scenario

    scenario = synth_scenario(SynthConfig(seed=seed, n_cameras=cameras, n_targets=targets,
                                          fragmentation=fragmentation, appearance_shift=shift))
    paths = eio.write_scenario(scenario, out_dir)
    click.echo(" ".join(f"{k}={v}" for k, v in paths.items()))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
