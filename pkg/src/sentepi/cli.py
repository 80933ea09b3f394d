"""Command-line orchestration of the pipeline and experiment harness.

Commands share one flat ``key = value`` configuration file; flags win
over file values. Every command writes a manifest recording the
resolved configuration hash so downstream commands can refuse to mix
outputs produced under different configurations. All randomness flows
from the single master seed through per-command stream paths.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import sys
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path

import click
import numpy
import scipy

from . import __version__
from . import classify as classify_mod
from . import epi, flownet, homophily, timeseries
from .corpus import SentimentLabel, parse_labels, parse_tweets, tokenize
from .stats import derive_stream

# Stream path roots, one per command.
_TRAIN, _CLASSIFY, _TIMESERIES, _FLOWNET, _HOMOPHILY, _GENNET, _SWEEP = range(7)

_UPSTREAM = {
    "classify": "train",
    "timeseries": "classify",
    "flownet": "classify",
    "homophily": "flownet",
}


@dataclass
class RunConfig:
    """Resolved configuration for one command invocation."""

    seed: int
    out: Path = Path("out")
    tweets: Path | None = None
    labels: Path | None = None
    followers: Path | None = None
    friends: Path | None = None
    contact_network: Path | None = None
    coverage_table: Path | None = None
    start_date: date | None = None
    end_date: date | None = None
    test_split: float = 0.2
    nb_smoothing: float = 1.0
    maxent_l2: float = 0.1
    maxent_max_iter: int = 1000
    maxent_tol: float = 1e-6
    moving_average_window: int = 14
    bootstrap_iterations: int = 1000
    in_fraction_iterations: int = 200
    min_community_fraction: float = 0.01
    r_grid: tuple[float, ...] = (0.0, 0.075, 0.145)
    runs_per_r: int = 2000
    coverage: float = 0.624
    max_stall: int = 50_000
    net_nodes: int = 1000
    net_groups: int = 3
    net_p_intra: float = 0.021
    net_p_inter: float = 0.00125
    net_weight_min: int = 90
    net_weight_max: int = 210

    def config_hash(self) -> str:
        """Hash of every semantic setting; the output directory is excluded."""
        parts = []
        for f in sorted(fld.name for fld in fields(self)):
            if f == "out":
                continue
            parts.append(f"{f}={getattr(self, f)!r}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


_PATH_KEYS = {
    "out", "tweets", "labels", "followers", "friends",
    "contact_network", "coverage_table",
}
_INT_KEYS = {
    "seed", "maxent_max_iter", "moving_average_window", "bootstrap_iterations",
    "in_fraction_iterations", "runs_per_r", "max_stall", "net_nodes",
    "net_groups", "net_weight_min", "net_weight_max",
}
_FLOAT_KEYS = {
    "test_split", "nb_smoothing", "maxent_l2", "maxent_tol",
    "min_community_fraction", "coverage", "net_p_intra", "net_p_inter",
}
_DATE_KEYS = {"start_date", "end_date"}


def _parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise click.UsageError(f"bad r_grid value {text!r}") from None
        if step <= 0:
            raise click.UsageError("r_grid step must be positive")
        grid = []
        value = start
        while value <= stop + 1e-12:
            grid.append(round(value, 10))
            value += step
        return tuple(grid)
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise click.UsageError(f"bad r_grid value {text!r}") from None


def load_config(path: Path | None, overrides: dict) -> RunConfig:
    """Read the flat key = value file and apply flag overrides."""
    values: dict[str, object] = {}
    if path is not None:
        if not path.exists():
            raise click.UsageError(f"config file not found: {path}")
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise click.UsageError(f"{path}:{lineno}: expected key = value")
            values[key.strip()] = value.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})

    known = {fld.name for fld in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise click.UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "seed" not in values:
        raise click.UsageError("config must set a master seed (seed = <int>)")

    kwargs: dict[str, object] = {}
    for key, value in values.items():
        try:
            if key in _PATH_KEYS:
                kwargs[key] = Path(value)
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key in _DATE_KEYS:
                kwargs[key] = date.fromisoformat(str(value))
            elif key == "r_grid":
                kwargs[key] = _parse_grid(str(value)) if isinstance(value, str) else value
            else:
                kwargs[key] = value
        except ValueError:
            raise click.UsageError(f"bad value for {key}: {value!r}") from None
    config = RunConfig(**kwargs)  # type: ignore[arg-type]
    if any(b <= a for a, b in zip(config.r_grid, config.r_grid[1:])):
        raise click.UsageError("r_grid must be strictly ascending")
    return config


def _require_inputs(config: RunConfig, *names: str) -> None:
    for name in names:
        path = getattr(config, name)
        if path is None:
            raise click.UsageError(f"config key '{name}' is required for this command")
        if not Path(path).exists():
            raise click.UsageError(f"{name} file not found: {path}")


def _write_manifest(config: RunConfig, command: str, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "versions": {
            "sentepi": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": sorted(outputs),
    }
    path = config.out / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _check_upstream(config: RunConfig, command: str, force: bool) -> None:
    upstream = _UPSTREAM.get(command)
    if upstream is None:
        return
    path = config.out / f"manifest_{upstream}.json"
    if not path.exists():
        raise click.UsageError(
            f"missing upstream output: run '{upstream}' first ({path} not found)"
        )
    recorded = json.loads(path.read_text()).get("config_hash")
    if recorded != config.config_hash():
        if force:
            click.echo(f"warning: {path.name} is stale; continuing under --force")
            return
        raise click.UsageError(
            f"stale upstream: {path.name} was produced under a different "
            f"configuration; rerun '{upstream}' or pass --force"
        )


def _load_tweets(config: RunConfig):
    with open(config.tweets, encoding="utf-8") as fh:
        tweets, skipped = parse_tweets(fh)
    if skipped:
        click.echo(f"skipped {skipped} malformed tweet line(s)")
    return tweets


def _read_predictions(config: RunConfig) -> dict[str, SentimentLabel]:
    path = config.out / "predictions.csv"
    if not path.exists():
        raise click.UsageError(f"missing {path}; run 'classify' first")
    labels: dict[str, SentimentLabel] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            labels[row[0]] = SentimentLabel(row[1])
    return labels


def _read_coverage(path: Path) -> dict[str, float]:
    coverage: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or row[0].strip().lower() == "region":
                continue
            coverage[row[0].strip()] = float(row[1])
    return coverage


_config_option = click.option(
    "--config", "config_path", type=click.Path(path_type=Path), default=None,
    help="Flat key = value configuration file.",
)
_seed_option = click.option("--seed", type=int, default=None, help="Master seed override.")
_out_option = click.option(
    "--out", type=click.Path(path_type=Path), default=None, help="Output directory."
)
_force_option = click.option(
    "--force", is_flag=True, help="Ignore stale upstream manifests."
)
_workers_option = click.option(
    "--workers", type=int, default=1, show_default=True,
    help="Parallel worker processes.",
)


def _resolve(config_path: Path | None, seed: int | None, out: Path | None) -> RunConfig:
    overrides: dict[str, object] = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides["out"] = out
    config = load_config(config_path, overrides)
    config.out.mkdir(parents=True, exist_ok=True)
    return config


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Sentiment, opinion-network and outbreak-risk pipeline."""


@main.command()
@_config_option
@_seed_option
@_out_option
def train(config_path, seed, out) -> None:
    """Train the sentiment ensemble on the labeled tweets."""
    config = _resolve(config_path, seed, out)
    _require_inputs(config, "tweets", "labels")
    tweets = _load_tweets(config)
    with open(config.labels, encoding="utf-8") as fh:
        labels = parse_labels(fh)

    docs = [
        (tokenize(tweet.text), labels[tweet.id])
        for tweet in tweets
        if tweet.id in labels
    ]
    if not docs:
        raise click.UsageError("no labeled tweets found")

    heldout = []
    if config.test_split > 0.0:
        gen = derive_stream(config.seed, _TRAIN, 0).generator()
        order = gen.permutation(len(docs))
        n_test = int(round(config.test_split * len(docs)))
        heldout = [docs[i] for i in order[:n_test]]
        docs = [docs[i] for i in order[n_test:]]

    try:
        nb = classify_mod.train_naive_bayes(docs, smoothing=config.nb_smoothing)
        maxent = classify_mod.train_maxent(
            docs, l2=config.maxent_l2, max_iter=config.maxent_max_iter,
            tol=config.maxent_tol,
        )
    except (ValueError, ArithmeticError) as exc:
        raise click.ClickException(f"training failed: {exc}") from exc
    model = classify_mod.EnsembleModel(nb=nb, maxent=maxent)
    model_path = config.out / "ensemble_model.json"
    classify_mod.save_ensemble(model, model_path)

    click.echo(
        f"trained on {len(docs)} docs, vocabulary {len(nb.vocabulary)}, "
        f"maxent {'converged' if maxent.converged else 'hit iteration cap'} "
        f"after {maxent.n_iter} iterations"
    )
    if heldout:
        acc = classify_mod.evaluate_accuracy(model, heldout)
        click.echo(f"held-out accuracy on {len(heldout)} docs: {acc:.4f}")
    _write_manifest(config, "train", [model_path.name])


@main.command(name="classify")
@_config_option
@_seed_option
@_out_option
@_force_option
def classify_cmd(config_path, seed, out, force) -> None:
    """Predict labels for tweets without a manual label."""
    config = _resolve(config_path, seed, out)
    _require_inputs(config, "tweets", "labels")
    _check_upstream(config, "classify", force)
    model_path = config.out / "ensemble_model.json"
    if not model_path.exists():
        raise click.UsageError(f"missing model file {model_path}; run 'train' first")
    try:
        model = classify_mod.load_ensemble(model_path)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    tweets = _load_tweets(config)
    with open(config.labels, encoding="utf-8") as fh:
        labels = parse_labels(fh)

    out_path = config.out / "predictions.csv"
    n_predicted = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tweet_id", "label", "source"])
        for tweet in tweets:
            if tweet.id in labels:
                writer.writerow([tweet.id, labels[tweet.id].value, "manual"])
            else:
                prediction = model.predict(tokenize(tweet.text))
                writer.writerow([tweet.id, prediction.value, "predicted"])
                n_predicted += 1
    click.echo(f"wrote {out_path} ({n_predicted} predicted labels)")
    _write_manifest(config, "classify", [out_path.name])


@main.command(name="timeseries")
@_config_option
@_seed_option
@_out_option
@_force_option
def timeseries_cmd(config_path, seed, out, force) -> None:
    """Daily sentiment counts, the smoothed score, and regional scores."""
    config = _resolve(config_path, seed, out)
    _require_inputs(config, "tweets")
    _check_upstream(config, "timeseries", force)
    tweets = _load_tweets(config)
    predictions = _read_predictions(config)
    labeled = [(t, predictions[t.id]) for t in tweets if t.id in predictions]
    if not labeled:
        raise click.ClickException("no labeled tweets to aggregate")

    start = config.start_date or min(t.timestamp.date() for t, _ in labeled)
    end = config.end_date or max(t.timestamp.date() for t, _ in labeled)
    series = timeseries.daily_series(labeled, start, end)
    scores = timeseries.region_scores(labeled)

    daily_path = config.out / "daily_counts.csv"
    ma_path = config.out / "moving_avg.csv"
    region_path = config.out / "region_scores.csv"
    timeseries.write_daily_counts_csv(daily_path, series)
    timeseries.write_moving_average_csv(ma_path, series, window=config.moving_average_window)
    timeseries.write_region_scores_csv(region_path, scores)
    outputs = [daily_path.name, ma_path.name, region_path.name]

    if config.coverage_table is not None:
        _require_inputs(config, "coverage_table")
        coverage = _read_coverage(config.coverage_table)
        try:
            r, p = timeseries.regional_correlation(scores, coverage)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
        corr_path = config.out / "regional_correlation.json"
        corr_path.write_text(
            json.dumps({"weighted_r": r, "p_value": p, "n_regions": len(scores)},
                       sort_keys=True, indent=2) + "\n"
        )
        outputs.append(corr_path.name)
        click.echo(f"weighted r = {r:.4f}, two-sided p = {p:.4g}")

    click.echo(f"wrote {daily_path}, {ma_path}, {region_path}")
    _write_manifest(config, "timeseries", outputs)


@main.command(name="flownet")
@_config_option
@_seed_option
@_out_option
@_force_option
def flownet_cmd(config_path, seed, out, force) -> None:
    """Build the opinionated information-flow network's giant component."""
    config = _resolve(config_path, seed, out)
    _require_inputs(config, "tweets", "followers", "friends")
    _check_upstream(config, "flownet", force)
    tweets = _load_tweets(config)
    predictions = _read_predictions(config)
    labeled = [(t, predictions[t.id]) for t in tweets if t.id in predictions]
    tallies = flownet.tally_users(labeled)

    with open(config.followers, encoding="utf-8") as fh:
        followers = flownet.read_adjacency(fh)
    with open(config.friends, encoding="utf-8") as fh:
        friends = flownet.read_adjacency(fh)

    network = flownet.build_flow_network(tallies, followers, friends)
    opinion = flownet.opinionated(network)
    if not opinion.nodes:
        raise click.ClickException("opinionated network is empty")
    giant = flownet.giant_component(opinion)

    edges_path = config.out / "opinion_edges.csv"
    nodes_path = config.out / "opinion_nodes.csv"
    flownet.write_edges_csv(edges_path, giant)
    flownet.write_nodes_csv(nodes_path, giant)
    click.echo(
        f"flow network: {len(network.nodes)} users, {len(network.edges)} edges; "
        f"opinionated: {len(opinion.nodes)}; giant component: {len(giant.nodes)} "
        f"nodes, {len(giant.edges)} edges"
    )
    _write_manifest(config, "flownet", [edges_path.name, nodes_path.name])


def _read_opinion_network(config: RunConfig):
    nodes_path = config.out / "opinion_nodes.csv"
    edges_path = config.out / "opinion_edges.csv"
    for path in (nodes_path, edges_path):
        if not path.exists():
            raise click.UsageError(f"missing {path}; run 'flownet' first")
    signs: dict[str, int] = {}
    with open(nodes_path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            signs[row[0]] = 1 if row[4] == "positive" else -1
    edges = []
    with open(edges_path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            edges.append((row[0], row[1]))
    return signs, edges


@main.command(name="homophily")
@_config_option
@_seed_option
@_out_option
@_force_option
@_workers_option
def homophily_cmd(config_path, seed, out, force, workers) -> None:
    """Assortativity, bootstrap null, in-fractions, and communities."""
    config = _resolve(config_path, seed, out)
    _check_upstream(config, "homophily", force)
    signs, edges = _read_opinion_network(config)

    try:
        observed = homophily.assortativity(signs, edges)
        null = homophily.bootstrap_null(
            signs, edges, config.bootstrap_iterations,
            derive_stream(config.seed, _HOMOPHILY, 0),
            workers=max(1, workers),
        )
        ftest = homophily.in_fraction_test(
            signs, edges, config.in_fraction_iterations,
            derive_stream(config.seed, _HOMOPHILY, 1),
        )
        partition = homophily.detect_communities(
            signs.keys(), edges, derive_stream(config.seed, _HOMOPHILY, 2)
        )
        report = homophily.community_enrichment(
            partition, signs, min_size_fraction=config.min_community_fraction
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    null_path = config.out / "null_distribution.csv"
    comm_path = config.out / "communities.csv"
    summary_path = config.out / "homophily.json"
    homophily.write_null_distribution_csv(null_path, null)
    homophily.write_communities_csv(comm_path, report)
    summary_path.write_text(
        json.dumps(
            {
                "assortativity_r": observed.r,
                "degenerate": observed.degenerate,
                "null_mean": null.mean,
                "null_ci": [null.ci_low, null.ci_high],
                "null_max": null.max,
                "observed_exceeds_null_max": observed.r > null.max,
                "in_fraction_mean": ftest.original_mean,
                "in_fraction_significant": ftest.fraction_significant,
                "n_communities": report.n_communities,
            },
            sort_keys=True,
            indent=2,
        )
        + "\n"
    )
    click.echo(
        f"r = {observed.r:.4f} (null mean {null.mean:.5f}, max {null.max:.5f}); "
        f"mean f = {ftest.original_mean:.4f}; "
        f"{len(report.rows)} communities above size threshold"
    )
    _write_manifest(
        config, "homophily", [null_path.name, comm_path.name, summary_path.name]
    )


@main.command(name="gen-net")
@_config_option
@_seed_option
@_out_option
def gen_net(config_path, seed, out) -> None:
    """Generate the synthetic group-structured contact network."""
    config = _resolve(config_path, seed, out)
    try:
        net = epi.generate_synthetic_contact_network(
            n_nodes=config.net_nodes,
            n_groups=config.net_groups,
            p_intra=config.net_p_intra,
            p_inter=config.net_p_inter,
            weight_range=(config.net_weight_min, config.net_weight_max),
            stream=derive_stream(config.seed, _GENNET, 0),
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    net_path = config.out / "contact_network.csv"
    epi.write_contact_network(net_path, net)
    click.echo(f"wrote {net_path}: {net.n} nodes, {net.m} edges")
    _write_manifest(config, "gen-net", [net_path.name])


@main.command(name="sweep")
@_config_option
@_seed_option
@_out_option
@_force_option
@_workers_option
def sweep_cmd(config_path, seed, out, force, workers) -> None:
    """Outbreak risk across the assortativity grid."""
    config = _resolve(config_path, seed, out)
    if config.contact_network is not None:
        _require_inputs(config, "contact_network")
        net_path = config.contact_network
    else:
        net_path = config.out / "contact_network.csv"
        if not net_path.exists():
            raise click.UsageError(
                f"no contact_network configured and {net_path} not found; "
                "run 'gen-net' or set contact_network"
            )
        manifest = config.out / "manifest_gen-net.json"
        if manifest.exists():
            recorded = json.loads(manifest.read_text()).get("config_hash")
            if recorded != config.config_hash() and not force:
                raise click.UsageError(
                    "stale upstream: contact network was generated under a "
                    "different configuration; rerun 'gen-net' or pass --force"
                )
    try:
        net = epi.read_contact_network(net_path)
        report = epi.sweep(
            net,
            coverage=config.coverage,
            r_grid=config.r_grid,
            redistributions_per_r=config.runs_per_r,
            stream=derive_stream(config.seed, _SWEEP),
            workers=max(1, workers),
            max_stall=config.max_stall,
        )
    except (ValueError, epi.StallError) as exc:
        raise click.ClickException(str(exc)) from exc

    report_path = config.out / "sweep_report.csv"
    epi.write_sweep_csv(report_path, report)
    for pt in report.points:
        click.echo(
            f"target r {pt.target_r:.3f}: achieved {pt.achieved_r_mean:.4f}, "
            f"P(attack>=3%) = {pt.p_ge_3pct:.4f}, RR = {pt.rr_3pct:.2f}"
        )
    _write_manifest(config, "sweep", [report_path.name])


if __name__ == "__main__":
    sys.exit(main())
