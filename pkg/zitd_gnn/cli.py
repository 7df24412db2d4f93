"""
Command-line interface for crashrisk-zitd.
"""

import functools
import logging
import sys
from pathlib import Path

import click
import numpy as np

from zitd_gnn.config import RunConfig, parse_config, write_resolved
from zitd_gnn.core.tensor import no_grad
from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.io import load_dataset, write_synthetic
from zitd_gnn.data.synth import synth_generate
from zitd_gnn.data.windows import split_windows, temporal_split
from zitd_gnn.distributions.check import run_dist_check
from zitd_gnn.errors import (
    ConfigError,
    ContractError,
    DataError,
    DivergenceError,
    NumericError,
    SeriesConvergenceError,
    ZitdError,
)
from zitd_gnn.evaluation.metrics import baseline_report, metric_report
from zitd_gnn.evaluation.predict import forecast, predict_windows
from zitd_gnn.evaluation.report import (
    EvaluationSummary,
    write_loss_history,
    write_predictions,
    write_report,
)
from zitd_gnn.model.network import StzitdNetwork
from zitd_gnn.training.baseline import ha_baseline
from zitd_gnn.training.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from zitd_gnn.training.loss import exact_nll_field, total_loss
from zitd_gnn.training.trainer import train_loop

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def exit_code(exc: BaseException) -> int:
    """Map a library error onto the process exit status."""
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def run_options(func):
    """Options shared by every command that reads a RunConfig."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="JSON run configuration")
    @click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
                  help="Override one setting (repeatable)")
    @click.option("--seed", type=int, default=None, help="Seed for every random stream")
    @click.option("--output-dir", "-o", default=None, help="Directory for all outputs")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def data_options(func):
    @click.option("--edges", default=None, help="edges.csv (road_a,road_b)")
    @click.option("--crashes", default=None, help="crashes.csv (counts or risk scores)")
    @click.option("--features", default=None, help="features.csv (road,time_slot,f0..)")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def _fail(exc: BaseException) -> None:
    click.echo(f"Error: {exc}", err=True)
    sys.exit(exit_code(exc))


def _load(cfg: RunConfig) -> Dataset:
    paths = cfg.require_data()
    return load_dataset(paths.edges, paths.crashes, paths.features)


def _restore(cfg: RunConfig) -> tuple[Checkpoint, StzitdNetwork]:
    if cfg.checkpoint is None:
        raise ConfigError("--checkpoint is required")
    checkpoint = load_checkpoint(cfg.checkpoint)
    if checkpoint.config_hash and checkpoint.config_hash != cfg.model_hash():
        logger.warning("checkpoint was trained under a different configuration")
    network = checkpoint.restore()
    if network.horizon != cfg.window.horizon:
        raise ConfigError(
            f"checkpoint horizon {network.horizon} differs from window.horizon {cfg.window.horizon}"
        )
    return checkpoint, network


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Warnings and errors only")
def cli(verbose: bool, quiet: bool):
    """crashrisk-zitd: zero-inflated Tweedie graph networks for road crash risk."""
    configure_logging(verbose, quiet)


@cli.command("synth-gen")
@run_options
def synth_gen(config_path, overrides, seed, output_dir):
    """
    Generate a synthetic road network with known ZITD parameters.

    Writes edges.csv, crashes.csv, features.csv and true_params.csv.
    """
    try:
        cfg = parse_config(config_path, overrides, seed=seed, output_dir=output_dir)
        synthetic = synth_generate(cfg.synth)
        paths = write_synthetic(synthetic, cfg.output_dir)
        write_resolved(cfg)
        click.echo(
            f"✓ {cfg.synth.n_roads} roads x {cfg.synth.n_slots} slots, "
            f"zero fraction {synthetic.zero_fraction:.4f} "
            f"(expected {synthetic.expected_zero_fraction:.4f})"
        )
        for role, path in paths.items():
            click.echo(f"  {role}: {path}")
    except ZitdError as e:
        _fail(e)


@cli.command()
@run_options
@data_options
@click.option("--epochs", type=int, default=None, help="Override train.epochs")
def train(config_path, overrides, seed, output_dir, edges, crashes, features, epochs):
    """Train a network and write checkpoint.json and loss_history.csv."""
    try:
        cfg = parse_config(
            config_path, overrides, seed=seed, output_dir=output_dir, epochs=epochs,
            edges=edges, crashes=crashes, features=features,
        )
        dataset = _load(cfg)
        split = temporal_split(dataset.n_slots, cfg.window.split_ratio)
        network = StzitdNetwork(
            dataset.n_features, cfg.window.horizon, cfg.encoder, cfg.epsilon, seed=cfg.seed
        )
        write_resolved(cfg)
        click.echo(f"Training {network.n_parameters()} parameters on {dataset.n_roads} roads")
        try:
            result = train_loop(
                dataset, split, network, cfg.window, cfg.train, cfg.loss, cfg.model_hash()
            )
        except DivergenceError as e:
            if e.checkpoint is not None:
                save_checkpoint(e.checkpoint, cfg.output_path("checkpoint.json"))
            write_loss_history(e.history, cfg.output_path("loss_history.csv"))
            raise
        save_checkpoint(result.best, cfg.output_path("checkpoint.json"))
        write_loss_history(result.history, cfg.output_path("loss_history.csv"))
        click.echo(
            f"✓ best epoch {result.best.epoch}, validation NLL {result.best.validation_loss:.6f}"
            + (" (early stop)" if result.stopped_early else "")
        )
    except ZitdError as e:
        _fail(e)


@cli.command()
@run_options
@data_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="checkpoint.json")
@click.option("--block", type=click.Choice(["test", "validation"]), default="test",
              help="Block to score (default: test)")
def evaluate(config_path, overrides, seed, output_dir, edges, crashes, features, checkpoint, block):
    """Score a checkpoint on the test block against the HA baseline."""
    try:
        cfg = parse_config(
            config_path, overrides, seed=seed, output_dir=output_dir, checkpoint=checkpoint,
            edges=edges, crashes=crashes, features=features,
        )
        _, network = _restore(cfg)
        dataset = _load(cfg)
        split = temporal_split(dataset.n_slots, cfg.window.split_ratio)
        data = dataset.standardized(split)
        windows = split_windows(split, cfg.window)[block]
        predictions = predict_windows(network, data, windows, cfg.interval)

        y = predictions.y_true
        model = metric_report(y, predictions.mean, predictions.lower, predictions.upper,
                              predictions.p0, cfg.metrics)
        ha = ha_baseline(dataset.risk.values[:, split.train], cfg.window.horizon)
        baseline = baseline_report(y, np.broadcast_to(ha, y.shape), cfg.metrics)

        lower_bound, exact = [], []
        with no_grad():
            for w, truth in zip(windows, y):
                x, y_hist, _ = data.window_arrays(w)
                field = network(x, y_hist, data.graph)
                lower_bound.append(total_loss(truth, field, (), cfg.loss, reduction="mean").item())
                if exact is None:
                    continue
                try:
                    exact.append(exact_nll_field(truth, field, cfg.loss, cfg.series))
                except SeriesConvergenceError as e:
                    logger.warning("exact NLL unavailable: %s", e)
                    exact = None
        summary = EvaluationSummary(
            model=model,
            baseline_ha=baseline,
            nll={
                "lower_bound": float(np.mean(lower_bound)),
                "exact": None if exact is None else float(np.mean(exact)),
            },
            n_windows=len(windows),
            block=block,
        )
        write_resolved(cfg)
        write_report(summary, cfg.output_dir)
        write_predictions(predictions, cfg.output_path("predictions.csv"))
        for name, value in model.overall().items():
            shown = "undefined" if value is None else f"{value:.4f}"
            click.echo(f"  {name:>6}: {shown}")
        click.echo(f"✓ {len(windows)} windows scored; MAE {model.mae:.4f} vs HA {baseline.mae:.4f}")
    except ZitdError as e:
        _fail(e)


@cli.command()
@run_options
@data_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="checkpoint.json")
def predict(config_path, overrides, seed, output_dir, edges, crashes, features, checkpoint):
    """Forecast the horizon after the last slot of the data."""
    try:
        cfg = parse_config(
            config_path, overrides, seed=seed, output_dir=output_dir, checkpoint=checkpoint,
            edges=edges, crashes=crashes, features=features,
        )
        _, network = _restore(cfg)
        dataset = _load(cfg)
        split = temporal_split(dataset.n_slots, cfg.window.split_ratio)
        predictions = forecast(network, dataset.standardized(split), cfg.window.history, cfg.interval)
        write_resolved(cfg)
        path = write_predictions(predictions, cfg.output_path("predictions.csv"))
        click.echo(f"✓ forecast written to {path}")
    except ZitdError as e:
        _fail(e)


@cli.command("dist-check")
@click.option("--samples", type=int, default=100_000, help="Monte Carlo draws per moment check")
@click.option("--seed", type=int, default=0, help="Seed of the Monte Carlo draws")
def dist_check(samples: int, seed: int):
    """Run the distribution acceptance suite and print PASS or FAIL."""
    try:
        if samples < 2:
            raise ContractError("--samples must be at least 2")
        report = run_dist_check(samples, seed)
        for result in report.results:
            mark = "✓" if result.passed else "✗"
            click.echo(f"{mark} {result.name}: {result.detail}")
        click.echo("PASS" if report.passed else "FAIL")
        if not report.passed:
            sys.exit(EXIT_NUMERIC)
    except ZitdError as e:
        _fail(e)


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
