"""Command-line front end: ``python -m matnet <verb> ...``.

Flags set defaults; a ``--config`` file overrides them. Library errors exit
with their own code (2 bad input, 3 degenerate data, 1 otherwise).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import click

from matnet import logs
from matnet.analysis import analyze, whiten_dataset
from matnet.config import AnalysisConfig, AnalysisMode, ExperimentKind, Method, PRESETS, load_config
from matnet.errors import MatnetError
from matnet.export import ExportFormat, export_network
from matnet.harness import run_experiment
from matnet.ingest import load_dataset
from matnet.reports import write_json, write_report
from matnet.seed import seed_demo_dataset
from matnet.simulate import ModelKind
from matnet.tuning import LambdaPolicy, select_tuning

logger = logging.getLogger(__name__)


class MatnetGroup(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except MatnetError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


def _choice(enum_cls):
    return click.Choice([e.value for e in enum_cls])


def _emit(doc: Dict[str, Any], output: Optional[Path]) -> None:
    if output is not None:
        write_json(doc, output)
        click.echo(f"wrote {output}")
    else:
        click.echo(json.dumps(doc, indent=2))


def analysis_options(default_policy: LambdaPolicy, default_alpha: float):
    def decorator(func):
        options = [
            click.argument("data", type=click.Path(exists=True, path_type=Path)),
            click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
                         help="YAML file whose keys override the flags."),
            click.option("--mode", type=_choice(AnalysisMode), default=None,
                         help="Whiten with a known sigma_t (oracle) or the sample estimate."),
            click.option("--sigma-t", "sigma_t_path", type=click.Path(exists=True, path_type=Path),
                         help="Headerless CSV with the temporal covariance (oracle mode)."),
            click.option("--alpha", type=float, default=default_alpha, show_default=True),
            click.option("--lambda-policy", type=_choice(LambdaPolicy), default=default_policy.value, show_default=True),
            click.option("--kappa", type=float, default=2.0, show_default=True),
            click.option("--window", type=int, default=1, show_default=True,
                         help="Average this many consecutive time points first."),
            click.option("--group", default=None, help="Restrict to subjects of one group."),
            click.option("--n-jobs", type=int, default=None),
            click.option("--output", type=click.Path(dir_okay=False, path_type=Path), default=None),
        ]
        for option in reversed(options):
            func = option(func)
        return func
    return decorator


def _analysis_config(config_path, mode, sigma_t_path, alpha_global=None, alpha_fdr=None, **flags) -> AnalysisConfig:
    if mode is None:
        mode = AnalysisMode.ORACLE.value if sigma_t_path is not None else AnalysisMode.DATA_DRIVEN.value
    defaults = dict(flags, mode=mode, sigma_t_path=sigma_t_path, alpha_global=alpha_global, alpha_fdr=alpha_fdr)
    return load_config(config_path, defaults=defaults, cls=AnalysisConfig)


@click.group(cls=MatnetGroup)
@click.option("--log-level", default=None, help="Overrides MATNET_LOG_LEVEL.")
def cli(log_level):
    """Testing the spatial precision matrix of matrix-normal data."""
    logs.configure(log_level)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--experiment", type=_choice(ExperimentKind), default=None)
@click.option("-p", "--p", "p", type=int, default=None)
@click.option("-n", "--n", "n", type=int, default=None)
@click.option("-q", "--q", "q", type=int, default=None)
@click.option("--model", type=_choice(ModelKind), default=None)
@click.option("--alpha", "alphas", type=float, multiple=True)
@click.option("--reps", "replications", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--method", "methods", type=_choice(Method), multiple=True)
@click.option("--lambda-policy", type=_choice(LambdaPolicy), default=None)
@click.option("--kappa", type=float, default=None)
@click.option("--rho-t", type=float, default=None)
@click.option("--power-c", type=float, default=None)
@click.option("--n-jobs", type=int, default=None)
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--dataset", "dataset_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Write one simulated dataset as subject CSVs instead of running an experiment.")
def simulate(config_path, preset, dataset_dir, alphas, methods, **flags):
    """Run a size/power or FDR experiment and write its report."""
    defaults = dict(flags, alphas=list(alphas) or None, methods=list(methods) or None)
    cfg = load_config(config_path, defaults=defaults, preset=preset)
    if dataset_dir is not None:
        model = None if cfg.experiment is ExperimentKind.GLOBAL_SIZE else cfg.model
        written = seed_demo_dataset(dataset_dir, model=model, p=cfg.p, q=cfg.q, n=cfg.n, seed=cfg.seed, rho_t=cfg.rho_t)
        click.echo(f"{'wrote' if written else 'kept existing'} dataset in {dataset_dir}")
        return
    report = run_experiment(cfg)
    paths = write_report(report, cfg.output_dir)
    click.echo(report.summary_frame().to_string(index=False))
    click.echo(f"report: {paths['json']}")


@cli.command("global-test")
@analysis_options(LambdaPolicy.KAPPA, 0.05)
def global_test_cmd(data, config_path, mode, sigma_t_path, alpha, output, **flags):
    """Test whether the spatial precision matrix is diagonal."""
    cfg = _analysis_config(config_path, mode, sigma_t_path, alpha_global=alpha, **flags)
    report = analyze(load_dataset(data), cfg)
    doc = report.global_result.to_dict()
    doc["argmax_nodes"] = [report.edges.label(k) for k in report.global_result.argmax_pair]
    _emit(doc, output)


@cli.command("fdr-test")
@analysis_options(LambdaPolicy.TUNED, 0.1)
def fdr_test_cmd(data, config_path, mode, sigma_t_path, alpha, output, **flags):
    """Select edges with false discovery rate control."""
    cfg = _analysis_config(config_path, mode, sigma_t_path, alpha_fdr=alpha, **flags)
    report = analyze(load_dataset(data), cfg)
    _emit(report.to_dict()["fdr_test"], output)


@cli.command()
@analysis_options(LambdaPolicy.TUNED, 0.1)
def tune(data, config_path, mode, sigma_t_path, alpha, output, **flags):
    """Choose the node-wise penalties by matching normal tail counts."""
    cfg = _analysis_config(config_path, mode, sigma_t_path, **flags)
    dataset = load_dataset(data).select_group(cfg.group).downsample(cfg.window)
    w = whiten_dataset(dataset, cfg)
    result = select_tuning(w, n_jobs=cfg.n_jobs, node_labels=dataset.node_labels)
    _emit({
        "b_hat": result.b_hat,
        "lambdas": dict(zip(dataset.node_labels, result.lambdas.tolist())),
        "objective": result.objective.tolist(),
    }, output)


@cli.command("analyze")
@analysis_options(LambdaPolicy.TUNED, 0.1)
@click.option("--alpha-global", type=float, default=0.05, show_default=True)
@click.option("--top-k", type=int, default=None, help="Report only the k most significant pairs.")
def analyze_cmd(data, config_path, mode, sigma_t_path, alpha, alpha_global, output, **flags):
    """Run both tests and rank all pairs."""
    cfg = _analysis_config(config_path, mode, sigma_t_path, alpha_global=alpha_global, alpha_fdr=alpha, **flags)
    report = analyze(load_dataset(data), cfg)
    _emit(report.to_dict(top_k=cfg.top_k), output)


@cli.command("export")
@analysis_options(LambdaPolicy.TUNED, 0.1)
@click.option("--format", "fmt", type=_choice(ExportFormat), default=ExportFormat.CSV.value, show_default=True)
@click.option("--top-k", type=int, default=None)
def export_cmd(data, config_path, mode, sigma_t_path, alpha, output, fmt, **flags):
    """Write the ranked edge list as json, dot or csv."""
    cfg = _analysis_config(config_path, mode, sigma_t_path, alpha_fdr=alpha, **flags)
    report = analyze(load_dataset(data), cfg)
    target = output or Path(f"edges.{fmt}")
    export_network(report.edges, fmt, target, top_k=cfg.top_k)
    click.echo(f"wrote {target}")


def main():
    cli(prog_name="matnet")
