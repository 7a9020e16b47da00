"""Monte-Carlo experiments for the global test and the FDR edge test.

Replication ``r`` draws its model from stream ``(seed, r, 0)`` and its samples
from ``(seed, r, 1)`` (null) and ``(seed, r, 2)`` (alternative); every method
sees the same sampled data. Replications run in parallel with joblib and are
reduced in replication order, so a config reproduces its aggregates exactly.
"""

from __future__ import annotations

import logging
import math
import time
from typing import Dict, List

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from matnet.config import ExperimentConfig, ExperimentKind, Method
from matnet.errors import InvalidParameterError
from matnet.inference import centering, fdr_threshold, global_test, gumbel_ks_distance
from matnet.reports import ExperimentReport, RateSummary
from matnet.rng import Rng
from matnet.simulate import (
    KroneckerModel,
    SpatioTemporalSample,
    build_global_alternative,
    build_model,
    build_power_class_alternative,
    null_spatial,
    sample_matrix_normal,
    temporal_model,
)
from matnet.statistics import PairStatistics
from matnet.tuning import LambdaPolicy, compute_statistics
from matnet.whiten import WhitenedData, no_whitening, whiten_data_driven, whiten_oracle

logger = logging.getLogger(__name__)

NULL_STREAM, ALT_STREAM = 1, 2


def vector_normal_baseline(
    x: SpatioTemporalSample,
    policy: LambdaPolicy = LambdaPolicy.KAPPA,
    kappa: float = 2.0,
) -> PairStatistics:
    """The same pipeline on the raw columns, treated as ``n q`` independent p-vectors."""
    stats, _ = compute_statistics(no_whitening(x), policy=policy, kappa=kappa, n_jobs=1)
    return stats


def _whiten(x: SpatioTemporalSample, method: Method, sigma_t: np.ndarray) -> WhitenedData:
    if method is Method.ORACLE:
        return whiten_oracle(x, sigma_t)
    if method is Method.DATA_DRIVEN:
        return whiten_data_driven(x)
    return no_whitening(x)


def method_statistics(
    x: SpatioTemporalSample,
    method: Method,
    sigma_t: np.ndarray,
    policy: LambdaPolicy,
    kappa: float,
) -> PairStatistics:
    stats, _ = compute_statistics(_whiten(x, method, sigma_t), policy=policy, kappa=kappa, n_jobs=1)
    return stats


def _global_rows(cfg: ExperimentConfig, rep: int, scenario: str, x, sigma_t) -> List[dict]:
    rows = []
    shift = centering(cfg.p)
    for method in cfg.methods:
        stats = method_statistics(x, method, sigma_t, cfg.policy, cfg.kappa)
        for alpha in cfg.alphas:
            res = global_test(stats, cfg.p, alpha)
            rows.append({
                "replication": rep,
                "scenario": scenario,
                "method": method.value,
                "alpha": alpha,
                "reject": int(res.reject),
                "m_stat": res.m_stat,
                "centered": res.m_stat - shift,
                "p_value": res.p_value,
            })
    return rows


def _alternative_precision(cfg: ExperimentConfig, rng: Rng) -> np.ndarray:
    if cfg.experiment is ExperimentKind.GLOBAL_POWER_CLASS:
        return build_power_class_alternative(cfg.p, cfg.n, cfg.q, cfg.power_c, rng)
    return build_global_alternative(cfg.p, cfg.n, cfg.q, rng)


def replicate_global(cfg: ExperimentConfig, rep: int) -> List[dict]:
    """One replication: the null sample always, the alternative for power runs."""
    base = Rng(cfg.seed).spawn(rep)
    sigma_t = temporal_model(cfg.q, cfg.rho_t)
    null_model = KroneckerModel.from_precision(null_spatial(cfg.p), sigma_t)
    rows = _global_rows(cfg, rep, "null", sample_matrix_normal(null_model, cfg.n, base.spawn(NULL_STREAM)), sigma_t)
    if cfg.experiment is not ExperimentKind.GLOBAL_SIZE:
        omega = _alternative_precision(cfg, base.spawn(0))
        alt_model = KroneckerModel.from_precision(omega, sigma_t)
        x = sample_matrix_normal(alt_model, cfg.n, base.spawn(ALT_STREAM))
        rows += _global_rows(cfg, rep, "alternative", x, sigma_t)
    return rows


def replicate_fdr(cfg: ExperimentConfig, rep: int) -> List[dict]:
    base = Rng(cfg.seed).spawn(rep)
    sigma_t = temporal_model(cfg.q, cfg.rho_t)
    model = KroneckerModel.from_precision(build_model(cfg.model, cfg.p, base.spawn(0)), sigma_t)
    x = sample_matrix_normal(model, cfg.n, base.spawn(NULL_STREAM))
    truth = model.edges()
    n_true = int(truth.sum())

    rows = []
    for method in cfg.methods:
        stats = method_statistics(x, method, sigma_t, cfg.policy, cfg.kappa)
        for alpha in cfg.alphas:
            res = fdr_threshold(stats, cfg.p, alpha)
            hits = int(np.sum(res.rejected_mask(cfg.p) & truth))
            n_rej = len(res.rejected)
            rows.append({
                "replication": rep,
                "scenario": "alternative",
                "method": method.value,
                "alpha": alpha,
                "n_rejected": n_rej,
                "true_positives": hits,
                "fdp": (n_rej - hits) / max(n_rej, 1),
                "tpp": hits / n_true if n_true else math.nan,
                "t_hat": res.t_hat,
                "t_hat_capped": int(res.t_hat_capped),
            })
    return rows


def _run_replications(cfg: ExperimentConfig, worker) -> pd.DataFrame:
    if cfg.n_jobs == 1:
        chunks = [worker(cfg, rep) for rep in range(cfg.replications)]
    else:
        chunks = Parallel(n_jobs=cfg.n_jobs)(delayed(worker)(cfg, rep) for rep in range(cfg.replications))
    frame = pd.DataFrame([row for chunk in chunks for row in chunk])
    return frame.sort_values(["replication", "scenario", "method", "alpha"], kind="stable").reset_index(drop=True)


def binomial_se(rate: float, reps: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / reps)


def _summaries(frame: pd.DataFrame, column: str, metric_by_scenario: Dict[str, str]) -> List[RateSummary]:
    out = []
    for (scenario, method, alpha), group in frame.groupby(["scenario", "method", "alpha"], sort=True):
        values = group[column].dropna()
        rate = float(values.mean()) if len(values) else None
        out.append(RateSummary(
            scenario=scenario,
            metric=metric_by_scenario[scenario],
            method=method,
            alpha=float(alpha),
            rate=rate,
            se=None if rate is None else binomial_se(rate, len(values)),
            replications=int(len(group)),
        ))
    return out


def dominance_violations(aggregates: List[RateSummary]) -> List[str]:
    """Pairs where a method's power falls below its own size at the same level."""
    size = {(a.method, a.alpha): a.rate for a in aggregates if a.metric == "size"}
    found = []
    for a in aggregates:
        if a.metric != "power" or (a.method, a.alpha) not in size or a.rate is None:
            continue
        if a.rate < size[(a.method, a.alpha)]:
            found.append(f"{a.method} at alpha={a.alpha}: power {a.rate:.3f} < size {size[(a.method, a.alpha)]:.3f}")
    return found


def run_global_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if not cfg.experiment.is_global:
        raise InvalidParameterError(f"{cfg.experiment.value} is not a global-test experiment")
    logger.info("[harness] %s: p=%d n=%d q=%d reps=%d methods=%s",
                cfg.experiment.value, cfg.p, cfg.n, cfg.q, cfg.replications, [m.value for m in cfg.methods])
    start = time.perf_counter()
    frame = _run_replications(cfg, replicate_global)
    aggregates = _summaries(frame, "reject", {"null": "size", "alternative": "power"})

    null_rows = frame[(frame["scenario"] == "null") & (frame["alpha"] == cfg.alphas[0])]
    ks = {
        method: gumbel_ks_distance(group["centered"].to_numpy())
        for method, group in null_rows.groupby("method", sort=True)
    }
    violations = dominance_violations(aggregates)
    for msg in violations:
        logger.warning("[harness] dominance violated: %s", msg)

    elapsed = time.perf_counter() - start
    logger.info("[harness] %s finished in %.1fs", cfg.experiment.value, elapsed)
    report = ExperimentReport(
        experiment=cfg.experiment.value,
        seed=cfg.seed,
        config=cfg.echo(),
        wall_clock_seconds=elapsed,
        aggregates=aggregates,
        gumbel_ks=ks,
        dominance_violations=violations,
    )
    return report.attach_outcomes(frame)


def run_fdr_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment is not ExperimentKind.FDR:
        raise InvalidParameterError(f"{cfg.experiment.value} is not an fdr experiment")
    logger.info("[harness] fdr: %s p=%d n=%d q=%d reps=%d policy=%s",
                cfg.model.value, cfg.p, cfg.n, cfg.q, cfg.replications, cfg.policy.value)
    start = time.perf_counter()
    frame = _run_replications(cfg, replicate_fdr)
    aggregates = _summaries(frame, "fdp", {"alternative": "fdr"})
    aggregates += _summaries(frame, "tpp", {"alternative": "power"})

    warnings = []
    capped = int(frame["t_hat_capped"].sum())
    if capped:
        warnings.append(f"threshold fell back to 2 sqrt(log p) in {capped} of {len(frame)} runs")
    if frame["tpp"].isna().any():
        warnings.append("some replications had no true edges; their power is excluded")

    elapsed = time.perf_counter() - start
    logger.info("[harness] fdr finished in %.1fs", elapsed)
    report = ExperimentReport(
        experiment=cfg.experiment.value,
        seed=cfg.seed,
        config=cfg.echo(),
        wall_clock_seconds=elapsed,
        aggregates=aggregates,
        warnings=warnings,
    )
    return report.attach_outcomes(frame)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment is ExperimentKind.FDR:
        return run_fdr_experiment(cfg)
    return run_global_experiment(cfg)

