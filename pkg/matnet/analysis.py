"""End-to-end analysis of a recorded dataset: whitening, penalty choice, node
regressions, both tests, and the ranked edge list."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from matnet.config import AnalysisConfig, AnalysisMode
from matnet.errors import InvalidInputError
from matnet.export import EdgeList, edge_list, network_summary
from matnet.inference import FdrResult, GlobalTestResult, fdr_threshold, global_test
from matnet.ingest import Dataset, read_matrix_csv
from matnet.reports import SCHEMA_VERSION
from matnet.statistics import PairStatistics, fit_nodes, pair_statistics
from matnet.tuning import LambdaPolicy, kappa_lambdas, select_tuning
from matnet.whiten import WhitenedData, whiten_data_driven, whiten_oracle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InferenceReport:
    global_result: GlobalTestResult
    fdr_result: FdrResult
    edges: EdgeList
    stats: PairStatistics
    n: int
    p: int
    q: int
    mode: str
    lambda_policy: str
    b_hat: Optional[int] = None
    group: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def selected_edges(self) -> EdgeList:
        """The ranked edges restricted to the FDR-selected pairs."""
        chosen = {(r.i, r.j) for r in self.fdr_result.rejected}
        return EdgeList([e for e in self.edges.entries if (e.i, e.j) in chosen], self.edges.node_labels)

    def to_dict(self, top_k: Optional[int] = None) -> Dict[str, Any]:
        labels = self.edges.node_labels
        ranked = self.edges.top(top_k)
        fdr = self.fdr_result.to_dict()
        for item in fdr["rejected"]:
            item["node_i"], item["node_j"] = labels[item["i"]], labels[item["j"]]
        glob = self.global_result.to_dict()
        glob["argmax_nodes"] = [labels[k] for k in self.global_result.argmax_pair]
        return {
            "schema_version": SCHEMA_VERSION,
            "dimensions": {"n": self.n, "p": self.p, "q": self.q},
            "mode": self.mode,
            "group": self.group,
            "lambda_policy": self.lambda_policy,
            "b_hat": self.b_hat,
            "global_test": glob,
            "fdr_test": fdr,
            "network": network_summary(self.selected_edges()),
            "edges": ranked.to_frame().to_dict(orient="records"),
            "warnings": list(self.warnings),
        }


def whiten_dataset(dataset: Dataset, config: AnalysisConfig, sigma_t: Optional[np.ndarray] = None) -> WhitenedData:
    x = dataset.to_sample()
    if config.mode is AnalysisMode.ORACLE:
        if sigma_t is None:
            if config.sigma_t_path is None:
                raise InvalidInputError("oracle mode needs a temporal covariance")
            sigma_t = read_matrix_csv(config.sigma_t_path)
        return whiten_oracle(x, sigma_t)
    return whiten_data_driven(x)


def analyze(dataset: Dataset, config: Optional[AnalysisConfig] = None, sigma_t: Optional[np.ndarray] = None) -> InferenceReport:
    config = config or AnalysisConfig()
    data = dataset.select_group(config.group).downsample(config.window)
    if data.n < 2:
        raise InvalidInputError(f"analysis needs at least 2 subjects, got {data.n}")
    labels = data.node_labels
    logger.info("[analyze] n=%d p=%d q=%d mode=%s policy=%s", data.n, data.p, data.q,
                config.mode.value, config.lambda_policy.value)

    w = whiten_dataset(data, config, sigma_t)
    b_hat = None
    if config.lambda_policy is LambdaPolicy.TUNED:
        tuned = select_tuning(w, n_jobs=config.n_jobs, node_labels=labels)
        lambdas, b_hat = tuned.lambdas, tuned.b_hat
    else:
        lambdas = kappa_lambdas(w, config.kappa)
    reg = fit_nodes(w, lambdas, n_jobs=config.n_jobs, node_labels=labels)
    stats = pair_statistics(reg, node_labels=labels)

    return InferenceReport(
        global_result=global_test(stats, data.p, config.alpha_global),
        fdr_result=fdr_threshold(stats, data.p, config.alpha_fdr),
        edges=edge_list(stats, labels),
        stats=stats,
        n=data.n,
        p=data.p,
        q=data.q,
        mode=config.mode.value,
        lambda_policy=config.lambda_policy.value,
        b_hat=b_hat,
        group=config.group,
        warnings=list(data.warnings) + list(w.warnings) + list(reg.warnings),
    )
