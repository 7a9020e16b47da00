"""Experiment and analysis configuration.

Both configs are pydantic models. ``load_config`` reads a flat ``key: value``
file with PyYAML; values given there override whatever the caller passes as
defaults (the CLI passes its flags).
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from matnet import settings
from matnet.errors import InvalidParameterError
from matnet.simulate import ModelKind
from matnet.tuning import LambdaPolicy


class ExperimentKind(str, Enum):
    GLOBAL_SIZE = "global_size"
    GLOBAL_POWER = "global_power"
    GLOBAL_POWER_CLASS = "global_power_class"
    FDR = "fdr"

    @property
    def is_global(self) -> bool:
        return self is not ExperimentKind.FDR


class Method(str, Enum):
    ORACLE = "oracle"
    DATA_DRIVEN = "data_driven"
    VECTOR_NORMAL = "vector_normal"


def _check_levels(levels: List[float]) -> List[float]:
    if not levels:
        raise ValueError("at least one alpha level is required")
    for a in levels:
        if not 0.0 < a < 1.0:
            raise ValueError(f"alpha levels must lie in (0, 1), got {a}")
    return sorted(set(levels))


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

    experiment: ExperimentKind = ExperimentKind.GLOBAL_SIZE
    p: int = Field(50, ge=3)
    n: int = Field(30, ge=2)
    q: int = Field(20, ge=1)
    model: ModelKind = ModelKind.MODEL1
    alphas: List[float] = Field(default_factory=lambda: [0.05])
    replications: int = Field(500, ge=1)
    seed: int = Field(20240101, ge=0, lt=2**64)
    methods: List[Method] = Field(default_factory=lambda: list(Method))
    lambda_policy: Optional[LambdaPolicy] = None
    kappa: float = Field(2.0, gt=0)
    rho_t: float = Field(0.4, gt=-1, lt=1)
    power_c: float = Field(4.0, gt=0)
    n_jobs: int = Field(default_factory=lambda: settings.N_JOBS)
    output_dir: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)

    @field_validator("alphas")
    @classmethod
    def _check_alphas(cls, v: List[float]) -> List[float]:
        return _check_levels(v)

    @field_validator("methods")
    @classmethod
    def _unique_methods(cls, v: List[Method]) -> List[Method]:
        if not v:
            raise ValueError("at least one method is required")
        return list(dict.fromkeys(v))

    @model_validator(mode="after")
    def _check_dimensions(self) -> "ExperimentConfig":
        if self.experiment is ExperimentKind.GLOBAL_POWER and self.p < 8:
            raise ValueError("the global power alternative needs p >= 8")
        if self.experiment is ExperimentKind.FDR:
            if self.p < 4:
                raise ValueError("fdr models need p >= 4")
            if self.model is ModelKind.MODEL2 and self.p % 10:
                raise ValueError(f"model2 needs p divisible by 10, got {self.p}")
        return self

    @property
    def policy(self) -> LambdaPolicy:
        """Fixed kappa for the global test, tuned penalties for FDR unless set."""
        if self.lambda_policy is not None:
            return self.lambda_policy
        return LambdaPolicy.TUNED if self.experiment is ExperimentKind.FDR else LambdaPolicy.KAPPA

    def echo(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        data["lambda_policy"] = self.policy.value
        return data


class AnalysisMode(str, Enum):
    ORACLE = "oracle"
    DATA_DRIVEN = "data_driven"


class AnalysisConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: AnalysisMode = AnalysisMode.DATA_DRIVEN
    sigma_t_path: Optional[Path] = None
    alpha_global: float = Field(0.05, gt=0, lt=1)
    alpha_fdr: float = Field(0.1, gt=0, lt=1)
    lambda_policy: LambdaPolicy = LambdaPolicy.TUNED
    kappa: float = Field(2.0, gt=0)
    window: int = Field(1, ge=1)
    group: Optional[str] = None
    top_k: Optional[int] = Field(None, ge=1)
    n_jobs: int = Field(default_factory=lambda: settings.N_JOBS)


PRESETS: Dict[str, Dict[str, Any]] = {
    "table1-small": {"experiment": "global_power", "p": 50, "n": 30, "q": 20, "alphas": [0.05], "replications": 500},
    "table1-large": {"experiment": "global_power", "p": 50, "n": 50, "q": 30, "alphas": [0.05], "replications": 500},
    "fdr-small": {
        "experiment": "fdr", "p": 50, "n": 20, "q": 20, "model": "model1",
        "alphas": [0.01, 0.1], "replications": 100,
    },
    "fdr-large": {
        "experiment": "fdr", "p": 50, "n": 50, "q": 30, "model": "model1",
        "alphas": [0.01, 0.1], "replications": 100,
    },
}


def build_config(values: Dict[str, Any], cls=ExperimentConfig):
    """Validate ``values``; pydantic errors become :class:`InvalidParameterError`."""
    try:
        return cls(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(x) for x in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
        )
        raise InvalidParameterError(f"invalid configuration: {problems}") from exc


def read_config_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise InvalidParameterError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise InvalidParameterError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidParameterError(f"config file {path} must hold key: value pairs")
    return data


def load_config(
    path: Optional[Path] = None,
    defaults: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
    cls=ExperimentConfig,
):
    """Merge preset < defaults < file, then validate."""
    values: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise InvalidParameterError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    values.update({k: v for k, v in (defaults or {}).items() if v is not None})
    if path is not None:
        values.update(read_config_file(path))
    return build_config(values, cls)
