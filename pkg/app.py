from contextlib import asynccontextmanager
from typing import List, Optional
import os

import numpy as np
from fastapi import FastAPI, HTTPException, Security
from fastapi.middleware.cors import CORSMiddleware
from fastapi.security.api_key import APIKeyHeader
from pydantic import BaseModel, Field

from matnet import __version__, logs, settings
from matnet.analysis import analyze
from matnet.config import AnalysisConfig, AnalysisMode, build_config
from matnet.errors import MatnetError
from matnet.ingest import Dataset, SubjectRecord, load_dataset, read_matrix_csv
from matnet.seed import SIGMA_T_FILE, SUBJECT_DIR, seed_demo_dataset
from matnet.tuning import LambdaPolicy

# =========================
# App setup
# =========================
@asynccontextmanager
async def lifespan(app: FastAPI):
    logs.configure()
    if settings.DEMO_MODE:
        seed_demo_dataset(settings.DEMO_DATA_DIR)
    yield

app = FastAPI(
    title="matnet API",
    version=__version__,
    description="Global and FDR-controlled tests of the spatial precision matrix of matrix-normal data.",
    lifespan=lifespan,
)

# =========================
# CORS
# =========================
origins = settings.CORS_ORIGINS or [
    "http://localhost:3000",
    "http://127.0.0.1:3000",
    "http://localhost:8000",
    "http://127.0.0.1:8000",
]
app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# =========================
# API Key Guard
# =========================
api_key_header = APIKeyHeader(name="X-Api-Key", auto_error=False)

def require_api_key(x_api_key: str = Security(api_key_header)):
    """Open when MATNET_API_KEY is unset."""
    if not settings.API_KEY:
        return True
    if not x_api_key or x_api_key != settings.API_KEY:
        raise HTTPException(403, "Forbidden")
    return True

# =========================
# Payloads
# =========================
class SubjectIn(BaseModel):
    id: str
    matrix: List[List[float]]  # p rows (locations) x q columns (time points)
    group: Optional[str] = None

class AnalysisIn(BaseModel):
    subjects: List[SubjectIn] = Field(..., min_length=2)
    node_labels: Optional[List[str]] = None
    mode: AnalysisMode = AnalysisMode.DATA_DRIVEN
    sigma_t: Optional[List[List[float]]] = None
    alpha_global: float = Field(0.05, gt=0, lt=1)
    alpha_fdr: float = Field(0.1, gt=0, lt=1)
    lambda_policy: Optional[LambdaPolicy] = None
    kappa: float = Field(2.0, gt=0)
    window: int = Field(1, ge=1)
    group: Optional[str] = None
    top_k: Optional[int] = Field(None, ge=1)

def _dataset(payload: AnalysisIn) -> Dataset:
    records = []
    for s in payload.subjects:
        try:
            matrix = np.asarray(s.matrix, dtype=float)
        except ValueError:
            matrix = np.empty(0)
        if matrix.ndim != 2:
            raise HTTPException(422, f"subject {s.id}: matrix must be a list of equal-length rows")
        records.append(SubjectRecord(id=s.id, matrix=matrix, group=s.group))
    p = records[0].p
    labels = payload.node_labels or [str(k) for k in range(p)]
    return Dataset(records=records, node_labels=labels)

def _run(payload: AnalysisIn, default_policy: LambdaPolicy):
    try:
        cfg = build_config({
            "mode": payload.mode,
            "alpha_global": payload.alpha_global,
            "alpha_fdr": payload.alpha_fdr,
            "lambda_policy": payload.lambda_policy or default_policy,
            "kappa": payload.kappa,
            "window": payload.window,
            "group": payload.group,
            "top_k": payload.top_k,
            "n_jobs": 1,
        }, AnalysisConfig)
        sigma_t = None if payload.sigma_t is None else np.asarray(payload.sigma_t, dtype=float)
        if cfg.mode is AnalysisMode.ORACLE and sigma_t is None:
            raise HTTPException(422, "oracle mode needs sigma_t")
        return analyze(_dataset(payload), cfg, sigma_t=sigma_t), cfg
    except MatnetError as exc:
        raise HTTPException(exc.http_status, str(exc))

# =========================
# Basic routes
# =========================
@app.get("/")
def root():
    return {"ok": True, "message": "matnet API running", "docs": "/docs"}

@app.get("/health")
def health():
    return {"ok": True, "version": __version__}

# =========================
# Test endpoints
# =========================
@app.post("/global-test", tags=["Tests"], dependencies=[Security(require_api_key)])
def global_test_route(payload: AnalysisIn):
    report, _ = _run(payload, LambdaPolicy.KAPPA)
    doc = report.to_dict()["global_test"]
    return {"ok": True, **doc}

@app.post("/fdr-test", tags=["Tests"], dependencies=[Security(require_api_key)])
def fdr_test_route(payload: AnalysisIn):
    report, _ = _run(payload, LambdaPolicy.TUNED)
    return {"ok": True, **report.to_dict()["fdr_test"]}

@app.post("/analyze", tags=["Tests"], dependencies=[Security(require_api_key)])
def analyze_route(payload: AnalysisIn):
    report, cfg = _run(payload, LambdaPolicy.TUNED)
    return report.to_dict(top_k=cfg.top_k)

# =========================
# Demo dataset
# =========================
@app.get("/demo/analyze", tags=["Demo"], dependencies=[Security(require_api_key)])
def demo_analyze(oracle: bool = False):
    """Analyze the seeded demo dataset (requires MATNET_DEMO_MODE)."""
    if not settings.DEMO_MODE:
        raise HTTPException(404, "Demo mode is off")
    root_dir = settings.DEMO_DATA_DIR
    try:
        dataset = load_dataset(root_dir / SUBJECT_DIR)
        sigma_t = read_matrix_csv(root_dir / SIGMA_T_FILE) if oracle else None
        cfg = AnalysisConfig(mode=AnalysisMode.ORACLE if oracle else AnalysisMode.DATA_DRIVEN, n_jobs=1)
        return analyze(dataset, cfg, sigma_t=sigma_t).to_dict(top_k=30)
    except MatnetError as exc:
        raise HTTPException(exc.http_status, str(exc))

# Entry
if __name__ == "__main__":
    import uvicorn
    uvicorn.run("app:app", host="0.0.0.0", port=int(os.getenv("PORT", "8000")), reload=True)
