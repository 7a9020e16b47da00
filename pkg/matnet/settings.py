"""Process-level settings read from the environment (and an optional .env)."""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

OUTPUT_DIR = Path(os.getenv("MATNET_OUTPUT_DIR", "runs"))
N_JOBS = int(os.getenv("MATNET_N_JOBS", "1"))
LOG_LEVEL = os.getenv("MATNET_LOG_LEVEL", "INFO").upper()

# relative to the largest eigenvalue
EIG_FLOOR = float(os.getenv("MATNET_EIG_FLOOR", "1e-10"))
MAX_KRON_DIM = int(os.getenv("MATNET_MAX_KRON_DIM", "20000"))

API_KEY = os.getenv("MATNET_API_KEY")
DEMO_MODE = os.getenv("MATNET_DEMO_MODE", "false").lower() == "true"
DEMO_DATA_DIR = Path(os.getenv("MATNET_DEMO_DATA_DIR", "demo_data"))
CORS_ORIGINS = [o.strip() for o in os.getenv("MATNET_CORS_ORIGINS", "").split(",") if o.strip()]
