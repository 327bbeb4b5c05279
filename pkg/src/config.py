# =============================================================
# src/config.py
# Single source of truth for process-level settings.
#
# Experiment hyperparameters (K, N, W, U, PPO knobs...) do NOT
# live here. They belong to the experiment config file
# (src/schemas/experiment.py) so a run can be snapshot and
# replayed. This file only holds how the process runs:
# log level, thread pool size, where outputs go.
# =============================================================

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):

    # ── APP ────────────────────────────────────────────────────
    APP_ENV:     str = "development"
    LOG_LEVEL:   str = "INFO"

    # ── WORKER HARNESS ─────────────────────────────────────────
    # Threads used to run group workers between barriers.
    # 1 forces the plain sequential schedule (same results,
    # bit for bit; only wall-clock changes).
    MAX_WORKERS: int = 4

    # ── OUTPUTS ────────────────────────────────────────────────
    # Default parent directory for run folders when --out is
    # not given on the command line.
    OUTPUT_ROOT: str = "runs"

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore",
    )


settings = Settings()
