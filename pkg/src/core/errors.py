# =============================================================
# src/core/errors.py
#
# One exception tree for the whole package.
#
# The CLI maps these onto exit codes (see src/cli/common.py):
#   ConfigError                         → exit 1
#   DiagnosticsError / WorkerFailure /
#   TrainingAborted                     → exit 2
#
# ContractViolation also subclasses ValueError and
# DiagnosticsError subclasses ArithmeticError, so code that
# only knows the builtin categories still catches them.
# =============================================================

from typing import Any, Optional


class MlshError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(MlshError, ValueError):
    """A caller broke a precondition: wrong shape, bad index, missing state."""


class DiagnosticsError(MlshError, ArithmeticError):
    """
    Non-finite numbers showed up in a loss or gradient.
    `context` carries whatever locates the failure
    (minibatch index, epoch, group id...).
    """

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        self.context = dict(context or {})
        if self.context:
            details = " ".join(f"{k}={v}" for k, v in self.context.items())
            message = f"{message} | {details}"
        super().__init__(message)


class ConfigError(MlshError):
    """Bad experiment config, unknown name, or mismatched artifact."""


class WorkerFailure(MlshError):
    """A worker raised inside a barrier step. Nothing from that step was applied."""

    def __init__(self, worker_id: tuple[int, int], cause: BaseException):
        self.worker_id = worker_id
        self.cause = cause
        super().__init__(
            f"worker group={worker_id[0]} index={worker_id[1]} failed: {cause!r}"
        )


class TrainingAborted(MlshError):
    """meta_loop stopped on a numerical failure after saving the last good φ."""

    def __init__(self, message: str, checkpoint_path: Optional[str] = None):
        self.checkpoint_path = checkpoint_path
        super().__init__(message)
