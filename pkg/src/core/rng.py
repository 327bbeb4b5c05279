# =============================================================
# src/core/rng.py
#
# Every random draw in a run comes from a numpy Generator
# derived from (seed, stream, ids...). Nothing touches the
# global numpy RNG.
#
# STREAMS:
#   PHI_INIT     → initial sub-policy weights (one per run)
#   WORKER       → a worker's action sampling + minibatch
#                  shuffles, keyed by (group, worker)
#   GROUP_TASK   → task draws for a group (shared by its workers)
#   GROUP_THETA  → master re-initialisation for a group
#   EVAL_TASK    → held-out tasks for adaptation / baselines
#   EVAL_WORKER  → rollouts during adaptation, keyed by (task, worker)
#   EVAL_THETA   → fresh master / flat policy per held-out task
#
# Keying by explicit ids (not by creation order) is what lets
# the threaded harness and the sequential loop draw the exact
# same numbers.
# =============================================================

import numpy as np

PHI_INIT    = 0
WORKER      = 1
GROUP_TASK  = 2
GROUP_THETA = 3
EVAL_TASK   = 4
EVAL_WORKER = 5
EVAL_THETA  = 6


def stream(seed: int, kind: int, *ids: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(kind), *(int(i) for i in ids)])
