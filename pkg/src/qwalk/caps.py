"""Dimension caps shared by the simulators.

``WALK_MAX_DIM`` in the environment can lower any cap; it never raises one.
"""

from __future__ import annotations

import os

from .errors import SizeError, ValidationError

PROPAGATION_MAX_STATES = 1 << 20
COIN_WALK_MAX_DIM = 1 << 22
DENSE_MAX_DIM = 1 << 12
QFT_MAX_QUBITS = 12
PI3_MAX_DEPTH = 12
BETA_MAX = 1e6

ENV_VAR = "WALK_MAX_DIM"


def env_cap():
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return value


def effective_cap(hard_cap: int) -> int:
    override = env_cap()
    return hard_cap if override is None else min(hard_cap, override)


def require_dim(dim: int, hard_cap: int, what: str = "dimension") -> None:
    cap = effective_cap(hard_cap)
    if dim > cap:
        raise SizeError(f"{what} {dim} exceeds cap {cap}")
