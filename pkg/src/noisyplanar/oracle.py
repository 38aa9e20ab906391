"""Ground-truth function evaluation, kept apart from all protocol code."""

from __future__ import annotations

from .geometry import NetworkInstance

__all__ = ["oracle"]


def oracle(instance: NetworkInstance, protocol: str) -> int:
    """The true function value computed directly from the data bits."""
    if protocol == "max":
        return int(instance.bits.max())
    if protocol == "hist":
        return int(instance.bits.sum())
    raise ValueError(f"unknown protocol {protocol!r}")
