"""Worker-count policy shared by the sweep and Monte Carlo drivers."""

import os

from .errors import DomainError


def default_workers() -> int:
    """Worker count from ``RDPP_THREADS``, else the machine width."""
    raw = os.environ.get("RDPP_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"RDPP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"RDPP_THREADS must be a positive integer, got {raw!r}")
    return n


def resolve_workers(workers=None) -> int:
    return default_workers() if workers is None else max(1, int(workers))
