"""Input validation helpers for binary label data.

Centralizes the 0/1 checks used by loaders, the footprint builder and the
sklearn-style estimators so every entry point rejects the same inputs the
same way.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .exceptions import DegenerateInputError, ParameterError


def as_binary_array(values, *, ndim: int | None = None, name: str = "labels") -> np.ndarray:
    """Convert to a read-only uint8 array of 0/1, rejecting anything else.

    Raises ValueError naming the offending entry (row/column, 1-indexed) so
    loader errors point at the file location.
    """
    arr = np.asarray(values)
    if arr.size == 0 and arr.ndim == 1:
        arr = arr.reshape(0).astype(np.uint8)
    if ndim is not None and arr.ndim != ndim:
        raise ParameterError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.ndim not in (1, 2):
        raise ParameterError(f"{name} must be a vector or matrix, got shape {arr.shape}")
    if arr.dtype.kind not in "iufb":
        raise ValueError(f"{name} must be numeric 0/1 values, got dtype {arr.dtype}")
    bad = (arr != 0) & (arr != 1)
    if bad.any():
        idx = np.argwhere(bad)[0]
        if arr.ndim == 2:
            raise ValueError(
                f"non-binary value {arr[tuple(idx)]!r} in {name} at row {idx[0] + 1} col {idx[1] + 1}"
            )
        raise ValueError(f"non-binary value {arr[idx[0]]!r} in {name} at row {idx[0] + 1} col 1")
    out = arr.astype(np.uint8, copy=True)
    out.flags.writeable = False
    return out


def check_binary_matrix(X, *, allow_zero_rows: bool = True, name: str = "X") -> np.ndarray:
    """Validate a 2-D binary matrix for clustering; returns a read-only uint8 copy."""
    M = as_binary_array(X, ndim=2, name=name)
    if M.shape[0] == 0 or M.shape[1] == 0:
        raise DegenerateInputError(f"{name} has shape {M.shape}; need at least one row and column")
    if not M.any():
        raise DegenerateInputError(f"{name} is all-zero")
    if not allow_zero_rows and not M.any(axis=1).all():
        row = int(np.flatnonzero(~M.any(axis=1))[0])
        raise DegenerateInputError(f"{name} row {row} is all-zero")
    return M


def check_unique_names(names: Sequence[str], *, name: str = "feature_names") -> tuple[str, ...]:
    """Require unique, non-empty names; returns them as a tuple."""
    out = tuple(str(n) for n in names)
    seen: dict[str, int] = {}
    for i, n in enumerate(out):
        if n in seen:
            raise ValueError(f"duplicate entry {n!r} in {name} (columns {seen[n] + 1} and {i + 1})")
        seen[n] = i
    return out


def check_range(value: int, lo: int, hi: int, label: str) -> int:
    """Validate an inclusive integer range membership."""
    value = int(value)
    if not lo <= value <= hi:
        raise ParameterError(f"{label} must be in [{lo}, {hi}], got {value}")
    return value
