"""Input checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DomainError
from .processor import RangeCompressed, SublookStack
from .scene import RawEchoSet


def check_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinite samples")


def check_raw_echo(X) -> RawEchoSet:
    if not isinstance(X, RawEchoSet):
        raise TypeError(f"expected a RawEchoSet, got {type(X).__name__}")
    _check_finite("raw echoes", X.samples)
    return X


def check_range_compressed(X) -> RangeCompressed:
    if not isinstance(X, RangeCompressed):
        raise TypeError(f"expected RangeCompressed data, got {type(X).__name__}")
    _check_finite("range-compressed data", X.samples)
    return X


def check_stack(X) -> SublookStack:
    if not isinstance(X, SublookStack):
        raise TypeError(f"expected a SublookStack, got {type(X).__name__}")
    if X.looks.ndim != 3 or X.looks.shape[1:] != X.grid.shape:
        raise DomainError(f"looks of shape {X.looks.shape} do not match grid {X.grid.shape}")
    _check_finite("sublook images", X.looks)
    return X


def check_bits(bits, name: str = "bits") -> np.ndarray:
    b = np.asarray(bits)
    if b.ndim != 1 or not np.all((b == 0) | (b == 1)):
        raise DomainError(f"{name} must be a 1-D sequence of 0/1 values")
    return b.astype(np.uint8)
