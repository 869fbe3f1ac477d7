"""Evaluation back-ends for the closed forms.

The numpy back-end evaluates vectorised over x/t arrays in complex128.
The mpmath back-end evaluates scalars at the working precision of
``mpmath.mp``; finite-difference residual oracles use it so that
round-off stays far below the stencil truncation error.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Iterator

import mpmath
import numpy as np

DEFAULT_DPS = 30


@dataclass(frozen=True)
class Backend:
    name: str
    exp: Callable[[Any], Any]
    cosh: Callable[[Any], Any]
    sinh: Callable[[Any], Any]
    cos: Callable[[Any], Any]
    sin: Callable[[Any], Any]
    sqrt: Callable[[Any], Any]
    number: Callable[[Any], Any]
    coordinate: Callable[[Any], Any]
    min_abs: Callable[[Any], float]

    def real(self, value):
        if self.name == "mpmath":
            return mpmath.re(value)
        return np.real(value)

    def imag(self, value):
        if self.name == "mpmath":
            return mpmath.im(value)
        return np.imag(value)


def _numpy_number(value):
    return value


def _numpy_coordinate(value):
    return np.asarray(value, dtype=float)


def _numpy_min_abs(value) -> float:
    return float(np.min(np.abs(value)))


def _mpmath_min_abs(value) -> float:
    return float(abs(value))


NUMPY_BACKEND = Backend(
    name="numpy",
    exp=np.exp,
    cosh=np.cosh,
    sinh=np.sinh,
    cos=np.cos,
    sin=np.sin,
    sqrt=lambda z: np.sqrt(np.asarray(z, dtype=complex)),
    number=_numpy_number,
    coordinate=_numpy_coordinate,
    min_abs=_numpy_min_abs,
)

MPMATH_BACKEND = Backend(
    name="mpmath",
    exp=mpmath.exp,
    cosh=mpmath.cosh,
    sinh=mpmath.sinh,
    cos=mpmath.cos,
    sin=mpmath.sin,
    sqrt=mpmath.sqrt,
    number=mpmath.mpmathify,
    coordinate=mpmath.mpmathify,
    min_abs=_mpmath_min_abs,
)


@contextmanager
def extended_precision(dps: int = DEFAULT_DPS) -> Iterator[Backend]:
    """Run a block at ``dps`` decimal digits and hand back the mpmath back-end."""
    with mpmath.workdps(dps):
        yield MPMATH_BACKEND

