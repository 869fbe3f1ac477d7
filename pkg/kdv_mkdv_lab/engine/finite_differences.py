"""Central finite-difference stencils used by the residual oracles."""

from fractions import Fraction
from typing import Callable, Dict, Mapping, Tuple

import mpmath

from .errors import ParameterError

F = Fraction

# (accuracy order, derivative) -> ((offset, weight), ...); divide by step**derivative
CENTRAL_STENCILS: Dict[Tuple[int, int], Tuple[Tuple[int, Fraction], ...]] = {
    (2, 1): ((-1, F(-1, 2)), (1, F(1, 2))),
    (2, 2): ((-1, F(1)), (0, F(-2)), (1, F(1))),
    (2, 3): ((-2, F(-1, 2)), (-1, F(1)), (1, F(-1)), (2, F(1, 2))),
    (4, 1): ((-2, F(1, 12)), (-1, F(-2, 3)), (1, F(2, 3)), (2, F(-1, 12))),
    (4, 2): ((-2, F(-1, 12)), (-1, F(4, 3)), (0, F(-5, 2)), (1, F(4, 3)), (2, F(-1, 12))),
    (4, 3): (
        (-3, F(1, 8)), (-2, F(-1)), (-1, F(13, 8)),
        (1, F(-13, 8)), (2, F(1)), (3, F(-1, 8)),
    ),
}

SUPPORTED_ORDERS = (2, 4)


def mp_weight(w: Fraction):
    """Exact stencil weight as an mpf at the working precision."""
    return mpmath.mpf(w.numerator) / w.denominator


def stencil(order: int, derivative: int):
    try:
        return CENTRAL_STENCILS[(order, derivative)]
    except KeyError:
        raise ParameterError(
            f"no central stencil for derivative {derivative} at order {order}"
        ) from None


def stencil_offsets(order: int, max_derivative: int = 3) -> Tuple[int, ...]:
    """All offsets needed for derivatives 0..max_derivative at ``order``."""
    offsets = {0}
    for n in range(1, max_derivative + 1):
        offsets.update(offset for offset, _ in stencil(order, n))
    return tuple(sorted(offsets))


def apply_stencil(
    samples: Mapping[int, object],
    step,
    derivative: int,
    order: int,
    weight: Callable[[Fraction], object] = lambda w: w.numerator / w.denominator,
):
    """Σ w_k · samples[k] / step**derivative.

    ``weight`` converts the exact fraction into the arithmetic of the
    samples (float by default, ``mpmath.mpf`` for extended precision).
    """
    if derivative == 0:
        return samples[0]
    total = None
    for offset, w in stencil(order, derivative):
        term = samples[offset] * weight(w)
        total = term if total is None else total + term
    return total / step ** derivative


def derivatives(samples: Mapping[int, object], step, order: int, max_derivative: int = 3, weight=None):
    """Tuple (q, q', ..., q^(max_derivative)) from offset samples."""
    kwargs = {} if weight is None else {"weight": weight}
    return tuple(
        apply_stencil(samples, step, n, order, **kwargs)
        for n in range(max_derivative + 1)
    )
