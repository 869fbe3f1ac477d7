"""Domain types shared by all engine modules.

Grids, field states, coefficient tensors of the template system

    θⁿ_t + Σ_{l,m,k} gⁿ'ˡ_{m,k} · term_l(θᵐ, θᵏ) + dₙ θⁿ_xxx = 0

and the named system presets. Component indices are 1-based in records
and documentation, 0-based in arrays.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Tuple

import numpy as np

from .errors import InstabilityError, ParameterError


TERM_TYPES = 5
MIN_POINTS = 5

# term_l meaning, l = 1..5
TERM_LABELS = {
    1: "θᵐ θᵏ_x",
    2: "(θᵐ)² θᵏ_x",
    3: "θᵐ_x θᵏ_x",
    4: "θᵐ θᵏ_xx",
    5: "θᵐ θᵏ θᵏ_x",
}


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D mesh; node k sits at x_min + k·h."""

    x_min: float
    x_max: float
    h: float
    point_count: int

    @classmethod
    def from_points(cls, x_min: float, h: float, point_count: int) -> "Grid":
        if h <= 0:
            raise ParameterError(f"grid spacing must be positive, got h={h}")
        if point_count < MIN_POINTS:
            raise ParameterError(
                f"grid needs at least {MIN_POINTS} nodes, got {point_count}"
            )
        return cls(
            x_min=float(x_min),
            x_max=float(x_min) + (point_count - 1) * float(h),
            h=float(h),
            point_count=int(point_count),
        )

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + np.arange(self.point_count) * self.h

    def index_of(self, x: float) -> int:
        """Nearest node index to coordinate x."""
        return int(round((x - self.x_min) / self.h))


def build_grid(x_min: float, x_max: float, h: float) -> Grid:
    """Build a grid covering [x_min, x_max] with spacing h.

    Raises:
        ParameterError: non-positive h, or a domain narrower than the
            five-point stencil.
    """
    if not np.isfinite(h) or h <= 0:
        raise ParameterError(f"grid spacing must be positive, got h={h}")
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_max <= x_min:
        raise ParameterError(f"need x_max > x_min, got [{x_min}, {x_max}]")
    span = x_max - x_min
    if span < 4 * h * (1 - 1e-12):
        raise ParameterError(
            f"domain [{x_min}, {x_max}] is narrower than the 5-point stencil for h={h}"
        )
    point_count = int(round(span / h)) + 1
    return Grid.from_points(x_min, h, point_count)


class FieldState:
    """N real components sampled on a grid at one time level.

    Values are held in a read-only (N, point_count) array. Equality is
    exact and component-wise.
    """

    __slots__ = ("t", "_values")

    def __init__(self, t: float, values):
        array = np.array(values, dtype=float, copy=True)
        if array.ndim == 1:
            array = array[np.newaxis, :]
        if array.ndim != 2 or array.shape[0] < 1:
            raise ParameterError(
                f"field values must have shape (N, points), got {array.shape}"
            )
        if not np.all(np.isfinite(array)):
            bad = np.argwhere(~np.isfinite(array))[0]
            raise InstabilityError(
                f"non-finite value in component {bad[0] + 1} at node {bad[1]} (t={t})",
                failure_time=float(t),
            )
        array.flags.writeable = False
        self.t = float(t)
        self._values = array

    @classmethod
    def zeros(cls, n_components: int, grid: Grid, t: float = 0.0) -> "FieldState":
        return cls(t, np.zeros((n_components, grid.point_count)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n_components(self) -> int:
        return self._values.shape[0]

    @property
    def point_count(self) -> int:
        return self._values.shape[1]

    def component(self, n: int) -> np.ndarray:
        """1-based component access."""
        return self._values[n - 1]

    def copy(self) -> "FieldState":
        return FieldState(self.t, self._values)

    def with_values(self, t: float, values) -> "FieldState":
        if np.shape(values) != self._values.shape:
            raise ParameterError(
                f"shape {np.shape(values)} does not match {self._values.shape}"
            )
        return FieldState(t, values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldState):
            return NotImplemented
        return self.t == other.t and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self.t, self._values.tobytes()))

    def __repr__(self) -> str:
        return f"FieldState(t={self.t}, n_components={self.n_components}, points={self.point_count})"


@dataclass(frozen=True)
class CoefficientSet:
    """Dense coefficient tensors g[n, l, m, k] and d[n] (0-based)."""

    n_components: int
    g: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=float, copy=True)
        d = np.array(self.d, dtype=float, copy=True)
        n = self.n_components
        if g.shape != (n, TERM_TYPES, n, n) or d.shape != (n,):
            raise ParameterError(
                f"coefficient shapes {g.shape}, {d.shape} do not match N={n}"
            )
        g.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "d", d)

    @classmethod
    def zeros(cls, n_components: int) -> "CoefficientSet":
        if n_components < 1:
            raise ParameterError(f"need at least one component, got {n_components}")
        return cls(
            n_components,
            np.zeros((n_components, TERM_TYPES, n_components, n_components)),
            np.zeros(n_components),
        )

    @classmethod
    def from_records(
        cls,
        n_components: int,
        g_records: Iterable[Mapping],
        d_records: Iterable[Mapping] = (),
    ) -> "CoefficientSet":
        """Build from 1-based {n, l, m, k, value} and {n, value} records.

        Raises:
            ParameterError: a record index is out of range.
        """
        from .coefficient_validator import CoefficientValidator

        g_records = list(g_records)
        d_records = list(d_records)
        errors = CoefficientValidator.validate_records(n_components, g_records, d_records)
        if errors:
            joined = "; ".join(err for _, err in errors)
            raise ParameterError(f"invalid coefficient records: {joined}")
        g = np.zeros((n_components, TERM_TYPES, n_components, n_components))
        d = np.zeros(n_components)
        for rec in g_records:
            g[rec["n"] - 1, rec["l"] - 1, rec["m"] - 1, rec["k"] - 1] += float(rec["value"])
        for rec in d_records:
            d[rec["n"] - 1] += float(rec["value"])
        return cls(n_components, g, d)

    def to_records(self) -> Tuple[List[Dict], List[Dict]]:
        g_records = [
            {"n": n + 1, "l": l + 1, "m": m + 1, "k": k + 1, "value": float(v)}
            for (n, l, m, k), v in self.nonzero_terms()
        ]
        d_records = [
            {"n": n + 1, "value": float(v)}
            for n, v in enumerate(self.d)
            if v != 0
        ]
        return g_records, d_records

    def nonzero_terms(self) -> Iterator[Tuple[Tuple[int, int, int, int], float]]:
        """Yield ((n, l, m, k), value) for nonzero g entries, 0-based."""
        for index in zip(*np.nonzero(self.g)):
            yield tuple(int(i) for i in index), float(self.g[index])

    def term_block(self, l: int) -> np.ndarray:
        """g[:, l-1, :, :] for the 1-based term type l."""
        return self.g[:, l - 1, :, :]

    @property
    def max_abs_g(self) -> float:
        return float(np.max(np.abs(self.g))) if self.g.size else 0.0

    @property
    def max_abs_d(self) -> float:
        return float(np.max(np.abs(self.d))) if self.d.size else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoefficientSet):
            return NotImplemented
        return (
            self.n_components == other.n_components
            and np.array_equal(self.g, other.g)
            and np.array_equal(self.d, other.d)
        )

    def __hash__(self):
        return hash((self.n_components, self.g.tobytes(), self.d.tobytes()))


@dataclass(frozen=True)
class SystemPreset:
    name: str
    coefficients: CoefficientSet
    description: str = ""
    component_labels: Tuple[str, ...] = field(default=())


def _kdv_scalar() -> SystemPreset:
    coefficients = CoefficientSet.from_records(
        1,
        [{"n": 1, "l": 1, "m": 1, "k": 1, "value": -1.5}],
        [{"n": 1, "value": -0.25}],
    )
    return SystemPreset(
        name="kdv-scalar",
        coefficients=coefficients,
        description="u_t - 1/4 u_xxx - 3/2 u u_x = 0",
        component_labels=("u",),
    )


# (n, l, m, k, value) for components (f, u, v) = (1, 2, 3)
_KDV_MKDV_3_TERMS = (
    (1, 1, 2, 1, 1.5),
    (1, 1, 1, 2, 1.5),
    (1, 2, 1, 1, -0.75),
    (2, 1, 2, 2, -1.5),
    (2, 1, 3, 3, 3.0),
    (2, 2, 1, 2, 0.75),
    (2, 3, 1, 3, -1.5),
    (2, 4, 3, 1, -1.5),
    (3, 1, 2, 3, 1.5),
    (3, 2, 1, 3, -0.75),
    (3, 3, 1, 2, 1.5),
    (3, 4, 1, 2, 0.75),
    (3, 5, 3, 1, -1.5),
)
_KDV_MKDV_3_DISPERSION = (0.5, -0.25, 0.5)


def _kdv_mkdv_3() -> SystemPreset:
    coefficients = CoefficientSet.from_records(
        3,
        [
            {"n": n, "l": l, "m": m, "k": k, "value": value}
            for n, l, m, k, value in _KDV_MKDV_3_TERMS
        ],
        [{"n": n + 1, "value": d} for n, d in enumerate(_KDV_MKDV_3_DISPERSION)],
    )
    return SystemPreset(
        name="kdv-mkdv-3",
        coefficients=coefficients,
        description="three-component coupled KdV-MKdV system in (f, u, v)",
        component_labels=("f", "u", "v"),
    )


PRESETS: Dict[str, Callable[[], SystemPreset]] = {
    "kdv-scalar": _kdv_scalar,
    "kdv-mkdv-3": _kdv_mkdv_3,
}


def preset_system(name: str) -> SystemPreset:
    """Return a freshly built named preset.

    Raises:
        ParameterError: unknown preset name.
    """
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset '{name}', expected one of {sorted(PRESETS)}"
        ) from None
    return builder()
