"""Exact zero-seed solutions of the coupled KdV-MKdV systems.

Seed spectral solutions

    φ₁ = c₁ e^{ax + a³t} + c₂ e^{−(ax + a³t)}
    φ₂ = d₁ e^{i(ax − a³t)} + d₂ e^{−i(ax − a³t)}

feed the two-component solution of the first elementary DT and the
three-component solution (f, u, v) of the compound DT:

    W = φ₁φ₂ₓ − φ₂φ₁ₓ,  D = φ₁² − φ₂²
    f = 2W/D,  u = (Dₓ/D)ₓ + 2(W/D)²,  v = 2(W/D)ₓ + W·Dₓ/D²

All evaluators work in complex arithmetic, accept numpy arrays (numpy
back-end) or scalars at extended precision (mpmath back-end), and raise
:class:`PoleError` when a denominator falls below the pole threshold.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .core import FieldState, Grid
from .errors import NonRealSolutionError, ParameterError, PoleError
from .jets import Jet
from .precision import NUMPY_BACKEND, Backend

logger = logging.getLogger("kdv-lab.closed-forms")

DEFAULT_POLE_THRESHOLD = 1e-12
REALITY_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ClosedFormParams:
    """Spectral parameter a = √λ and the seed constants.

    When ``r`` is given the constants are normalised to c₁ = c₂ = 1/2,
    d₁ = d₂ = r/2.
    """

    a: complex
    c1: complex = 0.5
    c2: complex = 0.5
    d1: complex = 0.5
    d2: complex = 0.5
    r: Optional[float] = None

    def __post_init__(self):
        if self.a == 0:
            raise ParameterError("spectral parameter a must be nonzero")
        if self.r is not None:
            object.__setattr__(self, "c1", 0.5)
            object.__setattr__(self, "c2", 0.5)
            object.__setattr__(self, "d1", 0.5 * self.r)
            object.__setattr__(self, "d2", 0.5 * self.r)

    @classmethod
    def from_ratio(cls, a: complex, r: float) -> "ClosedFormParams":
        return cls(a=a, r=float(r))

    @property
    def lam(self) -> complex:
        return self.a ** 2

    def constants(self, backend: Backend) -> Tuple[Any, Any, Any, Any, Any]:
        num = backend.number
        return num(self.a), num(self.c1), num(self.c2), num(self.d1), num(self.d2)


@dataclass(frozen=True)
class PhaseVariables:
    eta1: Any
    eta2: Any
    zeta1: Any = None
    zeta2: Any = None


def phase_variables(a, x, t, m=None) -> PhaseVariables:
    """η₁ = a³t − ax, η₂ = a³t + ax and, for the complex case, ζ₁, ζ₂."""
    a3t = a ** 3 * t
    ax = a * x
    zeta1 = zeta2 = None
    if m is not None:
        zeta1 = 2 * m * x + 4 * m ** 3 * t
        zeta2 = 2 * m * x - 4 * m ** 3 * t
    return PhaseVariables(eta1=a3t - ax, eta2=a3t + ax, zeta1=zeta1, zeta2=zeta2)


@dataclass
class SolutionTriple:
    """Values of (f, u, v) at one point or on an array of points."""

    f: Any
    u: Any
    v: Any

    def as_dict(self) -> Dict[str, Any]:
        return {"f": self.f, "u": self.u, "v": self.v}

    def max_imag_ratio(self) -> float:
        """max |Im| / max(1, |value|) over the three fields."""
        worst = 0.0
        for value in (self.f, self.u, self.v):
            value = np.asarray(value, dtype=complex)
            scale = np.maximum(1.0, np.abs(value))
            worst = max(worst, float(np.max(np.abs(value.imag) / scale)))
        return worst

    def is_real(self, tolerance: float = 1e-12) -> bool:
        return self.max_imag_ratio() <= tolerance


def _location(x, t, den) -> Optional[Tuple[float, float]]:
    try:
        xs, ts, ds = np.broadcast_arrays(
            np.asarray(x, dtype=complex), np.asarray(t, dtype=complex), np.asarray(den, dtype=complex)
        )
        index = int(np.argmin(np.abs(ds)))
        return float(xs.flat[index].real), float(ts.flat[index].real)
    except (TypeError, ValueError):
        return None


def _check_pole(den, threshold: float, x, t, backend: Backend, what: str) -> None:
    magnitude = backend.min_abs(den)
    if magnitude < threshold:
        location = _location(x, t, den)
        raise PoleError(
            f"{what} denominator {magnitude:.3e} below threshold {threshold:g} near (x, t) = {location}",
            location=location,
            magnitude=magnitude,
        )


def seed_jets(
    p: ClosedFormParams, x, t, order: int = 2, backend: Backend = NUMPY_BACKEND
) -> Tuple[Jet, Jet]:
    """Analytic x-derivative jets of the zero-seed pair up to ``order``."""
    a, c1, c2, d1, d2 = p.constants(backend)
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    theta = a * x + a ** 3 * t
    grow = backend.exp(theta)
    decay = backend.exp(-theta)
    phase = 1j * (a * x - a ** 3 * t)
    wave = backend.exp(phase)
    anti = backend.exp(-phase)
    ia = 1j * a
    phi1 = Jet(c1 * a ** n * grow + c2 * (-a) ** n * decay for n in range(order + 1))
    phi2 = Jet(d1 * ia ** n * wave + d2 * (-ia) ** n * anti for n in range(order + 1))
    return phi1, phi2


def seed_pair(p: ClosedFormParams, x, t, backend: Backend = NUMPY_BACKEND):
    """Values (φ₁, φ₂) of the zero-seed spectral pair at (x, t)."""
    phi1, phi2 = seed_jets(p, x, t, order=0, backend=backend)
    return phi1.value, phi2.value


def two_component_fields(
    p: ClosedFormParams,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
):
    """(f₂₁, u₁₁, u₂₁) of the first elementary DT on the zero seed."""
    a, c1, c2, d1, d2 = p.constants(backend)
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    moving = a ** 2 * t + x
    den = c2 + c1 * backend.exp(2 * a * moving)
    _check_pole(den, threshold, x, t, backend, "two-component")
    prefactor = backend.exp((1 - 1j) * a * moving)
    slow = d2 * backend.exp(2j * a ** 3 * t)
    fast = d1 * backend.exp(2j * a * x)
    f21 = 2 * prefactor * (slow + fast) / den
    u11 = 8 * a ** 2 * c1 * c2 * backend.exp(2 * a * moving) / den ** 2
    u21 = -2j * a * prefactor * (slow - fast) / den
    return f21, u11, u21


def three_component_denominator(p: ClosedFormParams, x, t, backend: Backend = NUMPY_BACKEND):
    phi1, phi2 = seed_pair(p, x, t, backend)
    return phi1 ** 2 - phi2 ** 2


def three_component_fields(
    p: ClosedFormParams,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> SolutionTriple:
    """(f, u, v) of the compound DT with analytic seed derivatives."""
    phi1, phi2 = seed_jets(p, x, t, order=2, backend=backend)
    p0, p1, p2 = phi1.coeffs
    q0, q1, q2 = phi2.coeffs
    den = p0 ** 2 - q0 ** 2
    _check_pole(den, threshold, x, t, backend, "three-component")
    wronskian = p0 * q1 - q0 * p1
    wronskian_x = p0 * q2 - q0 * p2
    den_x = 2 * (p0 * p1 - q0 * q1)
    den_xx = 2 * (p1 ** 2 + p0 * p2 - q1 ** 2 - q0 * q2)
    ratio = wronskian / den
    log_slope = den_x / den
    f = 2 * ratio
    u = den_xx / den - log_slope ** 2 + 2 * ratio ** 2
    v = 2 * wronskian_x / den - ratio * log_slope
    return SolutionTriple(f=f, u=u, v=v)


def r_family_denominator(a, r, x, t, backend: Backend = NUMPY_BACKEND):
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    phases = phase_variables(a, x, t)
    return backend.cosh(phases.eta2) ** 2 - r ** 2 * backend.cos(phases.eta1) ** 2


def r_family_fields(
    a: float,
    r: float,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> SolutionTriple:
    """Real (f, u, v) for c₁ = c₂ = 1/2, d₁ = d₂ = r/2."""
    a = backend.number(a)
    r = backend.number(r)
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    phases = phase_variables(a, x, t)
    eta1, eta2 = phases.eta1, phases.eta2
    ch, sh = backend.cosh(eta2), backend.sinh(eta2)
    c, s = backend.cos(eta1), backend.sin(eta1)
    den = ch ** 2 - r ** 2 * c ** 2
    _check_pole(den, threshold, x, t, backend, "r-family")
    cos2 = backend.cos(2 * eta1)
    cosh2 = backend.cosh(2 * eta2)
    f = 2 * a * r * (ch * s - c * sh) / den
    u = a ** 2 * (
        1 - r ** 4 - r ** 4 * cos2 + cosh2 + r ** 2 * backend.sin(2 * eta1) * backend.sinh(2 * eta2)
    ) / den ** 2
    v = 2 * a ** 2 * r * (
        (-7 + 6 * r ** 2 + 2 * r ** 2 * cos2) * c * ch
        - c * backend.cosh(3 * eta2)
        - 2 * (1 + r ** 2 + r ** 2 * cos2 + cosh2) * s * sh
    ) / (-1 + r ** 2 + r ** 2 * cos2 - cosh2) ** 2
    return SolutionTriple(f=f, u=u, v=v)


def equal_constants_fields(
    a: float,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> SolutionTriple:
    """(f, u, v) for c₁ = c₂ = d₁ = d₂ = 1/2 written in (η₁, η₂).

    The v numerator is divided by (cos 2η₁ − cosh 2η₂)² = 4(cosh²η₂ − cos²η₁)²,
    which is the normalisation produced by the compound DT.
    """
    a = backend.number(a)
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    phases = phase_variables(a, x, t)
    eta1, eta2 = phases.eta1, phases.eta2
    ch, sh = backend.cosh(eta2), backend.sinh(eta2)
    c, s = backend.cos(eta1), backend.sin(eta1)
    den = ch ** 2 - c ** 2
    _check_pole(den, threshold, x, t, backend, "equal-constants")
    f = 2 * a * (s * ch - c * sh) / den
    u = 2 * a ** 2 * (s * ch + c * sh) ** 2 / den ** 2
    v = 2 * a ** 2 * (
        backend.cos(3 * eta1) * ch
        - 2 * s * sh * (backend.cos(2 * eta1) + backend.cosh(2 * eta2) + 2)
        - c * backend.cosh(3 * eta2)
    ) / (4 * den ** 2)
    return SolutionTriple(f=f, u=u, v=v)


def complex_case_params(m: float, c1=0.5, c2=0.5, d1=0.5, d2=0.5, backend: Backend = NUMPY_BACKEND) -> ClosedFormParams:
    """Parameters for λ = −2im² with a on the principal branch."""
    if m == 0:
        raise ParameterError("complex-case parameter m must be nonzero")
    a = complex(backend.sqrt(-2j * m ** 2))
    return ClosedFormParams(a=a, c1=c1, c2=c2, d1=d1, d2=d2)


def complex_case_field(
    m: float,
    constants: Mapping[str, complex],
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
    flip_branch: bool = False,
):
    """f of the compound DT for λ = −2im².

    ``flip_branch`` evaluates on the other square-root branch a → −a.
    """
    p = complex_case_params(m, **constants)
    if flip_branch:
        p = ClosedFormParams(a=-p.a, c1=p.c1, c2=p.c2, d1=p.d1, d2=p.d2)
    return three_component_fields(p, x, t, backend=backend, threshold=threshold).f


def zeta_formula_field(
    m: float,
    x,
    t,
    backend: Backend = NUMPY_BACKEND,
    threshold: float = DEFAULT_POLE_THRESHOLD,
):
    """Real complex-case f for equal constants, written in (ζ₁, ζ₂)."""
    m = backend.number(m)
    x = backend.coordinate(x)
    t = backend.coordinate(t)
    phases = phase_variables(m, x, t, m=m)
    z1, z2 = phases.zeta1, phases.zeta2
    den = (0.25 * backend.cosh(2 * z2) - 0.25) * (1 - backend.cos(2 * z1))
    _check_pole(den, threshold, x, t, backend, "complex-case")
    numerator = (
        backend.cos(2 * z1) * backend.sinh(z2)
        - backend.sinh(z2)
        - backend.sin(z1) * backend.cosh(2 * z2)
        + backend.sin(z1)
    )
    return m * numerator / den


# -- singularities ------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    """A candidate pole; ``kind`` is "zero" for a verified denominator zero
    and "lattice" for the (nπ/2a, nπ/2a³) listing."""

    x: float
    t: float
    denominator: float
    kind: str = "zero"


def _axis_values(bounds: Tuple[float, float], samples: int) -> np.ndarray:
    lo, hi = float(bounds[0]), float(bounds[1])
    if hi < lo:
        raise ParameterError(f"empty range [{lo}, {hi}]")
    if hi == lo:
        return np.array([lo])
    return np.linspace(lo, hi, samples)


def _in_window(x: float, t: float, x_range, t_range, slack: float = 1e-12) -> bool:
    return (
        x_range[0] - slack <= x <= x_range[1] + slack
        and t_range[0] - slack <= t <= t_range[1] + slack
    )


def _denominator_value(a: float, r: float, x: float, t: float) -> float:
    return float(r_family_denominator(a, r, x, t))


def denominator_zeros(
    a: float,
    r: float,
    x_range: Tuple[float, float],
    t_range: Tuple[float, float],
    t_samples: int = 21,
    x_samples: int = 2001,
) -> List[SingularPoint]:
    """Zeros of cosh²η₂ − r²cos²η₁ inside the window.

    For |r| = 1 the zeros are isolated points η₂ = 0, η₁ = nπ, i.e.
    (x, t) = (−nπ/2a, nπ/2a³). For |r| > 1 the denominator changes sign
    across the zero curves, which are located per time sample by a scan
    in x refined with Brent's method.
    """
    if not all(math.isfinite(v) for v in (*x_range, *t_range)):
        raise ParameterError("singularity window must be finite")
    r_abs = abs(r)
    if r_abs < 1:
        return []

    points: List[SingularPoint] = []
    if r_abs == 1:
        reach = max(abs(x_range[0]), abs(x_range[1])) * 2 * abs(a) / math.pi
        for n in range(-int(reach) - 1, int(reach) + 2):
            x = -n * math.pi / (2 * a)
            t = n * math.pi / (2 * a ** 3)
            if _in_window(x, t, x_range, t_range):
                points.append(SingularPoint(x, t, _denominator_value(a, r, x, t), "zero"))
        return points

    xs = _axis_values(x_range, x_samples)
    for t in _axis_values(t_range, t_samples):
        values = np.asarray(r_family_denominator(a, r, xs, t), dtype=float)
        for i in range(len(xs) - 1):
            left, right = values[i], values[i + 1]
            if left == 0.0:
                root = float(xs[i])
            elif left * right < 0:
                root = brentq(
                    lambda x: _denominator_value(a, r, x, t), xs[i], xs[i + 1], xtol=1e-14
                )
            else:
                continue
            points.append(SingularPoint(root, float(t), _denominator_value(a, r, root, t), "zero"))
        if values[-1] == 0.0:
            points.append(SingularPoint(float(xs[-1]), float(t), 0.0, "zero"))
    logger.debug(f"located {len(points)} denominator zeros for a={a}, r={r}")
    return points


def singular_points(
    a: float,
    r: float,
    x_range: Tuple[float, float],
    t_range: Tuple[float, float],
    t_samples: int = 21,
    x_samples: int = 2001,
) -> List[SingularPoint]:
    """Singular points of the r-family inside a finite window.

    |r| < 1 gives none. For |r| = 1 the true zeros are reported together
    with the lattice (nπ/2a, nπ/2a³); each lattice point carries its
    denominator value so points that are not zeros remain visible. For
    |r| > 1 the zeros are located numerically.
    """
    points = denominator_zeros(a, r, x_range, t_range, t_samples, x_samples)
    if abs(r) != 1:
        return points

    reach = max(abs(x_range[0]), abs(x_range[1])) * 2 * abs(a) / math.pi
    for n in range(-int(reach) - 1, int(reach) + 2):
        x = n * math.pi / (2 * a)
        t = n * math.pi / (2 * a ** 3)
        if not _in_window(x, t, x_range, t_range):
            continue
        if any(abs(p.x - x) < 1e-12 and abs(p.t - t) < 1e-12 for p in points):
            continue
        points.append(SingularPoint(x, t, _denominator_value(a, r, x, t), "lattice"))
    return sorted(points, key=lambda p: (p.t, p.x))


# -- named families -----------------------------------------------------------

FAMILY_COMPONENTS: Dict[str, Tuple[str, ...]] = {
    "two-component": ("f21", "u11", "u21"),
    "three-component": ("f", "u", "v"),
    "r-family": ("f", "u", "v"),
    "complex-case": ("f",),
}

_SEED_KEYS = ("c1", "c2", "d1", "d2")


def _as_complex(name: str, value) -> complex:
    try:
        return complex(value.replace(" ", "")) if isinstance(value, str) else complex(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"parameter {name}={value!r} is not a number", cause=exc) from exc


def _as_real(name: str, value) -> float:
    number = _as_complex(name, value)
    if number.imag != 0:
        raise ParameterError(f"parameter {name} must be real, got {value!r}")
    return number.real


@dataclass(frozen=True)
class SolutionFamily:
    """A named closed-form solution with its parameters.

    ``components`` selects and orders the fields written into a
    FieldState; ``None`` keeps all of them.
    """

    name: str
    params: Mapping[str, Any] = field(default_factory=dict)
    components: Optional[Tuple[str, ...]] = None

    @property
    def available_components(self) -> Tuple[str, ...]:
        if self.name == "zero":
            n = int(self.params["n_components"])
            return tuple(f"theta{i + 1}" for i in range(n))
        return FAMILY_COMPONENTS[self.name]

    @property
    def component_names(self) -> Tuple[str, ...]:
        return self.components or self.available_components

    def closed_form_params(self) -> ClosedFormParams:
        if self.name in ("two-component", "three-component"):
            if "r" in self.params:
                return ClosedFormParams.from_ratio(self.params["a"], self.params["r"])
            return ClosedFormParams(
                a=self.params["a"], **{k: self.params[k] for k in _SEED_KEYS}
            )
        if self.name == "complex-case":
            return complex_case_params(self.params["m"], **{k: self.params[k] for k in _SEED_KEYS})
        if self.name == "r-family":
            return ClosedFormParams.from_ratio(self.params["a"], self.params["r"])
        raise ParameterError(f"family '{self.name}' has no spectral parameters")

    def evaluate(
        self,
        x,
        t,
        backend: Backend = NUMPY_BACKEND,
        threshold: float = DEFAULT_POLE_THRESHOLD,
    ) -> Dict[str, Any]:
        """All fields of the family at (x, t), keyed by component name."""
        if self.name == "zero":
            zero = np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)
            return {name: zero for name in self.available_components}
        if self.name == "r-family":
            triple = r_family_fields(
                self.params["a"], self.params["r"], x, t, backend=backend, threshold=threshold
            )
            return triple.as_dict()
        p = self.closed_form_params()
        if self.name == "two-component":
            values = two_component_fields(p, x, t, backend=backend, threshold=threshold)
            return dict(zip(FAMILY_COMPONENTS["two-component"], values))
        triple = three_component_fields(p, x, t, backend=backend, threshold=threshold)
        if self.name == "complex-case":
            return {"f": triple.f}
        return triple.as_dict()

    def denominator(self, x, t, backend: Backend = NUMPY_BACKEND):
        """The denominator whose zeros are the poles of the family."""
        if self.name == "zero":
            return np.ones(np.broadcast(np.asarray(x), np.asarray(t)).shape)
        if self.name == "r-family":
            return r_family_denominator(self.params["a"], self.params["r"], x, t, backend)
        p = self.closed_form_params()
        if self.name == "two-component":
            a, c1, c2, _, _ = p.constants(backend)
            return c2 + c1 * backend.exp(2 * a * (a ** 2 * backend.coordinate(t) + backend.coordinate(x)))
        return three_component_denominator(p, x, t, backend)


def make_family(
    name: str,
    params: Optional[Mapping[str, Any]] = None,
    components: Optional[Sequence[str]] = None,
) -> SolutionFamily:
    """Validate parameters and build a :class:`SolutionFamily`.

    Raises:
        ParameterError: unknown family, missing/unknown parameter,
            unknown component name, or a = 0 / m = 0.
    """
    params = dict(params or {})
    if name == "zero":
        allowed, required = {"n_components"}, {"n_components"}
    elif name == "r-family":
        allowed, required = {"a", "r"}, {"a", "r"}
    elif name in ("two-component", "three-component"):
        allowed = {"a", "r", *_SEED_KEYS}
        required = {"a", "r"} if "r" in params else {"a", *_SEED_KEYS}
    elif name == "complex-case":
        allowed, required = {"m", *_SEED_KEYS}, {"m", *_SEED_KEYS}
    else:
        raise ParameterError(
            f"unknown solution family '{name}', expected one of "
            f"{sorted([*FAMILY_COMPONENTS, 'zero'])}"
        )

    missing = sorted(required - set(params))
    unknown = sorted(set(params) - allowed)
    if missing:
        raise ParameterError(f"family '{name}' missing parameters: {', '.join(missing)}")
    if unknown:
        raise ParameterError(f"family '{name}' has unknown parameters: {', '.join(unknown)}")

    clean: Dict[str, Any] = {}
    for key, value in params.items():
        if key == "n_components":
            if isinstance(value, bool) or int(value) != value or int(value) < 1:
                raise ParameterError(f"n_components must be a positive integer, got {value!r}")
            clean[key] = int(value)
        elif key in ("r", "m") or (key == "a" and name == "r-family"):
            clean[key] = _as_real(key, value)
        else:
            clean[key] = _as_complex(key, value)

    family = SolutionFamily(name=name, params=clean)
    if name != "zero":
        if name == "r-family" and clean["a"] == 0:
            raise ParameterError("spectral parameter a must be nonzero")
        family.closed_form_params()
    if components is not None:
        components = tuple(components)
        unknown_components = [c for c in components if c not in family.available_components]
        if unknown_components or not components:
            raise ParameterError(
                f"family '{name}' has components {family.available_components}, "
                f"got {components}"
            )
        family = SolutionFamily(name=name, params=clean, components=components)
    return family


def sample_on_grid(
    family: SolutionFamily,
    grid: Grid,
    t: float,
    threshold: float = DEFAULT_POLE_THRESHOLD,
    reality_threshold: float = REALITY_THRESHOLD,
) -> FieldState:
    """Evaluate a family at every node of ``grid`` at time ``t``.

    Raises:
        PoleError: a node lies at (or within the threshold of) a pole.
        NonRealSolutionError: a selected component has a non-negligible
            imaginary part.
    """
    values = family.evaluate(grid.nodes, t, threshold=threshold)
    rows = []
    for name in family.component_names:
        column = np.asarray(values[name], dtype=complex)
        scale = max(1.0, float(np.max(np.abs(column.real))))
        imag = float(np.max(np.abs(column.imag)))
        if imag > reality_threshold * scale:
            raise NonRealSolutionError(
                f"component {name} of family '{family.name}' has imaginary part "
                f"{imag:.3e} at t={t}"
            )
        rows.append(column.real)
    logger.debug(f"sampled {family.name} on {grid.point_count} nodes at t={t}")
    return FieldState(t, np.vstack(rows))
