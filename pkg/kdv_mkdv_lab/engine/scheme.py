"""Explicit forward-Euler / central-difference integrator for the template system.

    θⁿ'ʲ⁺¹ᵢ = θⁿ'ʲᵢ − τ · [ Σ_{l,m,k} gⁿ'ˡ_{m,k} · termₗ + dₙ · δ³θⁿᵢ ]

Ghost values beyond either boundary are zero. The stability exponent

    a(τ, h) = 2X + τ (X + Y/h + 3D/h³)²

bounds the per-step growth ‖T‖² ≤ e^{aτ}; ``tau_max`` solves a = a_max.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import CoefficientSet, FieldState, Grid
from .errors import InstabilityError, ParameterError

logger = logging.getLogger("kdv-lab.scheme")

BOUNDARY_POLICIES = ("zero-ghost",)
BOUNDARY_BAND = 4
BOUNDARY_TOLERANCE = 1e-6
GHOSTS = 2


@dataclass
class StepperConfig:
    """Time-stepping options.

    ``tau`` is a positive step or ``"auto"`` (stability_margin · tau_max of
    the initial state, fixed for the whole run).
    """

    tau: Union[float, str] = "auto"
    boundary: str = "zero-ghost"
    stability_margin: float = 0.5
    a_max: float = 10.0
    allow_unstable: bool = False
    half_step_type4: bool = False

    def __post_init__(self):
        _validate_stepper(self)

    @property
    def auto_tau(self) -> bool:
        return isinstance(self.tau, str)


def _validate_stepper(cfg: StepperConfig) -> None:
    if isinstance(cfg.tau, str):
        if cfg.tau != "auto":
            raise ParameterError(f"tau must be a positive number or 'auto', got '{cfg.tau}'")
    elif not (math.isfinite(cfg.tau) and cfg.tau > 0):
        raise ParameterError(f"tau must be positive, got {cfg.tau}")
    if cfg.boundary not in BOUNDARY_POLICIES:
        raise ParameterError(f"boundary must be one of {BOUNDARY_POLICIES}, got '{cfg.boundary}'")
    if not 0 < cfg.stability_margin <= 1:
        raise ParameterError(f"stability_margin must be in (0, 1], got {cfg.stability_margin}")
    if not (math.isfinite(cfg.a_max) and cfg.a_max > 0):
        raise ParameterError(f"a_max must be positive, got {cfg.a_max}")


@dataclass(frozen=True)
class StabilityReport:
    a_value: float
    X: float
    Y: float
    D: float
    tau: float
    tau_max: float
    a_max: float
    stable: bool
    speed: float = 0.0
    diagnostics: Tuple[str, ...] = ()

    def growth_constant(self, j: int) -> float:
        """τ(e^{aτj} − 1)/(e^{aτ} − 1), the accumulated local-error weight after j steps."""
        if j < 0:
            raise ParameterError(f"step count must be non-negative, got {j}")
        rate = self.a_value * self.tau
        if rate == 0:
            return self.tau * j
        return self.tau * math.expm1(rate * j) / math.expm1(rate)

    def growth_envelope(self, j: int) -> float:
        """e^{aτj/2}: bound on the amplification of a perturbation after j steps."""
        return math.exp(0.5 * self.a_value * self.tau * j)


# -- discrete operators -----------------------------------------------------


def _pad(values: np.ndarray) -> np.ndarray:
    return np.pad(values, ((0, 0), (GHOSTS, GHOSTS)))


def _central_first(padded: np.ndarray, h: float) -> np.ndarray:
    return (padded[:, 3:-1] - padded[:, 1:-3]) / (2 * h)


def _bracket(
    values: np.ndarray,
    coeffs: CoefficientSet,
    h: float,
    half_step_type4: bool = False,
) -> np.ndarray:
    padded = _pad(values)
    right, left = padded[:, 3:-1], padded[:, 1:-3]
    first = (right - left) / (2 * h)
    second_scale = 2 * h if half_step_type4 else h * h
    second = (right - 2 * values + left) / second_scale
    third = (padded[:, 4:] - 2 * right + 2 * left - padded[:, :-4]) / (2 * h ** 3)

    g = coeffs.g
    with np.errstate(over="ignore", invalid="ignore"):
        out = coeffs.d[:, np.newaxis] * third
        out = out + np.einsum("nmk,mi,ki->ni", g[:, 0], values, first)
        out = out + np.einsum("nmk,mi,ki->ni", g[:, 1], values ** 2, first)
        out = out + np.einsum("nmk,mi,ki->ni", g[:, 2], first, first)
        out = out + np.einsum("nmk,mi,ki->ni", g[:, 3], values, second)
        out = out + np.einsum("nmk,mi,ki->ni", g[:, 4], values, values * first)
    return out


def _check_compatible(state: FieldState, coeffs: CoefficientSet, grid: Grid) -> None:
    if state.n_components != coeffs.n_components:
        raise ParameterError(
            f"state has {state.n_components} components, coefficients expect {coeffs.n_components}"
        )
    if state.point_count != grid.point_count:
        raise ParameterError(
            f"state has {state.point_count} nodes, grid has {grid.point_count}"
        )


def _require_finite(values: np.ndarray, t: float, what: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise InstabilityError(
            f"non-finite {what} in component {bad[0] + 1} at node {bad[1]} (t={t:.6g})",
            failure_time=float(t),
        )


def discrete_rhs(
    state: FieldState,
    coeffs: CoefficientSet,
    grid: Grid,
    half_step_type4: bool = False,
) -> np.ndarray:
    """Bracketed sum of the scheme at every node, shape (N, point_count).

    Raises:
        InstabilityError: an intermediate overflows.
    """
    _check_compatible(state, coeffs, grid)
    rates = _bracket(state.values, coeffs, grid.h, half_step_type4)
    _require_finite(rates, state.t, "rate")
    return rates


def step(
    state: FieldState,
    coeffs: CoefficientSet,
    grid: Grid,
    tau: float,
    half_step_type4: bool = False,
) -> FieldState:
    """One forward-Euler step: θ ← θ − τ · bracket, t ← t + τ."""
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    rates = discrete_rhs(state, coeffs, grid, half_step_type4)
    new_values = state.values - tau * rates
    _require_finite(new_values, state.t + tau, "value")
    return FieldState(state.t + tau, new_values)


def stability_exponent(
    state: FieldState,
    coeffs: CoefficientSet,
    grid: Grid,
    tau: float,
    a_max: float = 10.0,
) -> StabilityReport:
    """Evaluate a(τ, h) on ``state`` and invert it for tau_max.

    When a_max ≤ 2X no step satisfies the bound; tau_max is reported as 0
    together with a diagnostic.
    """
    values = state.values
    h = grid.h
    g_max = coeffs.max_abs_g
    grad = _central_first(_pad(values), h)
    grad_peak = float(np.max(np.abs(grad))) if grad.size else 0.0
    value_peak = float(np.max(np.abs(values))) if values.size else 0.0
    X = g_max * grad_peak ** 2
    Y = g_max * value_peak ** 2
    D = coeffs.max_abs_d
    speed = X + Y / h + 3 * D / h ** 3
    a_value = 2 * X + tau * speed ** 2

    diagnostics: List[str] = []
    if a_max <= 2 * X:
        tau_max = 0.0
        diagnostics.append(
            f"a_max={a_max:g} does not exceed 2X={2 * X:.6g}; no step size satisfies the bound"
        )
    elif speed == 0:
        tau_max = math.inf
    else:
        tau_max = (a_max - 2 * X) / speed ** 2
    return StabilityReport(
        a_value=a_value,
        X=X,
        Y=Y,
        D=D,
        tau=float(tau),
        tau_max=tau_max,
        a_max=float(a_max),
        stable=tau <= tau_max,
        speed=speed,
        diagnostics=tuple(diagnostics),
    )


def resolve_tau(
    initial: FieldState,
    coeffs: CoefficientSet,
    grid: Grid,
    cfg: StepperConfig,
    span: float,
) -> Tuple[float, StabilityReport]:
    """Fix τ for a run of length ``span`` and check it against tau_max.

    Raises:
        InstabilityError: τ above tau_max without ``allow_unstable``, or
            auto-τ requested when no stable step exists.
    """
    trial = stability_exponent(initial, coeffs, grid, 0.0, cfg.a_max)
    if cfg.auto_tau:
        if trial.tau_max == 0.0:
            raise InstabilityError(
                f"cannot choose tau automatically: {trial.diagnostics[0]}",
                failure_time=initial.t,
            )
        if math.isinf(trial.tau_max):
            tau = span if span > 0 else 1.0
        else:
            tau = cfg.stability_margin * trial.tau_max
    else:
        tau = float(cfg.tau)

    report = stability_exponent(initial, coeffs, grid, tau, cfg.a_max)
    for note in report.diagnostics:
        logger.warning(note)
    if not report.stable:
        message = f"tau={tau:.6g} exceeds tau_max={report.tau_max:.6g} (a={report.a_value:.6g}, a_max={cfg.a_max:g})"
        if not cfg.allow_unstable:
            raise InstabilityError(message, failure_time=initial.t)
        logger.warning(f"{message}; continuing because allow_unstable is set")
    return tau, report


# -- integration --------------------------------------------------------------


@dataclass
class IntegrationDiagnostics:
    tau: float
    stability: StabilityReport
    steps: int = 0
    mass: List[np.ndarray] = field(default_factory=list)
    l2: List[np.ndarray] = field(default_factory=list)
    running_max: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


@dataclass
class Trajectory:
    """Snapshots of one run plus the matching per-snapshot diagnostics."""

    grid: Grid
    states: List[FieldState]
    diagnostics: IntegrationDiagnostics

    @property
    def times(self) -> List[float]:
        return [s.t for s in self.states]

    @property
    def final(self) -> FieldState:
        return self.states[-1]

    def at(self, t: float) -> FieldState:
        for state in self.states:
            if math.isclose(state.t, t, rel_tol=1e-12, abs_tol=1e-12):
                return state
        raise KeyError(t)


def discrete_mass(values: np.ndarray, h: float) -> np.ndarray:
    """Σᵢ θⁿᵢ · h per component."""
    return values.sum(axis=1) * h


def discrete_l2(values: np.ndarray, h: float) -> np.ndarray:
    return np.sqrt((values ** 2).sum(axis=1) * h)


def boundary_warnings(state: FieldState, band: int = BOUNDARY_BAND) -> List[str]:
    """Components whose outer ``band`` nodes exceed 10⁻⁶ of the component max."""
    notes = []
    for n, row in enumerate(state.values, start=1):
        peak = float(np.max(np.abs(row)))
        if peak == 0:
            continue
        edge = float(max(np.max(np.abs(row[:band])), np.max(np.abs(row[-band:]))))
        if edge > BOUNDARY_TOLERANCE * peak:
            notes.append(
                f"component {n}: boundary band max {edge:.3e} exceeds "
                f"{BOUNDARY_TOLERANCE:g} of peak {peak:.3e} at t={state.t:.6g}"
            )
    return notes


def _snapshot_times(t0: float, t_end: float, snapshots: Optional[Sequence[float]]) -> List[float]:
    if snapshots is None:
        return [t0, t_end]
    slack = 1e-12 * max(1.0, abs(t_end))
    times = sorted(set(float(s) for s in snapshots))
    for s in times:
        if s < t0 - slack or s > t_end + slack:
            raise ParameterError(f"snapshot t={s} outside [{t0}, {t_end}]")
    return times


def integrate(
    initial: FieldState,
    coeffs: CoefficientSet,
    grid: Grid,
    t_end: float,
    cfg: Optional[StepperConfig] = None,
    snapshots: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Advance ``initial`` to ``t_end`` recording the requested snapshots.

    The last step before a snapshot (or t_end) is shortened to land on it.

    Raises:
        ParameterError: mismatched shapes, t_end before the initial time,
            snapshots outside the run.
        InstabilityError: τ above tau_max without override, or a
            non-finite value during the run (carries the failure time).
    """
    cfg = cfg or StepperConfig()
    _check_compatible(initial, coeffs, grid)
    t0 = initial.t
    if not math.isfinite(t_end) or t_end < t0:
        raise ParameterError(f"t_end must be >= initial time {t0}, got {t_end}")
    times = _snapshot_times(t0, t_end, snapshots)

    tau, report = resolve_tau(initial, coeffs, grid, cfg, t_end - t0)
    diagnostics = IntegrationDiagnostics(tau=tau, stability=report)
    for note in boundary_warnings(initial):
        logger.warning(note)
        diagnostics.warnings.append(note)

    logger.info(
        f"integrating N={coeffs.n_components} on {grid.point_count} nodes, "
        f"h={grid.h:g}, tau={tau:.6g}, t=[{t0:g}, {t_end:g}]"
    )

    h = grid.h
    slack = 1e-12 * max(1.0, abs(t_end))
    values = initial.values.copy()
    t = t0
    peak = float(np.max(np.abs(values)))
    states: List[FieldState] = []

    def record(at: float) -> None:
        state = FieldState(at, values)
        states.append(state)
        diagnostics.mass.append(discrete_mass(values, h))
        diagnostics.l2.append(discrete_l2(values, h))
        diagnostics.running_max.append(peak)

    targets = sorted(set(times) | {t_end})
    wanted = set(times)
    for target in targets:
        while target - t > slack:
            dt = min(tau, target - t)
            rates = _bracket(values, coeffs, h, cfg.half_step_type4)
            values = values - dt * rates
            t = t + dt
            diagnostics.steps += 1
            if not np.all(np.isfinite(values)):
                logger.error(f"integration blew up at t={t:.6g} after {diagnostics.steps} steps")
                _require_finite(values, t, "value")
            peak = max(peak, float(np.max(np.abs(values))))
        t = target
        if target in wanted:
            record(target)

    for note in boundary_warnings(states[-1]):
        diagnostics.warnings.append(note)
    logger.info(f"finished after {diagnostics.steps} steps, max |theta| = {peak:.6g}")
    return Trajectory(grid=grid, states=states, diagnostics=diagnostics)


@dataclass
class PerturbationReport:
    """‖Δʲ‖ of two runs from initial data differing by δ, and its bound."""

    tau: float
    a_value: float
    initial_norm: float
    norms: np.ndarray
    envelope: np.ndarray

    @property
    def within_bound(self) -> bool:
        return bool(np.all(self.norms <= self.envelope))

    @property
    def worst_ratio(self) -> float:
        return float(np.max(self.norms / self.envelope))


def perturbation_growth(
    initial: FieldState,
    delta: np.ndarray,
    coeffs: CoefficientSet,
    grid: Grid,
    steps: int,
    cfg: Optional[StepperConfig] = None,
    slack: float = 1.5,
) -> PerturbationReport:
    """Run θ and θ + δ side by side for ``steps`` steps of the fixed τ.

    The envelope is slack · e^{aτj/2} · ‖δ‖ with a taken from the initial
    state; norms are discrete L₂ over all components.
    """
    cfg = cfg or StepperConfig()
    _check_compatible(initial, coeffs, grid)
    delta = np.asarray(delta, dtype=float).reshape(initial.values.shape)
    if steps < 1:
        raise ParameterError(f"steps must be >= 1, got {steps}")

    tau, report = resolve_tau(initial, coeffs, grid, cfg, span=0.0)
    h = grid.h
    base = initial.values.copy()
    shifted = base + delta
    initial_norm = float(np.sqrt((delta ** 2).sum() * h))
    norms = np.empty(steps)
    for j in range(steps):
        base = base - tau * _bracket(base, coeffs, h, cfg.half_step_type4)
        shifted = shifted - tau * _bracket(shifted, coeffs, h, cfg.half_step_type4)
        t = initial.t + (j + 1) * tau
        _require_finite(base, t, "value")
        _require_finite(shifted, t, "value")
        norms[j] = np.sqrt(((shifted - base) ** 2).sum() * h)

    j = np.arange(1, steps + 1)
    envelope = slack * initial_norm * np.array([report.growth_envelope(k) for k in j])
    logger.info(
        f"perturbation after {steps} steps: {norms[-1]:.3e} (bound {envelope[-1]:.3e})"
    )
    result = PerturbationReport(
        tau=tau,
        a_value=report.a_value,
        initial_norm=initial_norm,
        norms=norms,
        envelope=envelope,
    )
    logger.debug(f"worst norm-to-envelope ratio {result.worst_ratio:.3f}")
    return result
