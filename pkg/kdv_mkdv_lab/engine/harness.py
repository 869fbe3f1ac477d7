"""Verification layer: norms, errors against closed forms, PDE residuals
and convergence-order studies."""

import asyncio
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .closed_forms import (
    DEFAULT_POLE_THRESHOLD,
    SolutionFamily,
    sample_on_grid,
)
from .core import CoefficientSet, FieldState, Grid, build_grid
from .errors import LabError, ParameterError, PoleError
from .finite_differences import (
    SUPPORTED_ORDERS,
    apply_stencil,
    derivatives,
    mp_weight,
    stencil,
    stencil_offsets,
)
from .precision import DEFAULT_DPS, MPMATH_BACKEND
from .scheme import StepperConfig, Trajectory, integrate

logger = logging.getLogger("kdv-lab.harness")

INTERIOR_MARGIN = 8


def _values(field_like) -> np.ndarray:
    if isinstance(field_like, FieldState):
        return field_like.values
    return np.atleast_2d(np.asarray(field_like, dtype=float))


def l2_norm(values, h: float) -> float:
    """‖V‖ = (Σᵢ Σₙ (vⁿᵢ)² h)^{1/2} over all components and nodes."""
    if not h > 0:
        raise ParameterError(f"h must be positive, got {h}")
    array = _values(values)
    return float(np.sqrt(np.sum(array ** 2) * h))


def _interior(array: np.ndarray, margin: int) -> np.ndarray:
    if margin <= 0:
        return array
    if array.shape[1] <= 2 * margin:
        raise ParameterError(
            f"grid of {array.shape[1]} nodes has no interior beyond {margin} boundary nodes"
        )
    return array[:, margin:-margin]


def _check_same_shape(numeric: FieldState, exact: FieldState) -> None:
    if numeric.values.shape != exact.values.shape:
        raise ParameterError(
            f"numeric shape {numeric.values.shape} does not match exact {exact.values.shape}"
        )


@dataclass
class PercentageProfile:
    """100·|numeric − exact| / maxₓ|exact| per component and node."""

    per_node: np.ndarray
    per_component_max: Tuple[float, ...]

    @property
    def max(self) -> float:
        return max(self.per_component_max) if self.per_component_max else 0.0


def percentage_error(
    numeric: FieldState, exact: FieldState, interior_margin: int = 0
) -> PercentageProfile:
    """Percentage error normalised by the global max of each exact component.

    Raises:
        ParameterError: shape mismatch or an identically zero exact component.
    """
    _check_same_shape(numeric, exact)
    num = _interior(numeric.values, interior_margin)
    ref = _interior(exact.values, interior_margin)
    scale = np.max(np.abs(ref), axis=1)
    if np.any(scale == 0):
        zero = [int(n) + 1 for n in np.flatnonzero(scale == 0)]
        raise ParameterError(f"exact component(s) {zero} identically zero; percentage undefined")
    per_node = 100.0 * np.abs(num - ref) / scale[:, np.newaxis]
    return PercentageProfile(
        per_node=per_node,
        per_component_max=tuple(float(v) for v in np.max(per_node, axis=1)),
    )


@dataclass
class ComponentError:
    l2: float
    linf: float
    percentage_max: Optional[float]


@dataclass
class ErrorReport:
    l2: float
    linf: float
    percentage_max: Optional[float]
    per_component: List[ComponentError] = field(default_factory=list)


def error_report(
    numeric: FieldState,
    exact: FieldState,
    grid: Grid,
    interior_margin: int = INTERIOR_MARGIN,
) -> ErrorReport:
    """L₂, L∞ and percentage errors on the interior of ``grid``.

    The percentage entry is None for components whose exact values vanish.
    """
    _check_same_shape(numeric, exact)
    diff = _interior(numeric.values - exact.values, interior_margin)
    ref = _interior(exact.values, interior_margin)
    per_component = []
    for n in range(diff.shape[0]):
        peak = float(np.max(np.abs(ref[n])))
        linf = float(np.max(np.abs(diff[n])))
        per_component.append(
            ComponentError(
                l2=l2_norm(diff[n], grid.h),
                linf=linf,
                percentage_max=100.0 * linf / peak if peak > 0 else None,
            )
        )
    percentages = [c.percentage_max for c in per_component if c.percentage_max is not None]
    return ErrorReport(
        l2=l2_norm(diff, grid.h),
        linf=float(np.max(np.abs(diff))),
        percentage_max=max(percentages) if percentages else None,
        per_component=per_component,
    )


# -- continuous residuals -------------------------------------------------------


def continuous_rhs(coeffs: CoefficientSet, theta, theta_x, theta_xx, theta_xxx) -> List:
    """θⁿ_t = −[Σ g-terms + dₙθⁿ_xxx] from per-component values and derivatives.

    Entries may be floats, numpy arrays or mpmath numbers.
    """
    n_components = coeffs.n_components
    inputs = {"theta": theta, "theta_x": theta_x, "theta_xx": theta_xx, "theta_xxx": theta_xxx}
    for name, seq in inputs.items():
        if len(seq) != n_components:
            raise ParameterError(f"{name} has {len(seq)} components, expected {n_components}")
    rates = [-float(coeffs.d[n]) * theta_xxx[n] for n in range(n_components)]
    for (n, l, m, k), g in coeffs.nonzero_terms():
        if l == 0:
            term = theta[m] * theta_x[k]
        elif l == 1:
            term = theta[m] ** 2 * theta_x[k]
        elif l == 2:
            term = theta_x[m] * theta_x[k]
        elif l == 3:
            term = theta[m] * theta_xx[k]
        else:
            term = theta[m] * theta[k] * theta_x[k]
        rates[n] = rates[n] - g * term
    return rates


def _sample_jets(evaluate, x, t, h, order: int) -> Dict[str, Tuple[tuple, object]]:
    """name -> ((q, q_x, q_xx, q_xxx), q_t) by central differences."""
    x_samples = {k: evaluate(x + k * h, t) for k in stencil_offsets(order, 3)}
    t_samples = {k: evaluate(x, t + k * h) for k, _ in stencil(order, 1)}
    out = {}
    for name in x_samples[0]:
        spatial = derivatives({k: s[name] for k, s in x_samples.items()}, h, order, 3, mp_weight)
        temporal = apply_stencil({k: s[name] for k, s in t_samples.items()}, h, 1, order, mp_weight)
        out[name] = (spatial, temporal)
    return out


def _validate_fd(fd_step: float, order: int) -> None:
    if not fd_step > 0:
        raise ParameterError(f"fd_step must be positive, got {fd_step}")
    if order not in SUPPORTED_ORDERS:
        raise ParameterError(f"stencil order must be one of {SUPPORTED_ORDERS}, got {order}")


def _residual_sweep(family: SolutionFamily, points, fd_step, order, dps, threshold, equations) -> float:
    _validate_fd(fd_step, order)
    worst = 0.0
    with mpmath.workdps(dps):
        h = mpmath.mpf(fd_step)

        def evaluate(x, t):
            return family.evaluate(x, t, backend=MPMATH_BACKEND, threshold=threshold)

        for x, t in points:
            try:
                jets = _sample_jets(evaluate, mpmath.mpf(x), mpmath.mpf(t), h, order)
            except PoleError as exc:
                raise PoleError(
                    f"pole inside the residual stencil around (x={x}, t={t}): {exc.message}",
                    location=(float(x), float(t)),
                    magnitude=exc.magnitude,
                    cause=exc,
                ) from exc
            for value in equations(jets):
                worst = max(worst, float(abs(value)))
    return worst


def pde_residual(
    family: SolutionFamily,
    coeffs: Optional[CoefficientSet],
    points: Sequence[Tuple[float, float]],
    fd_step: float = 1e-3,
    order: int = 4,
    dps: int = DEFAULT_DPS,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> float:
    """max |θ_t − continuous_rhs| of a closed form over ``points``.

    Both time and space derivatives are central differences of step
    ``fd_step`` at accuracy ``order``; the closed form is evaluated at
    ``dps`` digits. A two-component family is checked against its own
    three equations and ignores ``coeffs``.

    Raises:
        ParameterError: component count does not match the system.
        PoleError: a pole lies inside a stencil.
    """
    if family.name == "two-component":
        return two_component_residual(family, points, fd_step, order, dps, threshold)
    if coeffs is None:
        raise ParameterError(f"family '{family.name}' needs a coefficient set")
    names = family.component_names
    if len(names) != coeffs.n_components:
        raise ParameterError(
            f"family '{family.name}' provides {len(names)} components, system has {coeffs.n_components}"
        )

    def equations(jets):
        theta = [jets[name][0][0] for name in names]
        theta_x = [jets[name][0][1] for name in names]
        theta_xx = [jets[name][0][2] for name in names]
        theta_xxx = [jets[name][0][3] for name in names]
        rates = continuous_rhs(coeffs, theta, theta_x, theta_xx, theta_xxx)
        return [jets[name][1] - rate for name, rate in zip(names, rates)]

    residual = _residual_sweep(family, points, fd_step, order, dps, threshold, equations)
    logger.debug(f"pde residual of {family.name}: {residual:.3e} (fd_step={fd_step})")
    return residual


def two_component_residual(
    family: SolutionFamily,
    points: Sequence[Tuple[float, float]],
    fd_step: float = 1e-3,
    order: int = 4,
    dps: int = DEFAULT_DPS,
    threshold: float = DEFAULT_POLE_THRESHOLD,
) -> float:
    """Residual of (f₂₁, u₁₁, u₂₁) in

        f_t + ½f_xxx + ¾f·u_x + (3/2)u·w = 0
        u_t − ¼u_xxx − (3/2)u·u_x = 0
        w_t + ½w_xxx + ¾w·u_x + (3/2)w_x·u − ¾u·f_xx − ¾u²·f = 0

    with f = f₂₁, u = u₁₁, w = u₂₁.
    """
    if family.name != "two-component":
        raise ParameterError(f"expected a two-component family, got '{family.name}'")
    def equations(jets):
        (f, fx, fxx, fxxx), ft = jets["f21"]
        (u, ux, _, uxxx), ut = jets["u11"]
        (w, wx, _, wxxx), wt = jets["u21"]
        return [
            ft + fxxx / 2 + 0.75 * f * ux + 1.5 * u * w,
            ut - uxxx / 4 - 1.5 * u * ux,
            wt + wxxx / 2 + 0.75 * w * ux + 1.5 * wx * u - 0.75 * u * fxx - 0.75 * u ** 2 * f,
        ]

    residual = _residual_sweep(family, points, fd_step, order, dps, threshold, equations)
    logger.debug(f"two-component residual: {residual:.3e} (fd_step={fd_step})")
    return residual


def point_lattice(x_range, t_range, nx: int = 5, nt: int = 5) -> List[Tuple[float, float]]:
    """nx × nt evaluation points spanning the two ranges."""
    return [
        (float(x), float(t))
        for x in np.linspace(x_range[0], x_range[1], nx)
        for t in np.linspace(t_range[0], t_range[1], nt)
    ]


# -- convergence ----------------------------------------------------------------


def observed_order(error_coarse: float, error_fine: float, refinement: float = 2.0) -> float:
    """log(e_coarse / e_fine) / log(refinement)."""
    if error_coarse <= 0 or error_fine <= 0:
        return math.nan
    return math.log(error_coarse / error_fine) / math.log(refinement)


@dataclass
class ConvergenceRow:
    h: float
    tau: float
    error_l2: float = math.nan
    error_linf: float = math.nan
    percentage_max: Optional[float] = None
    observed_order: Optional[float] = None
    steps: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ConvergenceTable:
    """Rows ordered by decreasing ``parameter`` ("h" or "tau")."""

    rows: List[ConvergenceRow]
    parameter: str = "h"

    def __post_init__(self):
        if self.parameter not in ("h", "tau"):
            raise ParameterError(f"parameter must be 'h' or 'tau', got '{self.parameter}'")
        values = [getattr(r, self.parameter) for r in self.rows]
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ParameterError(f"{self.parameter} must strictly decrease down the rows, got {values}")
        self._fill_orders()

    def _fill_orders(self) -> None:
        for previous, row in zip(self.rows, self.rows[1:]):
            if previous.ok and row.ok:
                ratio = getattr(previous, self.parameter) / getattr(row, self.parameter)
                row.observed_order = observed_order(previous.error_l2, row.error_l2, ratio)
            else:
                row.observed_order = None

    @property
    def orders(self) -> List[float]:
        return [r.observed_order for r in self.rows[1:] if r.observed_order is not None]

    def to_records(self) -> List[Dict]:
        return [
            {
                "h": r.h,
                "tau": r.tau,
                "error_l2": r.error_l2,
                "error_linf": r.error_linf,
                "percentage_max": r.percentage_max,
                "observed_order": r.observed_order,
                "steps": r.steps,
                "status": r.status,
            }
            for r in self.rows
        ]


def run_level(
    coeffs: CoefficientSet,
    family: SolutionFamily,
    x_range: Tuple[float, float],
    h: float,
    t_end: float,
    cfg: StepperConfig,
    t0: float = 0.0,
    interior_margin: int = INTERIOR_MARGIN,
) -> Tuple[ConvergenceRow, Optional[FieldState]]:
    """Integrate one grid level from the closed form at t0 and compare at t_end.

    Module errors are turned into a failed row with the message as status.
    """
    grid = build_grid(x_range[0], x_range[1], h)
    try:
        initial = sample_on_grid(family, grid, t0)
        trajectory = integrate(initial, coeffs, grid, t_end, cfg)
        exact = sample_on_grid(family, grid, t_end)
    except LabError as exc:
        logger.warning(f"level h={h:g} failed: {exc.message}")
        tau = cfg.tau if not cfg.auto_tau else math.nan
        return ConvergenceRow(h=h, tau=tau, status=f"failed: {exc.category}: {exc.message}"), None
    report = error_report(trajectory.final, exact, grid, interior_margin)
    row = ConvergenceRow(
        h=h,
        tau=trajectory.diagnostics.tau,
        error_l2=report.l2,
        error_linf=report.linf,
        percentage_max=report.percentage_max,
        steps=trajectory.diagnostics.steps,
    )
    return row, trajectory.final


def _run_sync(study, kind: str) -> ConvergenceTable:
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(study)
    study.close()
    raise ParameterError(
        f"{kind} convergence study called inside a running event loop; "
        f"await ConvergenceStudyRunner.{kind}() instead"
    )


def convergence_study(
    coeffs: CoefficientSet,
    family: SolutionFamily,
    x_range: Tuple[float, float],
    hs: Sequence[float],
    t_end: float,
    cfg: StepperConfig,
    persistence_path: Optional[str] = None,
) -> ConvergenceTable:
    """Spatial study: one run per h, errors against the closed form at t_end.

    Synchronous entry point; inside a running event loop await
    ``ConvergenceStudyRunner.spatial`` instead.
    """
    from .study_runner import ConvergenceStudyRunner

    runner = ConvergenceStudyRunner(persistence_path=persistence_path)
    return _run_sync(runner.spatial(coeffs, family, x_range, hs, t_end, cfg), "spatial")


def temporal_convergence_study(
    coeffs: CoefficientSet,
    family: SolutionFamily,
    x_range: Tuple[float, float],
    h: float,
    taus: Sequence[float],
    t_end: float,
    cfg: StepperConfig,
    persistence_path: Optional[str] = None,
) -> ConvergenceTable:
    """Self-convergence in τ at fixed h against a run with τ_min/4.

    Synchronous entry point like :func:`convergence_study`.
    """
    from .study_runner import ConvergenceStudyRunner

    runner = ConvergenceStudyRunner(persistence_path=persistence_path)
    return _run_sync(runner.temporal(coeffs, family, x_range, h, taus, t_end, cfg), "temporal")


# -- conservation -------------------------------------------------------------


@dataclass
class ConservationDrift:
    """Relative change of mass and L₂ norm per component, first to last snapshot."""

    mass: np.ndarray
    l2: np.ndarray

    @property
    def max_mass(self) -> float:
        return float(np.max(self.mass))

    @property
    def max_l2(self) -> float:
        return float(np.max(self.l2))


def _relative_change(start: np.ndarray, end: np.ndarray) -> np.ndarray:
    scale = np.where(np.abs(start) > 0, np.abs(start), 1.0)
    return np.abs(end - start) / scale


def conservation_drift(trajectory: Trajectory) -> ConservationDrift:
    diagnostics = trajectory.diagnostics
    if len(diagnostics.mass) < 2:
        raise ParameterError("conservation drift needs at least two snapshots")
    return ConservationDrift(
        mass=_relative_change(diagnostics.mass[0], diagnostics.mass[-1]),
        l2=_relative_change(diagnostics.l2[0], diagnostics.l2[-1]),
    )
