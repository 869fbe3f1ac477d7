"""
子命令实现 (simulate / analytic / residual / converge / stability / singularities)

Each subcommand is registered with :func:`command` and receives a fully
validated :class:`RunConfig`. :func:`run` dispatches and turns lab errors
into the exit status: 0 success, 2 validation, 3 runtime.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .closed_forms import (
    DEFAULT_POLE_THRESHOLD,
    REALITY_THRESHOLD,
    SolutionFamily,
    sample_on_grid,
    singular_points,
)
from .core import FieldState, Grid
from .darboux import compatibility_residual, compound_sampler, two_component_sampler
from .errors import LabError, NonRealSolutionError, ParameterError
from .harness import (
    convergence_study,
    error_report,
    percentage_error,
    pde_residual,
    point_lattice,
    temporal_convergence_study,
)
from .output import (
    read_snapshot,
    snapshot_filename,
    write_profile_svg,
    write_samples,
    write_singularities,
    write_snapshots,
    write_table,
)
from .run_config import RunConfig
from .scheme import integrate, resolve_tau, stability_exponent

logger = logging.getLogger("kdv-lab.cli")

COMMANDS: Dict[str, Callable[[RunConfig], "CommandResult"]] = {}


@dataclass
class CommandResult:
    """子命令结果: 写出的文件与摘要"""
    files: List[Path] = field(default_factory=list)
    summary: Dict[str, object] = field(default_factory=dict)


@dataclass
class RunOutcome:
    exit_code: int
    files: List[Path] = field(default_factory=list)
    summary: Dict[str, object] = field(default_factory=dict)
    message: str = ""


def command(name: str):
    """注册子命令"""
    def register(func):
        COMMANDS[name] = func
        return func
    return register


def run(cfg: RunConfig) -> RunOutcome:
    """
    执行配置中的子命令

    Returns:
        RunOutcome: 退出码 0/2/3，已写出的文件，摘要
    """
    handler = COMMANDS.get(cfg.subcommand)
    if handler is None:
        return RunOutcome(exit_code=2, message=f"unknown subcommand '{cfg.subcommand}'")
    try:
        result = handler(cfg)
    except LabError as exc:
        logger.error(f"{cfg.subcommand} failed ({exc.category}): {exc.message}")
        return RunOutcome(exit_code=exc.exit_code, message=exc.message)
    except Exception as exc:
        logger.error(f"{cfg.subcommand} failed unexpectedly: {exc}", exc_info=True)
        return RunOutcome(exit_code=3, message=str(exc))
    logger.info(f"{cfg.subcommand} finished, {len(result.files)} file(s) written")
    return RunOutcome(exit_code=0, files=result.files, summary=result.summary)


def _output_dir(cfg: RunConfig) -> Path:
    directory = Path(cfg.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _labels(cfg: RunConfig, n: int, family: Optional[SolutionFamily] = None) -> List[str]:
    if family is not None and family.name != "zero" and len(family.component_names) == n:
        return list(family.component_names)
    if cfg.system is not None:
        return list(cfg.system.component_labels(n))
    return [f"theta{i}" for i in range(1, n + 1)]


def _initial_state(cfg: RunConfig, grid: Grid, n_components: int) -> FieldState:
    if cfg.initial.csv is not None:
        csv_grid, state = read_snapshot(cfg.initial.csv, t=cfg.time.t0)
        if csv_grid.point_count != grid.point_count or not math.isclose(csv_grid.h, grid.h, rel_tol=1e-9):
            raise ParameterError(
                f"initial CSV grid ({csv_grid.point_count} nodes, h={csv_grid.h:g}) does not match "
                f"config grid ({grid.point_count} nodes, h={grid.h:g})"
            )
        if state.n_components != n_components:
            raise ParameterError(
                f"initial CSV has {state.n_components} components, system has {n_components}"
            )
        return state
    return sample_on_grid(cfg.family(n_components), grid, cfg.time.t0)


# -- simulate -----------------------------------------------------------------


@command("simulate")
def simulate(cfg: RunConfig) -> CommandResult:
    """积分 IVP 并写出快照、诊断和 (可选) 误差剖面"""
    coeffs = cfg.system.coefficients()
    grid = cfg.grid.build()
    initial = _initial_state(cfg, grid, coeffs.n_components)
    trajectory = integrate(
        initial,
        coeffs,
        grid,
        cfg.time.t_end,
        cfg.stepper_config(),
        snapshots=cfg.time.snapshot_times(),
    )
    out = _output_dir(cfg)
    result = CommandResult()
    prefix = cfg.output.prefix
    family = cfg.family(coeffs.n_components) if cfg.initial.family is not None else None
    labels = _labels(cfg, coeffs.n_components, family)

    if cfg.output.csv:
        result.files += write_snapshots(out, grid, trajectory.states, cfg.output.long_format, prefix)

    diagnostics = trajectory.diagnostics
    records = []
    for state, mass, l2, peak in zip(
        trajectory.states, diagnostics.mass, diagnostics.l2, diagnostics.running_max
    ):
        record = {"t": state.t, "running_max": peak}
        for n, label in enumerate(labels):
            record[f"mass_{label}"] = float(mass[n])
            record[f"l2_{label}"] = float(l2[n])
        records.append(record)
    result.files.append(write_table(out / f"{prefix}_diagnostics.csv", records))

    if cfg.output.svg:
        for state in trajectory.states:
            path = out / snapshot_filename(state.t, prefix).replace(".csv", ".svg")
            columns = {label: state.component(n) for n, label in enumerate(labels)}
            result.files.append(write_profile_svg(path, grid.nodes, columns, title=f"t = {state.t:g}"))

    if cfg.output.error_profile:
        result.files += _error_profiles(cfg, family, grid, trajectory.states, labels, out)

    result.summary = {
        "tau": diagnostics.tau,
        "steps": diagnostics.steps,
        "tau_max": diagnostics.stability.tau_max,
        "warnings": list(diagnostics.warnings),
    }
    return result


def _error_profiles(cfg, family, grid, states, labels, out) -> List[Path]:
    files: List[Path] = []
    prefix = cfg.output.prefix
    for state in states:
        exact = sample_on_grid(family, grid, state.t)
        try:
            profile = percentage_error(state, exact)
        except ParameterError as exc:
            logger.warning(f"no error profile at t={state.t:g}: {exc.message}")
            continue
        report = error_report(state, exact, grid)
        logger.info(
            f"t={state.t:g}: l2={report.l2:.3e}, linf={report.linf:.3e}, "
            f"max percentage={profile.max:.3f}%"
        )
        records = []
        for k, x in enumerate(grid.nodes):
            record = {"x": float(x)}
            for n, label in enumerate(labels):
                record[f"percent_{label}"] = float(profile.per_node[n, k])
            records.append(record)
        name = snapshot_filename(state.t, f"{prefix}_error")
        files.append(write_table(out / name, records))
        if cfg.output.svg:
            columns = {label: profile.per_node[n] for n, label in enumerate(labels)}
            files.append(
                write_profile_svg(
                    out / name.replace(".csv", ".svg"),
                    grid.nodes,
                    columns,
                    title=f"percentage error, t = {state.t:g}",
                    ylabel="percent",
                )
            )
    return files


# -- analytic -----------------------------------------------------------------


def _sample_masked(family: SolutionFamily, x: np.ndarray, t: float):
    """Sample with pole nodes dropped; returns (x_kept, values, dropped)."""
    with np.errstate(all="ignore"):
        values = family.evaluate(x, t, threshold=0.0)
        den = np.abs(np.asarray(family.denominator(x, t), dtype=complex))
    columns = [np.broadcast_to(np.asarray(values[name], dtype=complex), x.shape) for name in family.component_names]
    keep = den >= DEFAULT_POLE_THRESHOLD
    for column in columns:
        keep &= np.isfinite(column)
    rows = []
    for name, column in zip(family.component_names, columns):
        kept = column[keep]
        scale = max(1.0, float(np.max(np.abs(kept.real)))) if kept.size else 1.0
        imag = float(np.max(np.abs(kept.imag))) if kept.size else 0.0
        if imag > REALITY_THRESHOLD * scale:
            raise NonRealSolutionError(
                f"component {name} of family '{family.name}' has imaginary part {imag:.3e} at t={t}"
            )
        rows.append(kept.real)
    return x[keep], np.vstack(rows), int(np.count_nonzero(~keep))


@command("analytic")
def analytic(cfg: RunConfig) -> CommandResult:
    """在网格上采样解析解，极点处的节点被剔除并标记"""
    family = cfg.family()
    grid = cfg.grid.build()
    out = _output_dir(cfg)
    result = CommandResult()
    times = cfg.time.snapshots or [cfg.time.t0]
    dropped_total = 0

    for t in sorted(times):
        x, values, dropped = _sample_masked(family, grid.nodes, t)
        dropped_total += dropped
        if dropped:
            logger.warning(f"t={t:g}: dropped {dropped} node(s) at or near poles")

        markers: List[float] = []
        if family.name == "r-family" and abs(family.params["r"]) >= 1:
            points = singular_points(
                family.params["a"], family.params["r"], (grid.x_min, grid.x_max), (t, t), t_samples=1
            )
            markers = [p.x for p in points if p.kind == "zero"]
            result.files.append(write_singularities(out / snapshot_filename(t, "singularities"), points))

        if cfg.output.csv:
            result.files.append(write_samples(out / snapshot_filename(t, "analytic"), x, values))
        if cfg.output.svg:
            columns = {name: values[n] for n, name in enumerate(family.component_names)}
            path = out / snapshot_filename(t, "analytic").replace(".csv", ".svg")
            result.files.append(
                write_profile_svg(path, x, columns, title=f"{family.name}, t = {t:g}", markers=markers)
            )
    result.summary = {"family": family.name, "times": sorted(times), "dropped_nodes": dropped_total}
    return result


# -- residual -----------------------------------------------------------------


@command("residual")
def residual(cfg: RunConfig) -> CommandResult:
    """闭式解的 PDE 残差与 Lax 对相容性残差 (两个差分步长)"""
    section = cfg.residual
    family = cfg.family()
    coeffs = cfg.system.coefficients() if cfg.system is not None else None
    points = point_lattice(section.x_range, section.t_range, section.nx, section.nt)
    steps = (section.fd_step, section.fd_step / 2)
    records = []

    values = [pde_residual(family, coeffs, points, h, section.order, section.dps) for h in steps]
    records.append(_residual_record("pde", family.name, steps, section.order, values))

    sampler = None
    if family.name == "two-component":
        sampler = two_component_sampler(family.closed_form_params())
    elif family.name in ("three-component", "r-family"):
        sampler = compound_sampler(family.closed_form_params())
    if sampler is not None:
        for x, t in section.compat_points:
            values = [
                compatibility_residual(sampler, x, t, h, section.compat_order, section.dps) for h in steps
            ]
            record = _residual_record("compatibility", family.name, steps, section.compat_order, values)
            record.update({"x": x, "t": t})
            records.append(record)

    out = _output_dir(cfg)
    fieldnames = ("check", "family", "x", "t", "order", "fd_step", "residual", "fd_step_half", "residual_half", "ratio")
    path = write_table(out / "residuals.csv", records, fieldnames)
    return CommandResult(files=[path], summary={"max_residual": max(r["residual_half"] for r in records)})


def _residual_record(check, family, steps, order, values) -> Dict[str, object]:
    ratio = values[0] / values[1] if values[1] > 0 else math.nan
    logger.info(f"{check} residual ({family}): {values[0]:.3e} -> {values[1]:.3e}, ratio {ratio:.2f}")
    return {
        "check": check,
        "family": family,
        "order": order,
        "fd_step": steps[0],
        "residual": values[0],
        "fd_step_half": steps[1],
        "residual_half": values[1],
        "ratio": ratio,
    }


# -- converge -----------------------------------------------------------------


@command("converge")
def converge(cfg: RunConfig) -> CommandResult:
    """空间或时间收敛性研究"""
    section = cfg.converge
    coeffs = cfg.system.coefficients()
    family = cfg.family(coeffs.n_components)
    x_range = (cfg.grid.x_min, cfg.grid.x_max)
    out = _output_dir(cfg)
    persistence = str(out / "convergence.json") if section.persist else None

    if section.kind == "spatial":
        table = convergence_study(
            coeffs, family, x_range, section.hs, cfg.time.t_end, cfg.stepper_config(), persistence
        )
    else:
        table = temporal_convergence_study(
            coeffs, family, x_range, cfg.grid.h, section.taus, cfg.time.t_end, cfg.stepper_config(), persistence
        )

    files = [write_table(out / "convergence.csv", table.to_records())]
    if persistence is None:
        summary_path = out / "convergence.json"
        with open(summary_path, "w", encoding="utf-8") as f:
            json.dump({"parameter": table.parameter, "rows": table.to_records()}, f, ensure_ascii=False, indent=2)
        files.append(summary_path)
    else:
        files.append(Path(persistence))
    failed = [r.status for r in table.rows if not r.ok]
    for status in failed:
        logger.warning(f"convergence level {status}")
    return CommandResult(files=files, summary={"parameter": table.parameter, "orders": table.orders, "failed": failed})


# -- stability ----------------------------------------------------------------


@command("stability")
def stability(cfg: RunConfig) -> CommandResult:
    """在初值上计算 a(τ, h) 与 tau_max"""
    coeffs = cfg.system.coefficients()
    grid = cfg.grid.build()
    initial = _initial_state(cfg, grid, coeffs.n_components)
    stepper = cfg.stepper_config()
    if stepper.auto_tau:
        _, report = resolve_tau(initial, coeffs, grid, stepper, span=max(cfg.time.t_end - cfg.time.t0, 0.0))
    else:
        report = stability_exponent(initial, coeffs, grid, float(stepper.tau), stepper.a_max)
    for note in report.diagnostics:
        logger.warning(note)
    record = {
        "h": grid.h,
        "tau": report.tau,
        "a": report.a_value,
        "X": report.X,
        "Y": report.Y,
        "D": report.D,
        "a_max": report.a_max,
        "tau_max": report.tau_max,
        "stable": report.stable,
        "diagnostics": "; ".join(report.diagnostics),
    }
    path = write_table(_output_dir(cfg) / "stability.csv", [record])
    return CommandResult(files=[path], summary=record)


# -- singularities ------------------------------------------------------------


@command("singularities")
def singularities(cfg: RunConfig) -> CommandResult:
    """列出 r 族解在有限窗口内的奇点"""
    section = cfg.singularities
    points = singular_points(section.a, section.r, section.x_range, section.t_range, section.t_samples)
    path = write_singularities(_output_dir(cfg) / "singularities.csv", points)
    logger.info(f"{len(points)} singular point(s) for a={section.a:g}, r={section.r:g}")
    return CommandResult(files=[path], summary={"count": len(points)})
