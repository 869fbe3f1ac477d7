"""Run configuration: YAML text validated into pydantic models.

Example::

    subcommand: simulate
    system: {preset: kdv-mkdv-3}
    grid: {x_min: -20, x_max: 20, h: 0.25}
    time: {t_end: 0.1, tau: auto, snapshots: [0.0, 0.1]}
    initial: {family: r-family, params: {a: 1, r: 0.5}}
    output: {directory: out, svg: true}

Unknown keys anywhere are errors. Validation messages name the dotted
field path and, where the key is present in the text, its line.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .closed_forms import FAMILY_COMPONENTS, SolutionFamily, make_family
from .core import CoefficientSet, Grid, build_grid, preset_system
from .errors import ConfigValidationError, ParameterError
from .scheme import StepperConfig

logger = logging.getLogger("kdv-lab.config")

SUBCOMMANDS = ("simulate", "analytic", "residual", "converge", "stability", "singularities")


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GRecord(StrictModel):
    n: int
    l: int
    m: int
    k: int
    value: float


class DRecord(StrictModel):
    n: int
    value: float


class SystemConfig(StrictModel):
    """Either a preset name or explicit 1-based coefficient records."""

    preset: Optional[str] = None
    n_components: Optional[int] = Field(default=None, ge=1)
    g: List[GRecord] = Field(default_factory=list)
    d: List[DRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _preset_or_records(self):
        if self.preset is None and self.n_components is None:
            raise ValueError("give either 'preset' or 'n_components' with g/d records")
        if self.preset is not None and (self.n_components is not None or self.g or self.d):
            raise ValueError("'preset' cannot be combined with explicit coefficient records")
        return self

    def coefficients(self) -> CoefficientSet:
        if self.preset is not None:
            return preset_system(self.preset).coefficients
        return CoefficientSet.from_records(
            self.n_components,
            [r.model_dump() for r in self.g],
            [r.model_dump() for r in self.d],
        )

    def component_labels(self, n: int) -> Tuple[str, ...]:
        if self.preset is not None:
            labels = preset_system(self.preset).component_labels
            if len(labels) == n:
                return labels
        return tuple(f"theta{i}" for i in range(1, n + 1))


class GridConfig(StrictModel):
    x_min: float
    x_max: float
    h: float = Field(gt=0)

    def build(self) -> Grid:
        return build_grid(self.x_min, self.x_max, self.h)


class TimeConfig(StrictModel):
    t0: float = 0.0
    t_end: float = Field(default=0.0, ge=0)
    tau: Union[Literal["auto"], float] = "auto"
    snapshots: List[float] = Field(default_factory=list)

    @field_validator("tau")
    @classmethod
    def _positive_tau(cls, v):
        if v != "auto" and not (math.isfinite(v) and v > 0):
            raise ValueError("tau must be positive or 'auto'")
        return v

    def snapshot_times(self) -> List[float]:
        return sorted(self.snapshots) if self.snapshots else [self.t0, self.t_end]


class StepperSection(StrictModel):
    stability_margin: float = Field(default=0.5, gt=0, le=1)
    a_max: float = Field(default=10.0, gt=0)
    allow_unstable: bool = False
    half_step_type4: bool = False


class InitialConfig(StrictModel):
    family: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    components: Optional[List[str]] = None
    csv: Optional[str] = None

    @model_validator(mode="after")
    def _family_or_csv(self):
        if (self.family is None) == (self.csv is None):
            raise ValueError("give exactly one of 'family' or 'csv'")
        return self


class OutputConfig(StrictModel):
    directory: str = "output"
    csv: bool = True
    svg: bool = False
    long_format: bool = False
    error_profile: bool = False
    prefix: str = "snapshot"


class ResidualConfig(StrictModel):
    x_range: Tuple[float, float] = (-2.0, 2.0)
    t_range: Tuple[float, float] = (0.0, 0.2)
    nx: int = Field(default=5, ge=1)
    nt: int = Field(default=5, ge=1)
    fd_step: float = Field(default=1e-3, gt=0)
    order: Literal[2, 4] = 4
    compat_points: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.5, 0.1)])
    compat_order: Literal[2, 4] = 4
    dps: int = Field(default=30, ge=15)


class ConvergeConfig(StrictModel):
    kind: Literal["spatial", "temporal"] = "spatial"
    hs: List[float] = Field(default_factory=list)
    taus: List[float] = Field(default_factory=list)
    persist: bool = False


class SingularitiesConfig(StrictModel):
    a: float
    r: float
    x_range: Tuple[float, float]
    t_range: Tuple[float, float]
    t_samples: int = Field(default=21, ge=1)


class RunConfig(StrictModel):
    subcommand: Literal["simulate", "analytic", "residual", "converge", "stability", "singularities"]
    system: Optional[SystemConfig] = None
    grid: Optional[GridConfig] = None
    time: TimeConfig = Field(default_factory=TimeConfig)
    stepper: StepperSection = Field(default_factory=StepperSection)
    initial: Optional[InitialConfig] = None
    output: OutputConfig = Field(default_factory=OutputConfig)
    residual: Optional[ResidualConfig] = None
    converge: Optional[ConvergeConfig] = None
    singularities: Optional[SingularitiesConfig] = None

    def stepper_config(self) -> StepperConfig:
        return StepperConfig(
            tau=self.time.tau,
            stability_margin=self.stepper.stability_margin,
            a_max=self.stepper.a_max,
            allow_unstable=self.stepper.allow_unstable,
            half_step_type4=self.stepper.half_step_type4,
        )

    def family(self, n_components: Optional[int] = None) -> SolutionFamily:
        """The initial/reference family; ``zero`` takes N from the system."""
        params = dict(self.initial.params)
        if self.initial.family == "zero" and "n_components" not in params:
            if n_components is None:
                raise ParameterError("family 'zero' needs n_components or a system")
            params["n_components"] = n_components
        return make_family(self.initial.family, params, self.initial.components)


# -- parsing ------------------------------------------------------------------


def _node_line(text: str, loc) -> Optional[int]:
    """1-based line of the YAML node addressed by ``loc``, if present."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(key)), None)
            if match is None:
                key_node = next((k for k, _ in node.value if k.value == str(key)), None)
                return key_node.start_mark.line + 1 if key_node is not None else line
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        line = node.start_mark.line + 1
    return line


def _first_error(exc: ValidationError) -> Tuple[Tuple, str]:
    err = exc.errors()[0]
    loc = tuple(p for p in err["loc"] if not (isinstance(p, str) and p.startswith("function-")))
    # drop union/literal discriminator tags pydantic appends to the path
    loc = tuple(p for p in loc if p not in ("float", "literal['auto']", "int"))
    return loc, err["msg"]


def _fail(path: str, message: str, text: Optional[str] = None, loc=(), cause=None):
    line = _node_line(text, loc) if text is not None and loc else None
    raise ConfigValidationError(f"{path}: {message}" if path else message, cause=cause, line=line)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate configuration text.

    Raises:
        ConfigValidationError: YAML syntax error (with line), unknown
            key, bad value, or failed cross-validation.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigValidationError(f"invalid YAML: {problem}", cause=exc, line=line) from exc
    if not isinstance(data, dict):
        raise ConfigValidationError("config must be a mapping of sections")

    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        loc, msg = _first_error(exc)
        _fail(".".join(str(p) for p in loc), msg, text, loc, cause=exc)
    cross_validate(cfg, text)
    logger.debug(f"parsed {cfg.subcommand} config")
    return cfg


def _require(cfg: RunConfig, section: str, text: Optional[str]) -> Any:
    value = getattr(cfg, section)
    if value is None:
        # an absent section is reported at the subcommand that needs it
        loc = (section,) if text is not None and _node_line(text, (section,)) else ("subcommand",)
        _fail(section, f"section required for subcommand '{cfg.subcommand}'", text, loc)
    return value


def cross_validate(cfg: RunConfig, text: Optional[str] = None) -> None:
    """Fail-fast checks that need more than one section.

    Raises:
        ConfigValidationError: names the offending dotted path.
    """
    sub = cfg.subcommand
    n_components = None

    if sub in ("simulate", "converge", "stability"):
        system = _require(cfg, "system", text)
        try:
            n_components = system.coefficients().n_components
        except ParameterError as exc:
            _fail("system", exc.message, text, ("system",), cause=exc)
    elif sub == "residual" and cfg.system is not None:
        try:
            n_components = cfg.system.coefficients().n_components
        except ParameterError as exc:
            _fail("system", exc.message, text, ("system",), cause=exc)

    if sub in ("simulate", "analytic", "stability"):
        grid = _require(cfg, "grid", text)
        try:
            grid.build()
        except ParameterError as exc:
            _fail("grid", exc.message, text, ("grid",), cause=exc)
    if sub == "converge":
        grid = _require(cfg, "grid", text)
        if grid.x_max <= grid.x_min:
            _fail("grid.x_max", "must exceed grid.x_min", text, ("grid", "x_max"))

    if sub in ("simulate", "analytic", "residual", "converge", "stability"):
        initial = _require(cfg, "initial", text)
        if initial.family is not None:
            if initial.family != "zero" and initial.family not in FAMILY_COMPONENTS:
                _fail("initial.family", f"unknown solution family '{initial.family}'", text, ("initial", "family"))
            try:
                family = cfg.family(n_components)
            except ParameterError as exc:
                _fail("initial.params", exc.message, text, ("initial", "params"), cause=exc)
            if n_components is not None and sub != "residual" and len(family.component_names) != n_components:
                _fail(
                    "initial.components",
                    f"family '{family.name}' provides {len(family.component_names)} components "
                    f"{family.component_names}, system has {n_components}",
                    text,
                    ("initial",),
                )
        elif sub in ("analytic", "residual", "converge"):
            _fail("initial.family", f"subcommand '{sub}' needs a closed-form family", text, ("initial",))

    if sub == "simulate":
        t = cfg.time
        if t.t_end < t.t0:
            _fail("time.t_end", f"must be >= time.t0={t.t0}", text, ("time", "t_end"))
        for i, s in enumerate(t.snapshots):
            if s < t.t0 or s > t.t_end:
                _fail(f"time.snapshots.{i}", f"{s} outside [{t.t0}, {t.t_end}]", text, ("time", "snapshots", i))
        if cfg.output.error_profile and cfg.initial.family in (None, "zero"):
            _fail("output.error_profile", "needs an analytic initial family", text, ("output", "error_profile"))

    if sub == "residual":
        _require(cfg, "residual", text)
        if cfg.initial.family not in ("two-component",) and cfg.system is None:
            _fail("system", f"family '{cfg.initial.family}' needs a system to check against", text)

    if sub == "converge":
        conv = _require(cfg, "converge", text)
        levels = conv.hs if conv.kind == "spatial" else conv.taus
        name = "hs" if conv.kind == "spatial" else "taus"
        if len(levels) < 3:
            _fail(f"converge.{name}", "needs at least 3 levels", text, ("converge", name))
        if any(v <= 0 for v in levels):
            _fail(f"converge.{name}", "levels must be positive", text, ("converge", name))
        if cfg.time.t_end <= cfg.time.t0:
            _fail("time.t_end", "must exceed time.t0 for a convergence study", text, ("time", "t_end"))

    if sub == "singularities":
        sing = _require(cfg, "singularities", text)
        for name in ("x_range", "t_range"):
            lo, hi = getattr(sing, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                _fail(f"singularities.{name}", f"must be a finite [lo, hi], got [{lo}, {hi}]", text, ("singularities", name))
        if sing.a == 0:
            _fail("singularities.a", "must be nonzero", text, ("singularities", "a"))


def serialize_config(cfg: RunConfig) -> str:
    """Canonical YAML; parse_config(serialize_config(c)) == c."""
    data = cfg.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def load_config(path) -> RunConfig:
    """Read a config file; a relative ``initial.csv`` is resolved against it."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigValidationError(f"cannot read config {path}: {exc}", cause=exc) from exc
    cfg = parse_config(text)
    if cfg.initial is not None and cfg.initial.csv is not None:
        csv_path = Path(cfg.initial.csv)
        if not csv_path.is_absolute():
            resolved = str(path.parent / csv_path)
            cfg = cfg.model_copy(update={"initial": cfg.initial.model_copy(update={"csv": resolved})})
    logger.info(f"loaded {cfg.subcommand} config from {path}")
    return cfg


def apply_overrides(
    cfg: RunConfig,
    h: Optional[float] = None,
    tau: Optional[Union[float, str]] = None,
    t_end: Optional[float] = None,
    long_format: Optional[bool] = None,
) -> RunConfig:
    """Return a revalidated copy with command-line overrides applied."""
    data = cfg.model_dump(mode="python", exclude_none=True)
    if h is not None:
        if cfg.grid is None:
            raise ConfigValidationError("--h given but the config has no grid section")
        data["grid"]["h"] = h
    if tau is not None:
        data.setdefault("time", {})["tau"] = tau
    if t_end is not None:
        data.setdefault("time", {})["t_end"] = t_end
    if long_format is not None:
        data.setdefault("output", {})["long_format"] = long_format
    try:
        updated = RunConfig.model_validate(data)
    except ValidationError as exc:
        loc, msg = _first_error(exc)
        raise ConfigValidationError(f"{'.'.join(str(p) for p in loc)}: {msg}", cause=exc) from exc
    cross_validate(updated)
    return updated
