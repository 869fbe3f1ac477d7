"""CSV and SVG writers for snapshots, tables and singular points.

Snapshot CSV: header ``x,theta1,...,thetaN``, one row per node, values
printed with 17 significant digits so re-reading reproduces the state.
"""

import csv
import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .closed_forms import SingularPoint
from .core import FieldState, Grid
from .errors import ParameterError

logger = logging.getLogger("kdv-lab.output")

FLOAT_FORMAT = "%.17g"
_SNAPSHOT_TIME = re.compile(r"_t(-?\d+\.\d+)\.csv$")


def snapshot_filename(t: float, prefix: str = "snapshot") -> str:
    """Fixed-width, sortable name such as ``snapshot_t0000000.10000000.csv``."""
    return f"{prefix}_t{t:017.8f}.csv"


def snapshot_header(n_components: int) -> str:
    return ",".join(["x"] + [f"theta{n}" for n in range(1, n_components + 1)])


def write_snapshot(path, grid: Grid, state: FieldState) -> Path:
    path = Path(path)
    if state.point_count != grid.point_count:
        raise ParameterError(
            f"state has {state.point_count} nodes, grid has {grid.point_count}"
        )
    table = np.column_stack([grid.nodes, state.values.T])
    np.savetxt(
        path,
        table,
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=snapshot_header(state.n_components),
        comments="",
    )
    return path


def write_samples(path, x: np.ndarray, values: np.ndarray) -> Path:
    """Snapshot layout for sampled closed forms; nodes may be non-uniform."""
    path = Path(path)
    values = np.atleast_2d(values)
    np.savetxt(
        path,
        np.column_stack([x, values.T]),
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=snapshot_header(values.shape[0]),
        comments="",
    )
    return path


def read_snapshot(path, t: Optional[float] = None) -> Tuple[Grid, FieldState]:
    """Re-read a snapshot CSV.

    The time is taken from ``t`` or, failing that, from the file name.

    Raises:
        ParameterError: malformed header, too few rows, or no time.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
    columns = header.split(",")
    if not columns or columns[0] != "x" or len(columns) < 2:
        raise ParameterError(f"{path}: header must start with 'x,theta1', got '{header}'")
    if columns != snapshot_header(len(columns) - 1).split(","):
        raise ParameterError(f"{path}: unexpected columns {columns}")
    if t is None:
        match = _SNAPSHOT_TIME.search(path.name)
        if match is None:
            raise ParameterError(f"{path}: snapshot time not given and not in the file name")
        t = float(match.group(1))

    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if table.shape[1] != len(columns):
        raise ParameterError(f"{path}: rows have {table.shape[1]} columns, header has {len(columns)}")
    x = table[:, 0]
    if len(x) < 2:
        raise ParameterError(f"{path}: need at least two nodes")
    grid = Grid.from_points(x[0], (x[-1] - x[0]) / (len(x) - 1), len(x))
    return grid, FieldState(t, table[:, 1:].T)


def write_long_format(path, grid: Grid, states: Sequence[FieldState]) -> Path:
    """Rows of (t, x, component, value) for every snapshot."""
    path = Path(path)
    blocks = []
    for state in states:
        for n in range(state.n_components):
            blocks.append(
                np.column_stack(
                    [
                        np.full(grid.point_count, state.t),
                        grid.nodes,
                        np.full(grid.point_count, n + 1),
                        state.values[n],
                    ]
                )
            )
    table = np.vstack(blocks) if blocks else np.empty((0, 4))
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header="t,x,component,value", comments="")
    return path


def write_snapshots(
    directory,
    grid: Grid,
    states: Sequence[FieldState],
    long_format: bool = False,
    prefix: str = "snapshot",
) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if long_format:
        paths = [write_long_format(directory / f"{prefix}_long.csv", grid, states)]
    else:
        paths = [write_snapshot(directory / snapshot_filename(s.t, prefix), grid, s) for s in states]
    logger.info(f"wrote {len(paths)} snapshot file(s) to {directory}")
    return paths


def write_table(path, records: Sequence[Mapping], fieldnames: Optional[Sequence[str]] = None) -> Path:
    """Plain CSV table; ``None`` entries are written as empty cells."""
    path = Path(path)
    records = list(records)
    if fieldnames is None:
        fieldnames = list(records[0].keys()) if records else []
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({k: _cell(v) for k, v in record.items()})
    return path


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_singularities(path, points: Iterable[SingularPoint]) -> Path:
    return write_table(
        path,
        [{"x": p.x, "t": p.t, "denominator": p.denominator, "kind": p.kind} for p in points],
        fieldnames=("x", "t", "denominator", "kind"),
    )


def write_profile_svg(
    path,
    x: np.ndarray,
    columns: Dict[str, np.ndarray],
    title: str = "",
    markers: Sequence[float] = (),
    ylabel: str = "value",
) -> Path:
    """Line plot of each column against x; ``markers`` draw vertical pole lines."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name, values in columns.items():
        ax.plot(x, values, label=name, linewidth=1.2)
    for xm in markers:
        ax.axvline(xm, color="grey", linestyle="--", linewidth=0.8)
    if markers:
        finite = np.concatenate([np.abs(v[np.isfinite(v)]) for v in columns.values()])
        if finite.size:
            limit = 2.0 * float(np.percentile(finite, 95)) or 1.0
            ax.set_ylim(-limit, limit)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
