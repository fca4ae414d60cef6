"""Plain-text artifacts: CSV tables, gnuplot data files and boundary-signal files.

Every file starts with a ``# config-hash: <hex>`` comment so results can be
traced back to the configuration that produced them.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .boundary_control import BoundarySignal
from .errors import ParameterError


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass
class Table:
    """Column-named numeric table (a trajectory, an eigen table, a summary)."""

    columns: list[str]
    rows: list[Sequence] = field(default_factory=list)
    comment: str = ""

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ParameterError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)

    def __len__(self) -> int:
        return len(self.rows)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, table: Table, chash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# config-hash: {chash}\n")
        if table.comment:
            fh.write(f"# {table.comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> Table:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    return Table(cols, [row for row in reader])


def write_dat(path, table: Table, chash: str) -> Path:
    """Whitespace-separated columns with the column order in a header comment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(f"# config-hash: {chash}\n")
        fh.write("# " + " ".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    return path


def write_signal_csv(path, signal: BoundarySignal, chash: str, labels=None) -> Path:
    labels = labels or [f"b{i}" for i in range(signal.n_boundary)]
    table = Table(["t", *labels])
    for k, t in enumerate(signal.times):
        table.add(t, *signal.values[:, k])
    return write_csv(path, table, chash)


def read_signal_csv(path, n_boundary: int | None = None) -> BoundarySignal:
    """Load a boundary signal; the time column must be uniform and start at 0."""
    table = read_csv(path)
    if not table.columns or table.columns[0].strip() != "t":
        raise ParameterError(f"{path}: first column must be 't'")
    data = np.array(table.rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ParameterError(f"{path}: need at least two time rows")
    if n_boundary is not None and data.shape[1] - 1 != n_boundary:
        raise ParameterError(f"{path}: expected {n_boundary} boundary columns, got {data.shape[1] - 1}")
    return BoundarySignal(data[:, 0], data[:, 1:].T)


def emit_plot_data(obj, directory, stem: str, chash: str) -> list[Path]:
    """gnuplot-ready files for a :class:`Table` or a control result.

    A control result yields three files: the control signal, a one-row
    summary and the per-mode target/achieved states.
    """
    directory = Path(directory)
    if isinstance(obj, Table):
        return [write_dat(directory / f"{stem}.dat", obj, chash)]
    from .controllability import ControlResult  # local to avoid a cycle
    if not isinstance(obj, ControlResult):
        raise ParameterError(f"cannot emit plot data for {type(obj).__name__}")
    return [write_dat(directory / f"{stem}_{name}.dat", tab, chash)
            for name, tab in control_tables(obj).items()]


def control_tables(res, sigma_min: float = float("nan"), T: float | None = None) -> dict[str, Table]:
    u = res.control
    ctl = Table(["t", *[f"b{i}" for i in range(u.n_boundary)]])
    for k, t in enumerate(u.times):
        ctl.add(t, *u.values[:, k])
    summ = Table(["eps", "T", "m", "iterations", "residual", "sigma_min", "converged"])
    summ.add(res.regularization_eps, u.T if T is None else T, res.target.y.size,
             res.cg_iterations, res.residual_energy_norm,
             res.gramian_min_eig_estimate if np.isnan(sigma_min) else sigma_min, res.converged)
    st = Table(["n", "target_y", "target_v", "achieved_y", "achieved_v"])
    for n in range(res.target.y.size):
        st.add(n + 1, res.target.y[n], res.target.v[n], res.achieved.y[n], res.achieved.v[n])
    return {"control": ctl, "summary": summ, "states": st}
