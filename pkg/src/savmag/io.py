"""Energy traces (CSV) and vector-field files (OVF 2.0 text, plain CSV)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import GridMismatch
from .mesh import Grid

TRACE_COLUMNS = (
    "step",
    "time",
    "exchange",
    "anisotropy",
    "magnetostatic",
    "zeeman",
    "r2",
    "total",
    "modified_total",
    "normalized_total",
    "max_norm_deviation",
    "step_wall_time",
)


def write_trace(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([row.step] + [repr(float(getattr(row, c))) for c in TRACE_COLUMNS[1:]])


def read_trace(path) -> dict:
    """Load a trace CSV into a dict of numpy columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected trace header {header}")
        data = [[float(v) for v in row] for row in reader if row]
    arr = np.array(data, dtype=float).reshape(-1, len(TRACE_COLUMNS))
    cols = {name: arr[:, k] for k, name in enumerate(TRACE_COLUMNS)}
    cols["step"] = cols["step"].astype(int)
    return cols


def write_ovf(path, m, grid: Grid, title: str = "m", time: float = 0.0) -> None:
    """Write a cell-centered OVF 2.0 file with a text data block."""
    nz, ny, nx = grid.shape
    ox, oy, oz = grid.origin
    lx, ly, lz = grid.extent
    header = [
        "# OOMMF OVF 2.0",
        "# Segment count: 1",
        "# Begin: Segment",
        "# Begin: Header",
        f"# Title: {title}",
        "# meshtype: rectangular",
        "# meshunit: m",
        f"# xmin: {ox!r}",
        f"# ymin: {oy!r}",
        f"# zmin: {oz!r}",
        f"# xmax: {ox + lx!r}",
        f"# ymax: {oy + ly!r}",
        f"# zmax: {oz + lz!r}",
        "# valuedim: 3",
        "# valuelabels: m_x m_y m_z",
        "# valueunits: 1 1 1",
        f"# Desc: Total simulation time: {time!r} s",
        f"# xbase: {grid.hx / 2!r}",
        f"# ybase: {grid.hy / 2!r}",
        f"# zbase: {grid.hz / 2!r}",
        f"# xnodes: {nx}",
        f"# ynodes: {ny}",
        f"# znodes: {nz}",
        f"# xstepsize: {grid.hx!r}",
        f"# ystepsize: {grid.hy!r}",
        f"# zstepsize: {grid.hz!r}",
        "# End: Header",
        "# Begin: Data Text",
    ]
    values = np.asarray(m, dtype=float).reshape(3, -1).T
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        for v in values:
            fh.write(" ".join(repr(float(c)) for c in v) + "\n")
        fh.write("# End: Data Text\n# End: Segment\n")


def read_ovf(path):
    """Read a text OVF 2.0 file; returns ``(m, grid)``."""
    meta = {}
    data = []
    in_data = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                low = body.lower()
                if low.startswith("begin: data"):
                    if "text" not in low:
                        raise ValueError("only text OVF data blocks are supported")
                    in_data = True
                elif low.startswith("end: data"):
                    in_data = False
                elif ":" in body:
                    k, v = body.split(":", 1)
                    meta[k.strip().lower()] = v.strip()
                continue
            if in_data:
                data.append([float(t) for t in line.split()])
    nx, ny, nz = (int(meta[k]) for k in ("xnodes", "ynodes", "znodes"))
    h = [float(meta[k]) for k in ("xstepsize", "ystepsize", "zstepsize")]
    origin = tuple(float(meta.get(k, 0.0)) for k in ("xmin", "ymin", "zmin"))
    grid = Grid(nx, ny, nz, *h, origin=origin)
    arr = np.array(data, dtype=float)
    if arr.shape != (grid.n_cells, 3):
        raise ValueError(f"{path}: expected {grid.n_cells} rows of 3 values, got {arr.shape}")
    return np.ascontiguousarray(arr.T.reshape(grid.vector_shape)), grid


def write_field_csv(path, m, grid: Grid) -> None:
    x, y, z = grid.cell_centers()
    cols = np.column_stack([x.ravel(), y.ravel(), z.ravel(), np.asarray(m).reshape(3, -1).T])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "y", "z", "mx", "my", "mz"))
        writer.writerows([[repr(float(v)) for v in row] for row in cols])


def read_field_csv(path, grid: Grid) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if arr.shape != (grid.n_cells, 6):
        raise GridMismatch(f"{path}: expected {grid.n_cells} rows of 6 columns, got {arr.shape}")
    return np.ascontiguousarray(arr[:, 3:6].T.reshape(grid.vector_shape))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
