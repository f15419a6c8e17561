"""Timing harness: run a (scheme, dt) matrix and tabulate wall time or FAIL."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .config import SimulationConfig
from .demag import DemagKernel
from .io import read_trace
from .runner import run


@dataclass(frozen=True)
class BenchEntry:
    scheme: str
    dt: float
    wall_time: float
    energy: float
    relative_error: float
    ok: bool
    error: str | None = None

    @property
    def cell(self) -> str:
        return f"{self.wall_time:.2f}" if self.ok else "FAIL"


def load_reference_energy(path) -> float:
    """Final ``normalized_total`` from a run summary JSON or trace CSV."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path) as fh:
            data = json.load(fh)
        return float(data["energy_density"])
    return float(read_trace(path)["normalized_total"][-1])


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


def bench(config: SimulationConfig, pairs, reference: float, tol: float = 0.01) -> list:
    """Run every ``(scheme, dt)`` pair of ``pairs`` on ``config``.

    An entry succeeds when the run finishes without error and its final
    energy density is within ``tol`` (relative) of ``reference``.
    """
    kernel = DemagKernel(config.grid, enabled=config.demag)
    entries = []
    for scheme, dt in pairs:
        cfg = replace(config, scheme=scheme, dt=float(dt), steady_threshold=0.0, write=False)
        res = run(cfg, kernel=kernel, raise_on_failure=False)
        e = res.summary["energy_density"]
        err = relative_error(e, reference)
        ok = not res.summary["failed"] and err < tol
        entries.append(BenchEntry(scheme, float(dt), res.summary["wall_time"], e, err, ok, res.summary["error"]))
    return entries


def format_table(entries) -> str:
    """Scheme x dt table in the layout of a CPU-time comparison."""
    dts = sorted({e.dt for e in entries}, reverse=True)
    schemes = list(dict.fromkeys(e.scheme for e in entries))
    lookup = {(e.scheme, e.dt): e.cell for e in entries}
    header = ["scheme \\ dt"] + [f"{dt:g}" for dt in dts]
    rows = [[s] + [lookup.get((s, dt), "") for dt in dts] for s in schemes]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    fmt = " | ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), "-+-".join("-" * w for w in widths)]
    lines += [fmt.format(*r) for r in rows]
    return "\n".join(lines)
