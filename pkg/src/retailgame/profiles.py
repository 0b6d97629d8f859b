"""Measured load profiles: CSV ingestion and a synthetic diurnal generator.

CSV layout (UTF-8, header required)::

    timestep,customer_id,load_kwh
    0,1,0.412
    0,2,0.198
    ...

Timesteps are 0-based and contiguous; customers are numbered 1..M.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .errors import DataError
from . import rng as rngmod

HEADER = ["timestep", "customer_id", "load_kwh"]


def ingest_profiles(path: str | Path, n_customers: int) -> np.ndarray:
    """Read a profile CSV into a ``(timesteps, n_customers)`` array of kWh."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read profiles {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path}: not valid UTF-8") from None
    return parse_profiles(text, n_customers, source=str(path))


def parse_profiles(text: str, n_customers: int, source: str = "<profiles>") -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    if [h.strip() for h in header] != HEADER:
        raise DataError(f"{source}: header must be {','.join(HEADER)}, got {','.join(header)}")

    cells: dict[tuple[int, int], float] = {}
    max_t = -1
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DataError(f"{source} line {lineno}: expected 3 fields, got {len(row)}")
        try:
            t = int(row[0])
            cid = int(row[1])
        except ValueError:
            raise DataError(f"{source} line {lineno}: timestep and customer_id must be integers") from None
        try:
            load = float(row[2])
        except ValueError:
            raise DataError(f"{source} line {lineno}: non-numeric load {row[2]!r}") from None
        if not math.isfinite(load):
            raise DataError(f"{source} line {lineno}: non-finite load")
        if load < 0:
            raise DataError(f"{source} line {lineno}: negative load {load} at (timestep={t}, customer={cid})")
        if t < 0:
            raise DataError(f"{source} line {lineno}: negative timestep {t}")
        if not 1 <= cid <= n_customers:
            raise DataError(f"{source} line {lineno}: customer_id {cid} outside 1..{n_customers}")
        if (t, cid) in cells:
            raise DataError(f"{source} line {lineno}: duplicate key (timestep={t}, customer={cid})")
        cells[(t, cid)] = load
        max_t = max(max_t, t)

    if max_t < 0:
        raise DataError(f"{source}: no data rows")
    out = np.empty((max_t + 1, n_customers))
    for t in range(max_t + 1):
        for cid in range(1, n_customers + 1):
            try:
                out[t, cid - 1] = cells[(t, cid)]
            except KeyError:
                raise DataError(f"{source}: missing load for (timestep={t}, customer={cid})") from None
    return out


def write_profiles(profiles: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for t in range(profiles.shape[0]):
        for i in range(profiles.shape[1]):
            w.writerow([t, i + 1, repr(float(profiles[t, i]))])
    return buf.getvalue()


def _bump(hour, centre, width):
    d = (hour - centre + 12.0) % 24.0 - 12.0
    return np.exp(-0.5 * (d / width) ** 2)


def synthesize_profiles(n_customers: int, horizon: int, master_seed: int,
                        steps_per_day: int = 48) -> np.ndarray:
    """Domestic-style loads in kWh per timestep.

    Each customer gets a size factor, a morning and a larger evening peak
    with personal timing jitter, and multiplicative day-to-day noise.
    """
    if n_customers < 1 or horizon < 1:
        raise ValueError("need at least one customer and one timestep")
    hours_per_step = 24.0 / steps_per_day
    hour = (np.arange(horizon) % steps_per_day) * hours_per_step
    out = np.empty((horizon, n_customers))
    for i in range(n_customers):
        g = rngmod.stream(master_seed, "profiles", i + 1)
        size = g.lognormal(0.0, 0.45)
        base = 0.45 + 0.15 * g.random()
        morning = _bump(hour, 7.5 + g.normal(0.0, 0.5), 1.2) * (0.35 + 0.3 * g.random())
        evening = _bump(hour, 18.5 + g.normal(0.0, 0.7), 2.0) * (0.9 + 0.6 * g.random())
        shape = base + morning + evening
        noise = g.lognormal(-0.02, 0.2, size=horizon)
        # kW-scale profile times the step length in hours gives kWh.
        out[:, i] = np.maximum(size * shape * noise * hours_per_step, 0.0)
    return out
