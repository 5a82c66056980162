"""Lossless CSV/JSON serialization of configurations and results.

Floats are written with 17 significant digits so round trips are exact at
full binary precision.  Data files carry no timestamps; run metadata lives
in a separate JSON field excluded from byte comparisons.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .geometry import Rect
from .laws import parse_law
from .sampler import Configuration


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def save_configuration(config: Configuration, csv_path, json_path) -> None:
    """Write discs as CSV plus a JSON sidecar with the sampling parameters."""
    csv_path, json_path = Path(csv_path), Path(json_path)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cx", "cy", "radius"])
        for cx, cy, radius in zip(config.x, config.y, config.r):
            writer.writerow([fmt_float(cx), fmt_float(cy), fmt_float(radius)])
    sidecar = {
        "window": [config.window.x0, config.window.y0, config.window.x1, config.window.y1],
        "lambda": config.lam,
        "lambda0": config.lam0,
        "law": config.law.spec_string(),
        "seed": config.seed,
        "pad": config.pad,
        "missed_bound": _jsonable(config.missed_bound),
        "ids": [int(i) for i in config.ids],
    }
    json_path.write_text(json.dumps(sidecar, sort_keys=True, indent=1) + "\n")


def load_configuration(csv_path, json_path) -> Configuration:
    csv_path, json_path = Path(csv_path), Path(json_path)
    meta = json.loads(json_path.read_text())
    xs, ys, rs = [], [], []
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["cx", "cy", "radius"]:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
            rs.append(float(row[2]))
    missed = meta["missed_bound"]
    if missed == "inf":
        missed = math.inf
    return Configuration(
        x=np.asarray(xs),
        y=np.asarray(ys),
        r=np.asarray(rs),
        ids=np.asarray(meta["ids"], dtype=np.uint64),
        window=Rect(*meta["window"]),
        lam=meta["lambda"],
        lam0=meta["lambda0"],
        law=parse_law(meta["law"]),
        seed=meta["seed"],
        pad=meta["pad"],
        missed_bound=missed,
    )


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Write a data table; floats are rendered with full precision."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [fmt_float(v) if isinstance(v, float) else v for v in row]
            )


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
