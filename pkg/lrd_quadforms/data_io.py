"""Field, limit-law and statistic file I/O"""

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, Tuple

import numpy as np

from .errors import InvalidConfigError
from .limit_laws import LimitLawEstimate
from .simulator import FieldSample


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_field(path: str, field: FieldSample, fmt: str = "csv") -> Tuple[Path, Path]:
    """
    Write a field as CSV (one row per lattice point, columns k1[,k2],value) or
    flat little-endian float64, plus a JSON metadata sidecar.
    """
    target = Path(path)
    d, m = field.dimension, field.margin
    if fmt == "csv":
        with open(target, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"k{j + 1}" for j in range(d)] + ["value"])
            for idx in np.ndindex(field.values.shape):
                lattice = [i - m + 1 for i in idx]
                writer.writerow(lattice + [repr(float(field.values[idx]))])
    elif fmt == "binary":
        field.values.astype("<f8").tofile(target)
    else:
        raise InvalidConfigError(f"unknown field format '{fmt}', expected csv or binary")
    meta = dict(field.metadata, n=field.n, margin=m, dimension=d, format=fmt, shape=list(field.values.shape))
    sidecar = _sidecar(target)
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
    return target, sidecar


def read_field(path: str) -> FieldSample:
    """Reload a field written by write_field"""
    target = Path(path)
    with open(_sidecar(target), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    shape = tuple(meta["shape"])
    if meta["format"] == "binary":
        values = np.fromfile(target, dtype="<f8").reshape(shape)
    else:
        values = np.empty(shape)
        with open(target, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                if row:
                    idx = tuple(int(k) + meta["margin"] - 1 for k in row[:-1])
                    values[idx] = float(row[-1])
    extra = {k: v for k, v in meta.items() if k not in ("n", "margin", "dimension", "format", "shape")}
    return FieldSample(values, int(meta["n"]), int(meta["margin"]), extra)


def write_limit_law(
    directory: str, estimate: LimitLawEstimate, stem: str = "limit", fmt: str = "csv"
) -> Dict[str, Path]:
    """
    CSV (sample, value) plus JSON metadata for a limit-law estimate. With
    fmt="json" the samples go into the JSON file instead.
    """
    if fmt not in ("csv", "json"):
        raise InvalidConfigError(f"unknown limit-law format '{fmt}', expected csv or json")
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}
    payload = estimate.to_dict()
    if estimate.samples is not None and fmt == "json":
        payload["samples"] = [float(v) for v in estimate.samples]
    elif estimate.samples is not None:
        csv_path = out_dir / f"{stem}.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample", "value"])
            for i, v in enumerate(estimate.samples):
                writer.writerow([i, repr(float(v))])
        written["csv"] = csv_path
    json_path = out_dir / f"{stem}.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
    written["json"] = json_path
    return written


def write_statistics(path: str, rows: Iterable[Tuple[int, int, str, float]]) -> None:
    """Statistic dump with columns replicate,n,statistic,value"""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "n", "statistic", "value"])
        for replicate, n, name, value in rows:
            writer.writerow([replicate, n, name, repr(float(value))])
