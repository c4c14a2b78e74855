"""CSV/JSON serialisation. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .phi import ExponentialRep, PhiFunction
from .sequences import TwoSidedSequence

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_rows(path_or_file, header, rows):
    """CSV with a header; float cells formatted with :func:`fmt`."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return fmt(v)
        return str(v)

    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(header)
        w.writerows([cell(v) for v in r] for r in rows)
        return
    with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
        write_rows(fh, header, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)  # "inf" instead of non-standard Infinity
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    d = _jsonable(obj)
    if isinstance(d, dict) and "format_version" not in d:
        d = {"format_version": FORMAT_VERSION, **d}
    return json.dumps(d, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_sequence(seq: TwoSidedSequence, path, meta: dict | None = None):
    """``k,value`` rows plus a sidecar ``<name>.json`` with the tail metadata."""
    write_rows(path, ("k", "value"), zip(seq.indices.tolist(), seq.values))
    info = {
        "offset": seq.offset,
        "length": len(seq),
        "tail_mode": seq.tail_mode,
        "deficit": seq.deficit,
        "open_left": seq.open_left,
        "open_right": seq.open_right,
    }
    if meta:
        info["meta"] = meta
    write_json(sidecar_path(path), info)


def read_sequence(path) -> TwoSidedSequence:
    """Read a ``k,value`` CSV; without a sidecar the tails are exact zeros.

    Indices must be consecutive.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip() == "k":
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    ks = [int(r[0]) for r in rows]
    vals = [float(r[1]) for r in rows]
    if any(b != a + 1 for a, b in zip(ks, ks[1:])):
        raise ValueError(f"{path}: indices must be consecutive")
    side = sidecar_path(path)
    if side.exists():
        info = read_json(side)
        return TwoSidedSequence(
            ks[0],
            vals,
            info.get("tail_mode", "exact_zero"),
            float(info.get("deficit", 0.0)),
            bool(info.get("open_left", True)),
            bool(info.get("open_right", True)),
        )
    return TwoSidedSequence(ks[0], vals)


def read_rep(path) -> ExponentialRep:
    """Representation JSON; a bare φ (no ``phi`` key) gets b± = c = 0."""
    d = read_json(path)
    if "phi" in d:
        return ExponentialRep.from_dict(d)
    return ExponentialRep(0.0, 0.0, 0.0, PhiFunction.from_dict(d))
