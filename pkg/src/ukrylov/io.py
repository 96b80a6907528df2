"""Deterministic CSV and JSON output."""
import json
import os

import mpmath as mp
import numpy as np

__version__ = "0.1.0"


def fmt(x, digits=17):
    """Scientific notation with ``digits`` significant digits.

    Doubles never print more than 17 digits; mpmath numbers print as many
    as requested.
    """
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, mp.mpf):
        if not mp.isfinite(x):
            return str(float(x))
        return mp.nstr(x, digits, strip_zeros=False, min_fixed=1, max_fixed=0)
    v = float(x)
    if not np.isfinite(v):
        return str(v)
    return "%.*e" % (min(digits, 17) - 1, v)


def write_csv(path, header, rows, digits=17):
    """UTF-8 CSV with a header row and '\\n' line endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v, digits) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_sidecar(csv_path, config, seeds, precision, extra=None):
    """``<name>.json`` next to a CSV recording everything the CSV depends on."""
    meta = {
        "config": config,
        "seeds": list(seeds),
        "precision_digits": int(precision),
        "version": __version__,
        "file": os.path.basename(csv_path),
    }
    if extra:
        meta.update(extra)
    write_json(os.path.splitext(csv_path)[0] + ".json", meta)
