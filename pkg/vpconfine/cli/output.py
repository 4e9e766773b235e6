"""Atomic CSV and JSON artifacts with fixed float formatting."""

import csv
import io
import json
import os
import tempfile

import numpy as np


def format_float(value):
    return f"{float(value):.17g}"


def _cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def atomic_write(path, text):
    """Write ``text`` next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.remove(temp)
        raise
    return path


def write_csv(path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return atomic_write(path, buffer.getvalue())


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(path, data):
    text = json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"
    return atomic_write(path, text)


def node_rows(field):
    """(r[, z], kind, value) rows for every lattice node in C order."""
    grid = field.grid
    r = grid.r_nodes.ravel()
    z = grid.z_nodes.ravel()
    kind = grid.kind.ravel()
    values = np.asarray(field.values).ravel()
    for n in range(values.size):
        if grid.ndim == 1:
            yield (r[n], int(kind[n]), values[n])
        else:
            yield (r[n], z[n], int(kind[n]), values[n])


def node_header(grid, name):
    return ["r", "kind", name] if grid.ndim == 1 else ["r", "z", "kind", name]


def write_history(path, history):
    rows = [(h.step, h.increment, h.residual, h.contraction) if hasattr(h, "step")
            else (n + 1, float("nan"), h, float("nan"))
            for n, h in enumerate(history)]
    return write_csv(path, ["step", "increment", "residual", "contraction"], rows)
