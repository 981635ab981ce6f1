"""Plain-text file formats: loops as CSV, everything else as JSON.

Every file starts with a versioned format tag so that readers can refuse
documents they do not understand.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .loopspace import DiscreteLoop

LOOP_FORMAT = "g2loops.loop/1"
FIELD_FORMAT = "g2loops.field"


def dumps_json(doc) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def loop_to_csv(loop: DiscreteLoop) -> str:
    buf = io.StringIO()
    buf.write(f"# format: {LOOP_FORMAT}\n")
    buf.write(f"# period: {loop.period!r}\n")
    buf.write(",".join(["z"] + [f"x{i + 1}" for i in range(loop.dim)]) + "\n")
    for z, row in zip(loop.z, loop.points):
        buf.write(",".join(repr(float(v)) for v in (z, *row)) + "\n")
    return buf.getvalue()


def loop_from_csv(text: str) -> DiscreteLoop:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# format: {LOOP_FORMAT}":
        raise ValueError(f"not a loop file (expected header '# format: {LOOP_FORMAT}')")
    period = 2 * np.pi
    rows = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "period":
                period = float(value)
            continue
        if line.startswith("z"):
            continue
        rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("loop file has no sample rows")
    loop = DiscreteLoop(data[:, 1:], period=period)
    if np.abs(data[:, 0] - loop.z).max() > 1e-9 * period:
        raise ValueError("loop samples must sit at uniform parameter values z_k = period * k / N")
    return loop


def read_loop(path) -> DiscreteLoop:
    with open(path, encoding="utf-8") as fh:
        return loop_from_csv(fh.read())


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def field_to_json(values):
    values = np.asarray(values, dtype=float)
    return {"format": FIELD_FORMAT, "version": 1, "values": values.tolist()}


def read_field(path):
    doc = read_json(path)
    if doc.get("format") != FIELD_FORMAT:
        raise ValueError(f"not a field file (expected format {FIELD_FORMAT!r})")
    return np.asarray(doc["values"], dtype=float)
