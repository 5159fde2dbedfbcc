"""CSV and JSON artifacts.  Every number is written with 12 significant digits."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .fields import Grid2, ScalarField2, VectorField2

Field = Union[ScalarField2, VectorField2]


def fmt(v) -> str:
    return f"{float(v):.12g}"


def _clean(obj):
    """Round floats to 12 significant digits for JSON; non-finite become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def grid_header(grid: Grid2, time: float) -> str:
    g = grid
    return "# grid " + " ".join([str(g.nx), str(g.ny)] + [fmt(v) for v in
                                                       (g.dx, g.dy, g.x0, g.y0, time)])


def _field_rows(f: Field) -> Iterable[str]:
    g = f.grid
    xs, ys = g.axes()
    if isinstance(f, VectorField2):
        cols = (f.vx, f.vy)
    else:
        cols = (f.values,)
    for i in range(g.nx):
        for j in range(g.ny):
            yield ",".join([str(i), str(j), fmt(xs[i]), fmt(ys[j])]
                           + [fmt(c[i, j]) for c in cols])


def field_to_csv(f: Field, frame: Optional[int] = None) -> str:
    lines = [grid_header(f.grid, f.time)]
    if frame is not None:
        lines.append(f"# frame {frame}")
    lines.append("i,j,x,y,vx,vy" if isinstance(f, VectorField2) else "i,j,x,y,value")
    lines.extend(_field_rows(f))
    return "\n".join(lines) + "\n"


def write_field(path, f: Field, frame: Optional[int] = None) -> Path:
    path = Path(path)
    path.write_text(field_to_csv(f, frame))
    return path


def load_field(path) -> tuple:
    return parse_field(Path(path).read_text())


def parse_field(text: str) -> tuple:
    """Parse field CSV text.  Returns ``(field, frame)``; ``frame`` is None if absent."""
    lines = text.splitlines()
    head = lines[0].split()
    if head[:2] != ["#", "grid"]:
        raise ValueError("missing '# grid' header")
    nx, ny = int(head[2]), int(head[3])
    dx, dy, x0, y0, time = (float(v) for v in head[4:9])
    k = 1
    frame = None
    if lines[k].startswith("# frame"):
        frame = int(lines[k].split()[2])
        k += 1
    cols = lines[k].split(",")
    data = np.loadtxt(lines[k + 1:], delimiter=",", ndmin=2)
    grid = Grid2(nx, ny, dx, dy, x0, y0)
    i = data[:, 0].astype(int)
    j = data[:, 1].astype(int)

    def arr(col):
        out = np.zeros((nx, ny))
        out[i, j] = data[:, col]
        return out

    if cols[4:] == ["vx", "vy"]:
        return VectorField2(grid, arr(4), arr(5), time), frame
    return ScalarField2(grid, arr(4), time), frame


def pattern_to_csv(xs, intensity) -> str:
    rows = ["x,intensity"] + [f"{fmt(x)},{fmt(v)}" for x, v in zip(xs, intensity)]
    return "\n".join(rows) + "\n"


def table_to_csv(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    rows = [",".join(header)]
    for vals in zip(*columns):
        rows.append(",".join("" if v is None else fmt(v) for v in vals))
    return "\n".join(rows) + "\n"


def read_table(path) -> dict:
    """Read a headed numeric CSV into ``{column: array}``."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.genfromtxt(lines[1:], delimiter=",", ndmin=2)
    return {h: data[:, k] for k, h in enumerate(header)}
