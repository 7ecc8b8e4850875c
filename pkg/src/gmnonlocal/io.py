"""On-disk artifacts: field snapshots, diagnostics CSV, heatmap images.

Snapshot layout (little endian): an 8-byte magic ``GMFIELD1``, a header of
nx (uint32), ny (uint32) and time (float64), then nx*ny float64 values in
row-major order.  Readers reject a wrong magic, a short payload and
trailing bytes.
"""

from __future__ import annotations

import csv
import struct

import numpy as np
from matplotlib import colormaps
from PIL import Image, PngImagePlugin

from .core import Field, Grid, GridMismatchError, make_grid
from .diagnostics import DiagnosticsRecord

SNAPSHOT_MAGIC = b"GMFIELD1"
_HEADER = struct.Struct("<IId")

CSV_SCHEMA_COMMENT = "# diagnostics-csv-v1"
CSV_COLUMNS = ("t", "min_u", "max_u", "min_v", "max_v",
               "l2_u", "l2_v", "l4_u", "l4_v", "y", "Lb", "Yj_u", "Yj_v")


def write_snapshot(field: Field, t: float, path: str):
    payload = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(_HEADER.pack(field.grid.nx, field.grid.ny, float(t)))
        fh.write(payload.tobytes())


def read_snapshot(path: str, grid: Grid | None = None) -> tuple[Field, float]:
    """Read a snapshot back; without a grid, unit cell spacing is assumed."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path!r} is not a field snapshot (bad magic)")
    head_end = len(SNAPSHOT_MAGIC) + _HEADER.size
    if len(blob) < head_end:
        raise ValueError(f"{path!r}: truncated snapshot header")
    nx, ny, t = _HEADER.unpack(blob[len(SNAPSHOT_MAGIC):head_end])
    expected = head_end + nx * ny * 8
    if len(blob) < expected:
        raise ValueError(f"{path!r}: truncated snapshot payload "
                         f"({len(blob) - head_end} of {nx * ny * 8} bytes)")
    if len(blob) > expected:
        raise ValueError(f"{path!r}: {len(blob) - expected} trailing bytes")
    if grid is None:
        grid = make_grid(nx, ny, float(nx), float(ny) if ny > 1 else 1.0)
    elif (grid.nx, grid.ny) != (nx, ny):
        raise GridMismatchError(f"snapshot is {nx}x{ny}, grid is "
                                f"{grid.nx}x{grid.ny}")
    values = np.frombuffer(blob[head_end:], dtype="<f8").astype(np.float64)
    return Field(grid=grid, values=values), float(t)


class CsvSink:
    """Streams diagnostics records to CSV with a fixed column schema.

    The l2/l4 columns require those exponents in the configured norm set.
    Usable as a callable sink and as a context manager; rows are flushed
    as they arrive so an aborted run keeps its partial series.
    """

    def __init__(self, path: str, lb_set=(2, 4)):
        if not {2, 4} <= set(lb_set):
            raise ValueError("csv output requires norm exponents 2 and 4 "
                             f"in lb_set, got {tuple(lb_set)}")
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._fh.write(CSV_SCHEMA_COMMENT + "\n")
        self._writer.writerow(CSV_COLUMNS)
        self._fh.flush()

    def __call__(self, rec: DiagnosticsRecord):
        row = [rec.t, rec.min_u, rec.max_u, rec.min_v, rec.max_v,
               rec.lb_norms[2][0], rec.lb_norms[2][1],
               rec.lb_norms[4][0], rec.lb_norms[4][1],
               rec.y, rec.lb, rec.yj_u, rec.yj_v]
        self._writer.writerow([repr(float(x)) for x in row])
        self._fh.flush()

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_diagnostics_csv(path: str) -> dict[str, np.ndarray]:
    """Load a diagnostics CSV into column arrays keyed by header name."""
    with open(path, "r", newline="") as fh:
        rows = [row for row in csv.reader(fh)
                if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path!r}: no header row")
    header, data = rows[0], rows[1:]
    values = np.array([[float(cell) for cell in row] for row in data],
                      dtype=np.float64).reshape(len(data), len(header))
    return {name: values[:, i] for i, name in enumerate(header)}


def render_heatmap(field: Field, path: str, scale: int = 1,
                   cmap: str = "viridis", t: float | None = None):
    """Render a field as a PNG, low y at the bottom like a plot.

    The value range is written into PNG text chunks (field_min, field_max,
    and time when given) so images stay self-describing.  A constant field
    maps to the middle of the colormap.
    """
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    vals = field.as_2d()
    vmin, vmax = float(vals.min()), float(vals.max())
    if vmax > vmin:
        norm = (vals - vmin) / (vmax - vmin)
    else:
        norm = np.full_like(vals, 0.5)
    rgba = colormaps[cmap](norm, bytes=True)
    img = Image.fromarray(np.flipud(rgba[..., :3]), mode="RGB")
    if scale > 1:
        img = img.resize((field.grid.nx * scale, field.grid.ny * scale),
                         Image.NEAREST)
    meta = PngImagePlugin.PngInfo()
    meta.add_text("field_min", repr(vmin))
    meta.add_text("field_max", repr(vmax))
    if t is not None:
        meta.add_text("time", repr(float(t)))
    img.save(path, pnginfo=meta)
