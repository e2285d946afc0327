"""Ingest free-surface reference fields and compare model output to them.

Reference data arrives as CSV exports of a volume-of-fluid simulation:
header ``x,z,fraction,u`` for vertical-plane fields or
``x,y,z,fraction,u,v`` for full 3D fields, SI units, rows ordered with z
varying fastest, ``#`` starting comment lines.  An optional comment
``# time: <seconds>`` tags the snapshot instant.

The free surface is defined by counting cells whose water fraction
reaches a threshold (0.45 by default): h = dz * count.  The count is not
required to be contiguous, which reproduces the staircase look of
thresholded interface data.  Depth-averaged velocities are plain means of
u over the counted water cells; a fraction-weighted mean is available as
an option.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "ParseError",
    "ComparisonError",
    "ReferenceDataset",
    "ProfileSlice",
    "ModelFields",
    "SliceRecord",
    "ComparisonReport",
    "load_dataset",
    "load_model_snapshot",
    "extract_height",
    "depth_average",
    "vertical_profile",
    "compare",
    "write_report",
]

DEFAULT_THRESHOLD = 0.45

_HEADERS = {
    ("x", "z", "fraction", "u"): 1,
    ("x", "y", "z", "fraction", "u", "v"): 2,
}


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ComparisonError(ValueError):
    pass


@dataclass
class ReferenceDataset:
    """Structured fraction/velocity fields on a (x[, y], z) grid, SI units."""

    x: np.ndarray
    z: np.ndarray
    fraction: np.ndarray  # (nx[, ny], nz) in [0, 1]
    u: np.ndarray
    y: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    time: Optional[float] = None
    clip_warnings: int = 0

    @property
    def horizontal_dims(self) -> int:
        return 1 if self.y is None else 2


@dataclass
class ProfileSlice:
    """Vertical velocity profile extracted at the nearest grid column."""

    z: np.ndarray
    u: np.ndarray
    x: float
    y: Optional[float]
    distance: float

    def pairs(self):
        return list(zip(self.z, self.u))


def _scan_rows(path: Path):
    """Parse rows by hand, reporting the first malformed line."""
    header = None
    header_width = 0
    rows = []
    time = None
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if body.lower().startswith("time:"):
                    try:
                        time = float(body.split(":", 1)[1])
                    except ValueError as exc:
                        raise ParseError(f"bad time comment {body!r}", lineno) from exc
                continue
            if header is None:
                header = tuple(c.strip().lower() for c in text.split(","))
                header_width = len(header)
                continue
            parts = text.split(",")
            if len(parts) != header_width:
                raise ParseError(
                    f"expected {header_width} columns, got {len(parts)}", lineno
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(f"non-numeric value in {text!r}", lineno) from exc
    if header is None:
        raise ParseError(f"{path}: empty file (no header)")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float), time


def _axis(values: np.ndarray, name: str) -> np.ndarray:
    ax = np.unique(values)
    if ax.size < 1 or np.any(~np.isfinite(ax)):
        raise ParseError(f"axis {name} is degenerate")
    return ax


def _grid_index(values: np.ndarray, axis: np.ndarray, name: str) -> np.ndarray:
    idx = np.searchsorted(axis, values)
    idx = np.clip(idx, 0, len(axis) - 1)
    if not np.allclose(axis[idx], values, rtol=0.0, atol=1e-9 * max(1.0, np.abs(axis).max())):
        raise ParseError(f"coordinate off the {name} axis lattice")
    return idx


def load_dataset(path) -> ReferenceDataset:
    """Read and validate a reference CSV; fractions are clipped to [0, 1]
    with the number of clipped entries recorded."""
    path = Path(path)
    header, data, time = _scan_rows(path)
    if header not in _HEADERS:
        raise ParseError(f"unrecognized header {','.join(header)!r}")
    hdims = _HEADERS[header]

    x = _axis(data[:, 0], "x")
    if hdims == 1:
        z = _axis(data[:, 1], "z")
        shape = (len(x), len(z))
        ix = _grid_index(data[:, 0], x, "x")
        iz = _grid_index(data[:, 1], z, "z")
        flat = ix * len(z) + iz
        frac_col, vel_cols = 2, (3,)
        y = None
    else:
        y = _axis(data[:, 1], "y")
        z = _axis(data[:, 2], "z")
        shape = (len(x), len(y), len(z))
        ix = _grid_index(data[:, 0], x, "x")
        iy = _grid_index(data[:, 1], y, "y")
        iz = _grid_index(data[:, 2], z, "z")
        flat = (ix * len(y) + iy) * len(z) + iz
        frac_col, vel_cols = 3, (4, 5)

    total = int(np.prod(shape))
    if len(data) != total:
        raise ParseError(
            f"grid is {shape} = {total} cells but file has {len(data)} rows"
        )
    seen = np.zeros(total, dtype=bool)
    seen[flat] = True
    if not seen.all():
        raise ParseError("rows do not cover the grid exactly once")

    def scatter(col):
        out = np.empty(total)
        out[flat] = data[:, col]
        return out.reshape(shape)

    fraction = scatter(frac_col)
    clipped = int(np.count_nonzero((fraction < 0.0) | (fraction > 1.0)))
    if clipped:
        warnings.warn(f"{path}: clipped {clipped} fraction values into [0, 1]")
        fraction = np.clip(fraction, 0.0, 1.0)
    u = scatter(vel_cols[0])
    v = scatter(vel_cols[1]) if hdims == 2 else None
    return ReferenceDataset(
        x=x, y=y, z=z, fraction=fraction, u=u, v=v, time=time, clip_warnings=clipped
    )


def _uniform_dz(z: np.ndarray) -> float:
    dz = np.diff(z)
    if dz.size == 0:
        raise ValueError("need at least 2 vertical layers")
    if not np.allclose(dz, dz[0], rtol=1e-9, atol=0.0):
        raise ValueError("non-uniform z spacing is unsupported")
    return float(dz[0])


def extract_height(ds: ReferenceDataset, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Column height h = dz * #(fraction >= threshold), per column."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    dz = _uniform_dz(ds.z)
    count = np.count_nonzero(ds.fraction >= threshold, axis=-1)
    return dz * count


def depth_average(
    ds: ReferenceDataset,
    heights: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    fraction_weighted: bool = False,
    component: str = "u",
) -> np.ndarray:
    """Mean velocity over the water cells of each column; 0 where dry."""
    vel = ds.u if component == "u" else ds.v
    if vel is None:
        raise ValueError(f"dataset has no component {component!r}")
    mask = ds.fraction >= threshold
    if fraction_weighted:
        weight = ds.fraction * mask
    else:
        weight = mask.astype(float)
    wsum = weight.sum(axis=-1)
    out = np.zeros_like(wsum, dtype=float)
    wet = wsum > 0
    out[wet] = (vel * weight).sum(axis=-1)[wet] / wsum[wet]
    return out


def vertical_profile(
    ds: ReferenceDataset,
    x: float,
    y: Optional[float] = None,
    threshold: float = DEFAULT_THRESHOLD,
    component: str = "u",
) -> ProfileSlice:
    """u(z) over the water cells of the column nearest to the request."""
    if x < ds.x[0] or x > ds.x[-1]:
        raise ValueError(f"x={x} outside domain [{ds.x[0]}, {ds.x[-1]}]")
    ix = int(np.argmin(np.abs(ds.x - x)))
    vel = ds.u if component == "u" else ds.v
    if ds.horizontal_dims == 1:
        col_f, col_u = ds.fraction[ix], vel[ix]
        ycoord = None
        dist = abs(ds.x[ix] - x)
    else:
        if y is None:
            raise ValueError("3D dataset needs a y coordinate")
        if y < ds.y[0] or y > ds.y[-1]:
            raise ValueError(f"y={y} outside domain [{ds.y[0]}, {ds.y[-1]}]")
        iy = int(np.argmin(np.abs(ds.y - y)))
        col_f, col_u = ds.fraction[ix, iy], vel[ix, iy]
        ycoord = float(ds.y[iy])
        dist = float(np.hypot(ds.x[ix] - x, ds.y[iy] - y))
    wet = col_f >= threshold
    return ProfileSlice(
        z=ds.z[wet].copy(),
        u=col_u[wet].copy(),
        x=float(ds.x[ix]),
        y=ycoord,
        distance=float(dist),
    )


@dataclass
class ModelFields:
    """Re-dimensionalized model snapshot fields on cell centers (SI)."""

    x: np.ndarray
    h: np.ndarray
    um: np.ndarray
    y: Optional[np.ndarray] = None
    vm: Optional[np.ndarray] = None
    time: Optional[float] = None


def load_model_snapshot(path) -> ModelFields:
    """Read a solver snapshot CSV (``x,h,um,...`` or ``x,y,h,um,vm,...``)."""
    header, data, time = _scan_rows(Path(path))
    cols = {name: i for i, name in enumerate(header)}
    for need in ("x", "h", "um"):
        if need not in cols:
            raise ParseError(f"{path}: missing column {need!r}")
    if "y" in cols:
        x = _axis(data[:, cols["x"]], "x")
        y = _axis(data[:, cols["y"]], "y")
        if len(x) * len(y) != len(data):
            raise ParseError(f"{path}: rows do not fill the x/y grid")
        ix = _grid_index(data[:, cols["x"]], x, "x")
        iy = _grid_index(data[:, cols["y"]], y, "y")
        flat = ix * len(y) + iy

        def scatter(col):
            out = np.empty(len(x) * len(y))
            out[flat] = data[:, col]
            return out.reshape(len(x), len(y))

        return ModelFields(
            x=x,
            y=y,
            h=scatter(cols["h"]),
            um=scatter(cols["um"]),
            vm=scatter(cols["vm"]) if "vm" in cols else None,
            time=time,
        )
    order = np.argsort(data[:, cols["x"]])
    data = data[order]
    return ModelFields(
        x=data[:, cols["x"]],
        h=data[:, cols["h"]],
        um=data[:, cols["um"]],
        time=time,
    )


@dataclass
class SliceRecord:
    quantity: str
    axis: Optional[str]
    location: Optional[float]
    coord: np.ndarray
    model: np.ndarray
    reference: np.ndarray


@dataclass
class ComparisonReport:
    norms: dict
    slices: list = field(default_factory=list)
    model_time: Optional[float] = None
    reference_time: Optional[float] = None


def _piecewise_constant(xm: np.ndarray, fm: np.ndarray, xq: np.ndarray) -> np.ndarray:
    """Sample a cell-centered field at query points, nearest-cell."""
    idx = np.clip(np.searchsorted(xm, xq), 1, len(xm) - 1)
    left = np.abs(xq - xm[idx - 1]) <= np.abs(xq - xm[idx])
    idx = idx - left
    return fm[idx]


def _overlap(xr: np.ndarray, xm: np.ndarray) -> np.ndarray:
    halfm = 0.5 * (xm[1] - xm[0]) if len(xm) > 1 else 0.0
    mask = (xr >= xm[0] - halfm) & (xr <= xm[-1] + halfm)
    if not mask.any():
        raise ComparisonError("model and reference domains do not overlap")
    return mask


def _norms(diff: np.ndarray, weight: np.ndarray) -> dict:
    return {
        "l1": float(np.sum(np.abs(diff) * weight)),
        "l2": float(np.sqrt(np.sum(diff * diff * weight))),
        "linf": float(np.abs(diff).max()) if diff.size else 0.0,
    }


def _column_weights(ax: np.ndarray) -> np.ndarray:
    if len(ax) == 1:
        return np.ones(1)
    return np.gradient(ax)


def compare(
    model: ModelFields,
    ds: ReferenceDataset,
    quantities=("h", "um"),
    slice_specs=(),
    threshold: float = DEFAULT_THRESHOLD,
    time_tol: float = 1e-6,
) -> ComparisonReport:
    """Norm differences and plot slices of model vs reference fields.

    Model fields are sampled piecewise-constant at the reference columns
    (inside the overlap of the two domains).  Slice specs are
    (axis, location) pairs, e.g. ("y", 65.5); 1D data always yields one
    slice per quantity over the full line.
    """
    if (
        model.time is not None
        and ds.time is not None
        and abs(model.time - ds.time) > time_tol
    ):
        raise ComparisonError(
            f"snapshot times differ: model {model.time} vs reference {ds.time}"
        )
    h_ref = extract_height(ds, threshold)
    um_ref = depth_average(ds, h_ref, threshold)
    ref_fields = {"h": h_ref, "um": um_ref}
    model_fields = {"h": model.h, "um": model.um}
    if model.vm is not None and ds.v is not None:
        ref_fields["vm"] = depth_average(ds, h_ref, threshold, component="v")
        model_fields["vm"] = model.vm

    norms = {}
    slices = []
    if ds.horizontal_dims == 1:
        mask = _overlap(ds.x, model.x)
        xq = ds.x[mask]
        w = _column_weights(ds.x)[mask]
        for q in quantities:
            interp = _piecewise_constant(model.x, model_fields[q], xq)
            refv = ref_fields[q][mask]
            norms[q] = _norms(interp - refv, w)
            slices.append(
                SliceRecord(
                    quantity=q, axis=None, location=None,
                    coord=xq, model=interp, reference=refv,
                )
            )
    else:
        if model.y is None:
            raise ComparisonError("2D reference data needs a 2D model snapshot")
        mx = _overlap(ds.x, model.x)
        my = _overlap(ds.y, model.y)
        xq, yq = ds.x[mx], ds.y[my]
        wx = _column_weights(ds.x)[mx]
        wy = _column_weights(ds.y)[my]
        weight = wx[:, None] * wy[None, :]
        ix = _nearest_index(model.x, xq)
        iy = _nearest_index(model.y, yq)
        for q in quantities:
            interp = model_fields[q][np.ix_(ix, iy)]
            refv = ref_fields[q][np.ix_(np.where(mx)[0], np.where(my)[0])]
            norms[q] = _norms(interp - refv, weight)
            for axis, loc in slice_specs:
                if axis == "y":
                    j = int(np.argmin(np.abs(yq - loc)))
                    slices.append(
                        SliceRecord(
                            quantity=q, axis="y", location=float(yq[j]),
                            coord=xq, model=interp[:, j], reference=refv[:, j],
                        )
                    )
                elif axis == "x":
                    i = int(np.argmin(np.abs(xq - loc)))
                    slices.append(
                        SliceRecord(
                            quantity=q, axis="x", location=float(xq[i]),
                            coord=yq, model=interp[i], reference=refv[i],
                        )
                    )
                else:
                    raise ValueError(f"slice axis must be 'x' or 'y', got {axis!r}")
    return ComparisonReport(
        norms=norms, slices=slices, model_time=model.time, reference_time=ds.time
    )


def _nearest_index(centers: np.ndarray, query: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(centers, query), 1, len(centers) - 1)
    left = np.abs(query - centers[idx - 1]) <= np.abs(query - centers[idx])
    return idx - left


def write_report(report: ComparisonReport, prefix) -> list:
    """Emit ``<prefix>_norms.csv`` plus one CSV per slice; returns paths."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    norms_path = prefix.with_name(prefix.name + "_norms.csv")
    with open(norms_path, "w") as fh:
        fh.write("quantity,norm,value\n")
        for q, vals in report.norms.items():
            for norm in ("l1", "l2", "linf"):
                fh.write(f"{q},{norm},{vals[norm]:.12e}\n")
    paths.append(norms_path)
    for rec in report.slices:
        tag = f"_{rec.axis}{rec.location:g}" if rec.axis else ""
        spath = prefix.with_name(f"{prefix.name}_slice_{rec.quantity}{tag}.csv")
        with open(spath, "w") as fh:
            fh.write("x,model,reference\n")
            for c, mv, rv in zip(rec.coord, rec.model, rec.reference):
                fh.write(f"{c:.12e},{mv:.12e},{rv:.12e}\n")
        paths.append(spath)
    return paths
