"""Command line driver: run scenarios, compare against references, verify.

Snapshot CSVs are written in SI units with a fixed %.12e float format so
identical configurations produce byte-identical files.  Every run also
writes a metadata file in the flat key=value config format; feeding it
back through --config reproduces the run.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import reference, scenarios, solver, verify
from .models import compute_bar_gamma

MODELS = {
    "swe": ("standard", 0),
    "hswme": ("standard", 1),
    "mswe": ("modified", 0),
    "mhswme": ("modified", 1),
}

SCENARIOS = {
    "dambreak1d": scenarios.dambreak_1d,
    "radialcollapse2d": scenarios.radial_collapse_2d,
    "collapseinflow2d": scenarios.collapse_with_inflow_2d,
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "dambreak1d"
    model: str = "mswe"
    order: Optional[int] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    cfl: float = 0.7
    t_end: Optional[float] = None
    output_times: Optional[list] = None
    out: str = "out"
    stepper: Optional[str] = None
    kappa: Optional[float] = None

    def resolve(self):
        if self.scenario not in SCENARIOS:
            raise UsageError(f"scenario: unknown name {self.scenario!r}")
        if self.model not in MODELS:
            raise UsageError(f"model: must be one of {sorted(MODELS)}")
        if not 0.0 < self.cfl <= 1.0:
            raise UsageError("cfl: must be in (0, 1]")
        family, default_order = MODELS[self.model]
        order = default_order if self.order is None else self.order
        if default_order == 0 and order != 0:
            raise UsageError(f"order: {self.model} carries no moments, use order 0")
        if default_order >= 1 and order < 1:
            raise UsageError(f"order: {self.model} needs order >= 1")
        if self.nx is not None and self.nx < 3:
            raise UsageError("nx: need at least 3 cells")
        if self.ny is not None and self.ny < 3:
            raise UsageError("ny: need at least 3 cells")
        if self.stepper not in (None, "explicit", "semi-implicit"):
            raise UsageError("stepper: must be 'explicit' or 'semi-implicit'")
        if self.kappa is not None and self.kappa < 0:
            raise UsageError("kappa: must be >= 0")

        scen = SCENARIOS[self.scenario]()
        if self.kappa is not None:
            physical = scenarios.dam_break_setup(kappa=self.kappa)
            scen = replace(scen, physical=physical)
        t_end = scen.t_end if self.t_end is None else float(self.t_end)
        if t_end < 0:
            raise UsageError("t_end: must be >= 0")
        if self.output_times is None:
            times = sorted({float(k) for k in range(int(np.floor(t_end)) + 1)} | {t_end})
        else:
            times = sorted(set(float(t) for t in self.output_times))
            if times and (times[0] < 0 or times[-1] > t_end):
                raise UsageError("output_times: must lie in [0, t_end]")
        spec = scenarios.model_spec(family, order, physical=scen.physical)
        return scen, spec, order, t_end, times


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, val = text.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = val
    return values


def _coerce(key: str, val: str):
    if key in ("order", "nx", "ny"):
        return int(val)
    if key in ("cfl", "t_end", "kappa"):
        return float(val)
    if key == "output_times":
        return [float(v) for v in val.split(",") if v.strip()]
    return val


def _fmt(v: float) -> str:
    return f"{v:.12e}"


def _snapshot_path(outdir: Path, cfg: RunConfig, order: int, time_s: float) -> Path:
    return outdir / f"{cfg.scenario}_{cfg.model}_n{order}_t{time_s:.6f}.csv"


def _write_snapshot(path: Path, snap, scen, spec, cfg: RunConfig):
    p = scen.physical
    f = snap.field
    time_s = snap.time * p.L / p.U
    lines = [
        f"# scenario: {cfg.scenario}",
        f"# model: {cfg.model}",
        f"# family: {spec.family}",
        f"# order: {spec.order}",
        f"# time: {time_s:.6f}",
    ]
    if f.dims == 1:
        cols = ["x", "h", "um"] + [f"alpha{j}" for j in range(1, spec.order + 1)]
        lines.append(",".join(cols))
        xs = f.x_centers() * p.L
        cells = f.interior()
        h = cells[:, 0]
        for i, x in enumerate(xs):
            vals = [x, h[i] * p.H, cells[i, 1] / h[i] * p.U]
            vals += [cells[i, 2 + j] / h[i] * p.U for j in range(spec.order)]
            lines.append(",".join(_fmt(v) for v in vals))
    else:
        cols = ["x", "y", "h", "um", "vm"]
        for j in range(1, spec.order + 1):
            cols += [f"alpha{j}", f"beta{j}"]
        lines.append(",".join(cols))
        xs = f.x_centers() * p.L
        ys = f.y_centers() * p.L
        cells = f.interior()
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                st = cells[i, j]
                h = st[0]
                vals = [x, y, h * p.H, st[1] / h * p.U, st[2] / h * p.U]
                for k in range(spec.order):
                    vals += [st[3 + 2 * k] / h * p.U, st[4 + 2 * k] / h * p.U]
                lines.append(",".join(_fmt(v) for v in vals))
    path.write_text("\n".join(lines) + "\n")


def _write_metadata(path: Path, cfg: RunConfig, scen, spec, order, t_end, times, snaps, reports):
    d = scenarios.nondimensionalize(scen.physical)
    hmin = min(float(s.field.interior()[..., 0].min()) for s in snaps)
    hmax = max(float(s.field.interior()[..., 0].max()) for s in snaps)
    bg_lo = compute_bar_gamma(spec, hmax)
    bg_hi = compute_bar_gamma(spec, hmin)
    lines = [
        "# resolved run configuration; reusable via --config",
        f"scenario={cfg.scenario}",
        f"model={cfg.model}",
        f"order={order}",
        f"nx={cfg.nx if cfg.nx is not None else (scen.nx_default)}",
    ]
    if scen.dims == 2:
        lines.append(f"ny={cfg.ny if cfg.ny is not None else scen.ny_default}")
    lines += [
        f"cfl={cfg.cfl!r}",
        f"t_end={t_end!r}",
        "output_times=" + ",".join(repr(t) for t in times),
        f"out={cfg.out}",
    ]
    if cfg.stepper:
        lines.append(f"stepper={cfg.stepper}")
    if cfg.kappa is not None:
        lines.append(f"kappa={cfg.kappa!r}")
    lines += [
        "# resolved dimensionless parameters",
        f"# eps={d.eps!r} g={d.g!r} gamma={d.gamma!r}",
        f"# gamma_over_eps={d.gamma_over_eps!r} re0_inv={d.re0_inv!r}",
        f"# bar_gamma range over run: [{bg_lo!r}, {bg_hi!r}]",
        f"# steps={len(reports)}",
    ]
    if reports:
        dts = [r.dt for r in reports]
        lines.append(f"# dt min={min(dts)!r} max={max(dts)!r}")
        lines.append(f"# max wave speed={max(r.max_speed for r in reports)!r}")
        lines.append(f"# floored cells total={sum(r.floored_cells for r in reports)}")
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    cfg_values = {}
    if args.config:
        cfg_values.update(load_config(args.config))
    cfg = RunConfig()
    for key, val in cfg_values.items():
        setattr(cfg, key, _coerce(key, val))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, flag)
    scen, spec, order, t_end, times = cfg.resolve()

    stepper = None
    if cfg.stepper == "explicit":
        stepper = solver.step_explicit
    elif cfg.stepper == "semi-implicit":
        stepper = solver.step_semi_implicit

    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    reports: list = []
    try:
        snaps = solver.run(
            scen,
            spec,
            t_end=t_end,
            output_times=times,
            nx=cfg.nx,
            ny=cfg.ny,
            cfl=cfg.cfl,
            stepper=stepper,
            reports=reports,
        )
    except solver.StepFailure as exc:
        diag = outdir / f"{cfg.scenario}_{cfg.model}_n{order}_failure.txt"
        diag.write_text(f"{exc}\nsteps completed: {len(reports)}\n")
        for snap in exc.snapshots:
            time_s = snap.time * scen.physical.L / scen.physical.U
            _write_snapshot(_snapshot_path(outdir, cfg, order, time_s), snap, scen, spec, cfg)
        print(f"error: {exc} (diagnostics in {diag})", file=sys.stderr)
        return 1

    for snap in snaps:
        time_s = snap.time * scen.physical.L / scen.physical.U
        _write_snapshot(_snapshot_path(outdir, cfg, order, time_s), snap, scen, spec, cfg)
    meta = outdir / f"{cfg.scenario}_{cfg.model}_n{order}_metadata.txt"
    _write_metadata(meta, cfg, scen, spec, order, t_end, times, snaps, reports)
    print(f"wrote {len(snaps)} snapshots and {meta}")
    return 0


def _parse_slices(raw) -> list:
    out = []
    for item in raw or []:
        try:
            axis, _, loc = item.partition("=")
            out.append((axis.strip(), float(loc)))
        except ValueError as exc:
            raise UsageError(f"slices: expected AXIS=VALUE, got {item!r}") from exc
    return out


def cmd_compare(args) -> int:
    ref_path = Path(args.reference)
    if not ref_path.exists():
        print(f"error: reference file not found: {ref_path}", file=sys.stderr)
        return 1
    ds = reference.load_dataset(ref_path)
    slices = _parse_slices(args.slice)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for mfile in args.model_files:
        mpath = Path(mfile)
        if not mpath.exists():
            print(f"error: model file not found: {mpath}", file=sys.stderr)
            return 1
        model = reference.load_model_snapshot(mpath)
        try:
            report = reference.compare(model, ds, slice_specs=slices)
        except (reference.ComparisonError, ValueError) as exc:
            print(f"error: {mpath.name}: {exc}", file=sys.stderr)
            status = 1
            continue
        prefix = outdir / f"{mpath.stem}_vs_{ref_path.stem}"
        paths = reference.write_report(report, prefix)
        for q, vals in report.norms.items():
            print(
                f"{mpath.name}: {q} l1={vals['l1']:.6e} l2={vals['l2']:.6e} "
                f"linf={vals['linf']:.6e}"
            )
        print(f"  reports: {', '.join(str(p) for p in paths)}")
    return status


def cmd_verify(args) -> int:
    try:
        rows = verify.run_suite(args.suite)
    except KeyError:
        print(
            f"error: unknown suite {args.suite!r}; choose from {sorted(verify.SUITES)}",
            file=sys.stderr,
        )
        return 2
    width = max(len(name) for name, _, _ in rows)
    failed = 0
    for name, ok, detail in rows:
        tag = "PASS" if ok else "FAIL"
        print(f"[{tag}] {name:<{width}}  {detail}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


def _apply_thread_cap():
    cap = os.environ.get("SWME_THREADS")
    if cap is None:
        return
    try:
        n = int(cap)
        if n < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"SWME_THREADS: expected a positive integer, got {cap!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swm", description="shallow water moment model solver suite"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write CSV snapshots")
    p_run.add_argument("--scenario", choices=sorted(SCENARIOS), default=None)
    p_run.add_argument("--config", default=None, help="key=value config file")
    p_run.add_argument("--model", choices=sorted(MODELS), default=None)
    p_run.add_argument("--order", type=int, default=None)
    p_run.add_argument("--nx", type=int, default=None)
    p_run.add_argument("--ny", type=int, default=None)
    p_run.add_argument("--cfl", type=float, default=None)
    p_run.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_run.add_argument(
        "--output-times",
        dest="output_times",
        default=None,
        help="comma-separated times",
    )
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--stepper", choices=("explicit", "semi-implicit"), default=None)
    p_run.add_argument("--kappa", type=float, default=None)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare snapshots against reference data")
    p_cmp.add_argument("model_files", nargs="+")
    p_cmp.add_argument("--reference", required=True)
    p_cmp.add_argument("--slice", action="append", help="AXIS=VALUE, repeatable")
    p_cmp.add_argument("--out", default="out")
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="run a property suite")
    p_ver.add_argument("suite", choices=sorted(verify.SUITES))
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "output_times", None) is not None and isinstance(args.output_times, str):
        args.output_times = [float(v) for v in args.output_times.split(",") if v.strip()]
    try:
        _apply_thread_cap()
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (reference.ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
