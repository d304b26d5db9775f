"""Command-line driver: exact identity suites, transform simulation,
round-trip reconstructions, and coefficient dumps.

Every run writes a manifest (config echo, package versions, timings) into the
output directory.  Exit codes: 0 success, 2 check/budget failure, 64 usage
error, 65 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import symtensor as st
from .coeffs import beta_closed, beta_recurrence, c_coeff, f_factor
from .gridfield import GridSpec, GridTensorField, gaussian_phantom, load_field, rel_error, save_field
from .identities import check_identity, default_cases
from .inversion import (
    InversionConfig,
    consistency_residual,
    crop_to,
    fourier_system_residual,
    invert_full,
    normal_data,
)
from .raytransform import (
    adjoint,
    forward,
    load_sinogram,
    make_lineset,
    normal_compose,
    normal_kernel,
    save_sinogram,
    slice_residual,
)

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_USAGE = 64
EXIT_INVALID = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract wants 64
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="momray", description=__doc__)
    p.add_argument("--config", type=str, help="JSON parameter file; flags override its entries")
    p.add_argument("--out", type=str, default="momray_out", help="output directory")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run the exact identity suite")
    c.add_argument("--suite", default="all")
    c.add_argument("--max-m", type=int, default=3)
    c.add_argument("--dims", default="2,3,4")
    c.add_argument("--seeds", default="1,2,3,4,5")

    c = sub.add_parser("coeffs", help="dump coefficient tables")
    c.add_argument("--beta", type=int, help="emit the beta table as CSV up to this rank")
    c.add_argument("--scalars", action="store_true", help="emit c/f scalar factors for m <= 2")
    c.add_argument("--n", type=int, default=2)

    for name in ("forward", "adjoint", "normal", "slicecheck", "roundtrip", "invert"):
        c = sub.add_parser(name)
        c.add_argument("--m", type=int, default=1)
        c.add_argument("--k", type=int, default=0)
        c.add_argument("--n", type=int, default=2)
        c.add_argument("--shape", type=int, default=256, help="grid points per axis")
        c.add_argument("--extent", type=float, default=8.0, help="box side length")
        c.add_argument("--width", type=float, default=0.5, help="phantom Gaussian width")
        c.add_argument("--center", type=str, default="0.1,-0.2", help="phantom center")
        c.add_argument("--n-dir", type=str, default=None, help="direction count(s)")
        c.add_argument("--t-step", type=float, default=None, help="line quadrature step")
        if name == "adjoint":
            c.add_argument("--sinogram", type=str, required=True)
        if name == "normal":
            c.add_argument("--route", choices=("kernel", "compose", "both"), default="kernel")
        if name == "slicecheck":
            c.add_argument("--budget", type=float, default=1e-2)
        if name in ("roundtrip", "invert"):
            c.add_argument("--budget", type=float, default=None)
            c.add_argument("--source", choices=("kernel", "compose"), default="kernel")
            c.add_argument("--wide-factor", type=int, default=2)
        if name == "invert":
            c.add_argument("--data", type=str, nargs="+", help="normal-operator data files, k ascending")
    return p


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        cfg = json.loads(path.read_text())
        for key, val in cfg.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and _is_default(args, attr):
                setattr(args, attr, val)
    return cfg


_DEFAULTS: dict = {}


def _is_default(args, attr) -> bool:
    return _DEFAULTS.get(attr, object()) == getattr(args, attr)


def _phantom(args, m=None):
    n = args.n
    m = args.m if m is None else m
    shape = (args.shape,) * n
    spec = GridSpec(n, shape, args.extent / args.shape, 2)
    rng = np.random.default_rng(args.seed)
    center = tuple(float(v) for v in args.center.split(","))
    if len(center) != n:
        raise ValueError(f"phantom center needs {n} coordinates, got {len(center)}")
    bump = {"center": center, "width": args.width, "tensor": rng.normal(size=st.sym_dim(n, m))}
    return gaussian_phantom(spec, m, [bump]), spec


def _lineset(args, spec):
    step = args.t_step if args.t_step is not None else spec.h
    n_dir = None
    if args.n_dir:
        parts = [int(v) for v in args.n_dir.split(",")]
        n_dir = parts[0] if len(parts) == 1 else tuple(parts)
    return make_lineset(spec.n, spec.half_width, step, n_dir=n_dir)


def _write_manifest(out: Path, args, report: dict, t0: float):
    import scipy

    manifest = {
        "command": args.command,
        "config": {
            k: v for k, v in vars(args).items() if not k.startswith("_") and k != "config"
        },
        "versions": {
            "momray": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "elapsed_s": round(time.time() - t0, 3),
        "report": report,
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _cmd_check(args, out: Path) -> tuple:
    dims = tuple(int(v) for v in args.dims.split(","))
    seeds = tuple(int(v) for v in args.seeds.split(","))
    if args.suite == "beta":
        rows, failures = [], 0
        for m in range(0, args.max_m + 1):
            for k in range(-2, m + 3):
                for p in range(-2, m + 3):
                    closed, rec = beta_closed(m, k, p), beta_recurrence(m, k, p)
                    ok = closed == rec
                    failures += not ok
                    rows.append({"m": m, "k": k, "p": p, "value": str(closed), "pass": ok})
        report = {"suite": "beta", "cases": len(rows), "failures": failures}
        (out / "beta_check.json").write_text(json.dumps(rows, indent=1))
        return report, EXIT_OK if failures == 0 else EXIT_CHECK
    cases = default_cases(max_m=args.max_m, dims=dims, seeds=seeds, suite=args.suite)
    if not cases:
        print(f"unknown suite {args.suite!r}", file=sys.stderr)
        return {"error": f"unknown suite {args.suite!r}"}, EXIT_USAGE
    results = [check_identity(name, params) for name, params in cases]
    failures = sum(not r["pass"] for r in results)
    (out / "identity_report.json").write_text(json.dumps(results, indent=1))
    report = {"suite": args.suite, "cases": len(results), "failures": failures}
    print(f"identity suite: {len(results)} cases, {failures} failures")
    return report, EXIT_OK if failures == 0 else EXIT_CHECK


def _cmd_coeffs(args, out: Path) -> tuple:
    report = {}
    if args.beta is not None:
        path = out / "beta.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "k", "p", "numerator", "denominator"])
            for m in range(0, args.beta + 1):
                for k in range(1, m + 1):
                    for p in range(0, min(k, m - k) + 1):
                        b = beta_closed(m, k, p)
                        w.writerow([m, k, p, b.numerator, b.denominator])
        print(path.read_text(), end="")
        report["beta_csv"] = str(path)
    if args.scalars:
        path = out / "scalars.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "k", "n", "c_coeff", "f_factor"])
            for m in range(0, 3):
                for k in range(m + 1):
                    w.writerow([m, k, args.n, c_coeff(m, args.n, k), f_factor(m, k, args.n)])
        report["scalars_csv"] = str(path)
    if not report:
        print("coeffs: nothing requested (use --beta and/or --scalars)", file=sys.stderr)
        return report, EXIT_USAGE
    return report, EXIT_OK


def _cmd_forward(args, out: Path) -> tuple:
    f, spec = _phantom(args)
    lines = _lineset(args, spec)
    sino = forward(f, args.k, lines)
    path = out / f"sinogram_m{args.m}_k{args.k}.bin"
    save_sinogram(path, sino)
    report = {
        "sinogram": str(path),
        "clipped_fraction": sino.meta.get("clipped_fraction", 0.0),
        "max_abs": float(np.abs(sino.values).max()),
    }
    return report, EXIT_OK


def _cmd_adjoint(args, out: Path) -> tuple:
    sino = load_sinogram(args.sinogram)
    spec = GridSpec(sino.n, (args.shape,) * sino.n, args.extent / args.shape, 2)
    field = adjoint(sino, spec, args.m)
    path = out / f"backprojection_m{args.m}_k{sino.k}.bin"
    save_field(path, field)
    return {"field": str(path), "max_abs": float(np.abs(field.comps).max())}, EXIT_OK


def _cmd_normal(args, out: Path) -> tuple:
    f, spec = _phantom(args)
    report = {}
    fields = {}
    if args.route in ("kernel", "both"):
        fields["kernel"] = normal_kernel(f, args.k)
    if args.route in ("compose", "both"):
        fields["compose"] = normal_compose(f, args.k, _lineset(args, spec))
    for route, field in fields.items():
        path = out / f"normal_{route}_m{args.m}_k{args.k}.bin"
        save_field(path, field)
        report[route] = str(path)
    if args.route == "both":
        report["discrepancy"] = rel_error(fields["compose"], fields["kernel"])
    return report, EXIT_OK


def _cmd_slicecheck(args, out: Path) -> tuple:
    f, spec = _phantom(args)
    lines = _lineset(args, spec)
    res = slice_residual(f, args.k, lines)
    report = {"residuals": res, "budget": args.budget}
    (out / "slicecheck.json").write_text(json.dumps(report, indent=1))
    print(f"slice residual max {res['max']:.3e} (budget {args.budget:.1e})")
    return report, EXIT_OK if res["max"] <= args.budget else EXIT_CHECK


def _default_budget(m: int, n: int) -> float:
    if n == 3:
        return 0.08
    return 0.07 if m == 2 else 0.05


def _cmd_roundtrip(args, out: Path) -> tuple:
    f, spec = _phantom(args)
    budget = args.budget if args.budget is not None else _default_budget(args.m, args.n)
    cfg = InversionConfig(args.m, args.n, source=args.source, wide_factor=args.wide_factor)
    lines = _lineset(args, spec) if args.source == "compose" else None
    data = [normal_data(f, k, cfg, lines=lines) for k in range(args.m + 1)]
    rec, rep = invert_full(data, cfg, truth=f)
    save_field(out / f"reconstruction_m{args.m}.bin", crop_to(rec, spec))
    _write_error_slices(out, crop_to(rec, spec), f)
    report = rep.to_dict()
    report["budget"] = budget
    print(f"round trip m={args.m} n={args.n}: interior rel error "
          f"{rep.interior_rel_error:.4f} (budget {budget:.2f})")
    return report, EXIT_OK if rep.interior_rel_error <= budget else EXIT_CHECK


def _cmd_invert(args, out: Path) -> tuple:
    if not args.data:
        print("invert: --data files required", file=sys.stderr)
        return {}, EXIT_USAGE
    data = [load_field(p) for p in args.data]
    cfg = InversionConfig(args.m, args.n, source=args.source, wide_factor=args.wide_factor)
    rec, rep = invert_full(data, cfg)
    save_field(out / f"reconstruction_m{args.m}.bin", rec)
    return rep.to_dict(), EXIT_OK


def _write_error_slices(out: Path, rec: GridTensorField, truth: GridTensorField):
    """Axis-aligned midline profiles of reconstruction vs truth, one CSV per
    component: plot-ready data without any rendering."""
    mid = tuple(s // 2 for s in rec.spec.shape)
    xs = rec.spec.axes()[0]
    with (out / "error_slices.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "x", "reconstruction", "truth"])
        for pos, idx in enumerate(st.canonical_indices(rec.spec.n, rec.m)):
            line_rec = rec.comps[pos][(slice(None),) + mid[1:]]
            line_tru = truth.comps[pos][(slice(None),) + mid[1:]]
            for x, a, b in zip(xs, line_rec, line_tru):
                w.writerow(["".join(map(str, idx)) or "0", f"{x:.6g}", f"{a:.9g}", f"{b:.9g}"])


_COMMANDS = {
    "check": _cmd_check,
    "coeffs": _cmd_coeffs,
    "forward": _cmd_forward,
    "adjoint": _cmd_adjoint,
    "normal": _cmd_normal,
    "slicecheck": _cmd_slicecheck,
    "roundtrip": _cmd_roundtrip,
    "invert": _cmd_invert,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    global _DEFAULTS
    _DEFAULTS = {}
    actions = list(parser._actions)
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            for sp in a.choices.values():
                actions.extend(sp._actions)
    for a in actions:
        if a.dest not in ("help", "command"):
            _DEFAULTS[a.dest] = a.default
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        _load_config(args)
        report, code = _COMMANDS[args.command](args, out)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"momray {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write_manifest(out, args, report, t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
