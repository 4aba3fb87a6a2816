"""Command-line driver: ``qhdef verify | deform | fuse``.

Exit status is 0 when every requested check passes, 1 when a check fails or
a domain precondition is violated, and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import families as fam
from . import fusion
from . import liegroup as lg
from . import spaces
from .axioms import CheckConfig, check_family, check_space
from .liegroup import DomainError

log = logging.getLogger("qhdef")

DEFAULT_ELEMENTS = {
    "su2": "0.7,0.3,0.2",
    "so3": "0.7,0.3,0.2",
    "t2": "0.7,0.3",
    "sl2r": "0.3,0.2,0.1",
}
DEFAULT_GRID = "1,0.5,0.25,0.125,0.0625,0.03125,0.015625,0"
SEED_ENV = "QHDEF_SEED"
CSV_HEADER = ("t", "metric", "max_residual", "mean_residual", "samples")


class UsageError(Exception):
    pass


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"could not parse {what} {text!r}") from exc


def _element(model: lg.GroupModel, text: str | None) -> np.ndarray:
    coeffs = _floats(text or DEFAULT_ELEMENTS[model.name], "--element")
    if len(coeffs) != model.dim:
        raise UsageError(f"--element needs {model.dim} coefficients for {model.name}, got {len(coeffs)}")
    return model.matrix(np.array(coeffs))


def _config(args) -> CheckConfig:
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    try:
        return CheckConfig(samples=args.samples, seed=seed, fd_step=args.fd_step, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(payload: dict, path: str | None, timestamp: bool) -> None:
    if timestamp:
        payload = dict(payload, generated_at=datetime.now(timezone.utc).isoformat())
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(report, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in report.convergence:
            w.writerow([repr(row["t"]), row["metric"], repr(row["max_residual"]), repr(row["mean_residual"]), row["samples"]])
        for metric, s in report.slopes.items():
            w.writerow(["nan", f"slope_{metric}", repr(s["slope"]), repr(s["max_deviation"]), report.config.samples])


def _space(args, model):
    kind = args.space
    if kind == "double":
        return spaces.double_space(model)
    if kind == "tstar":
        return spaces.tstar_space(model)
    if kind == "conjugacy":
        return spaces.conj_class_space(model, lg.exp(model, _element(model, args.element)))
    if kind == "orbit":
        return spaces.orbit_space(model, _element(model, args.element))
    flavor = getattr(args, "flavor", "qh")
    build = fusion.moduli_qh if flavor == "qh" else fusion.moduli_ham
    return build(model, args.genus, args.boundaries)


def _family(kind: str, args, model):
    if kind == "double":
        return fam.double_family(model)
    if kind == "conjugacy":
        return fam.conj_family(model, _element(model, args.element))
    return fam.moduli_family(model, args.genus, args.boundaries)


def _summary(name: str, passed: bool) -> None:
    print(f"{name}: {'PASS' if passed else 'FAIL'}", file=sys.stderr)


def cmd_verify(args) -> int:
    model = lg.get_model(args.group)
    cfg = _config(args)
    space = _space(args, model)
    report = check_space(space, cfg)
    _write_json(report.to_dict(), args.out, not args.no_timestamp)
    _summary(space.name, report.passed)
    return 0 if report.passed else 1


def _grid(args) -> list[float]:
    grid = _floats(args.t_grid, "--t-grid")
    if 0.0 not in grid or 1.0 not in grid:
        raise UsageError("--t-grid must contain 0 and 1")
    return grid


def _run_family(family, args) -> int:
    cfg = _config(args)
    report = check_family(family, _grid(args), cfg)
    _write_json(report.to_dict(), args.out, not args.no_timestamp)
    if args.csv:
        _write_csv(report, args.csv)
    _summary(family.name, report.passed)
    return 0 if report.passed else 1


def cmd_deform(args) -> int:
    model = lg.get_model(args.group)
    return _run_family(_family(args.family, args, model), args)


def cmd_fuse(args) -> int:
    model = lg.get_model(args.group)
    fused = fam.external_fuse_family(_family(args.family, args, model), _family(args.with_, args, model), (0, 0))
    return _run_family(fused, args)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", choices=sorted(lg.MODELS), default="su2")
    p.add_argument("--element", help="basis coefficients, comma separated")
    p.add_argument("--genus", type=int, default=1)
    p.add_argument("--boundaries", type=int, default=1)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fd-step", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", help="JSON report path (stdout if omitted)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time for reproducible output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhdef", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check the axioms on one space")
    v.add_argument("--space", choices=["double", "tstar", "conjugacy", "orbit", "moduli"], required=True)
    v.add_argument("--flavor", choices=["qh", "ham"], default="qh", help="moduli only: quasi-Hamiltonian or Hamiltonian model")
    _common(v)
    v.set_defaults(func=cmd_verify)

    for name, helptext in (("deform", "check a deformation family"), ("fuse", "externally fuse two families and check")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--family", choices=["double", "conjugacy", "moduli"], required=name == "deform", default="double")
        if name == "fuse":
            p.add_argument("--with", dest="with_", choices=["double", "conjugacy", "moduli"], default="double")
        p.add_argument("--t-grid", default=DEFAULT_GRID)
        p.add_argument("--csv", help="convergence table path")
        _common(p)
        p.set_defaults(func=cmd_deform if name == "deform" else cmd_fuse)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qhdef: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"qhdef: domain error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
