"""Command-line entry point.

Every run writes ``manifest.json`` into the output directory (``--out-dir``,
defaulting to ``$ARTIFACT_OUT_DIR`` or ``./artifact_out``).  Exit status is 0
on success, 2 on domain errors (bad input, loss not calibrated) and 1 on
internal failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import traceback
from pathlib import Path

from . import __version__
from .backend import NAME as BACKEND
from .calibration import CalibrationCurve, calibration_curve
from .conditions import AUDITS, CONDITION_IDS, audit
from .conversion import RiskBoundInput, convert_calibrated, convert_dominating, convert_mtnc, zhang_constant
from .experiments import (
    SyntheticProblem,
    kink_counterexample,
    logistic_equivalence,
    reproduce_table2,
    simulate_erm,
)
from .losses import DomainError, LossSpec, SpecError, TransformationFunctionSpec, llw
from .optimize import OptimizerSettings

log = logging.getLogger("artifact")

OUT_ENV = "ARTIFACT_OUT_DIR"
EXPERIMENTS = ("table2", "kink", "logistic-eq", "erm")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors already; keep the message to one line."""

    def error(self, message):
        self.exit(2, f"error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b) or a comma list."""
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"bad grid {text!r}; expected a:b:step or a comma list") from None


def _load_loss(path: str) -> LossSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read loss file {path}: {exc.strerror}") from None
    return LossSpec.from_json(text)


def _load_curve(path: str) -> CalibrationCurve:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read curve file {path}: {exc.strerror}") from None
    return CalibrationCurve.from_csv(text)


def _phi(args) -> TransformationFunctionSpec:
    return TransformationFunctionSpec(args.phi, tau=args.tau, a=args.a, b=args.b)


def _settings(args) -> OptimizerSettings:
    return OptimizerSettings(seed=args.seed)


class _Run:
    """Output directory, artifact bookkeeping and the manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.out = Path(args.out_dir or os.environ.get(OUT_ENV) or "artifact_out")
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.extra: dict = {}
        self.argv = list(argv)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.files.append(name)
        return path

    def manifest(self, status: int, error: str | None = None):
        flags = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        m = {"subcommand": self.args.command, "argv": self.argv, "flags": flags, "seed": self.args.seed,
             "version": __version__, "backend": BACKEND, "artifacts": self.files, "exit_status": status}
        if error:
            m["error"] = error
        m.update(self.extra)
        (self.out / "manifest.json").write_text(json.dumps(m, sort_keys=True, indent=2, default=str) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_delta_binary(args, run: _Run):
    method = {"closed": "closed-form", "numeric": "numeric-binary"}[args.method]
    curve = calibration_curve(_phi(args), parse_grid(args.eps_grid), method, _settings(args))
    name = f"delta_binary_{args.phi}"
    _emit_curve(run, name, curve, args.format)
    run.extra["calibrated"] = curve.calibrated


def cmd_delta_max(args, run: _Run):
    loss = _load_loss(args.loss)
    curve = calibration_curve(loss, parse_grid(args.eps_grid), "numeric-deltamax", _settings(args),
                              resolution=args.resolution)
    _emit_curve(run, "delta_max", curve, args.format)
    run.extra["calibrated"] = curve.calibrated


def _emit_curve(run: _Run, name: str, curve: CalibrationCurve, fmt: str):
    if fmt == "json":
        text = curve.to_json() + "\n"
        run.write(name + ".json", text)
    else:
        text = curve.to_csv()
        run.write(name + ".csv", text)
    sys.stdout.write(text)


def cmd_audit(args, run: _Run):
    loss = _load_loss(args.loss)
    conds = [c.strip() for c in args.conditions.split(",")] if args.conditions else None
    reports = audit(loss, conds, _settings(args), seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["condition_id", "verdict", "margin", "witness_json"])
    for r in reports:
        d = r.to_dict()
        w.writerow([d["condition_id"], d["verdict"], repr(d["margin"]) if isinstance(d["margin"], float)
                    else d["margin"], json.dumps(d["witness"], sort_keys=True)])
    run.write("report.csv", buf.getvalue())
    run.write("report.json", json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n")
    for r in reports:
        print(f"{r.condition_id:24s} {r.verdict:18s} margin={r.margin:.3e}")
    run.extra["verdicts"] = {r.condition_id: r.verdict for r in reports}


def cmd_convert(args, run: _Run):
    excess = args.excess
    result: dict = {"excess": excess}
    if args.dominating is not None:
        loss = _load_loss(args.loss) if args.loss else None
        value = convert_dominating(RiskBoundInput(excess, inf_surrogate_risk=args.dominating), loss)
        result.update(route="dominating", bound=value)
    else:
        if not args.curve:
            raise DomainError("--curve is required unless --dominating is given")
        curve = _load_curve(args.curve)
        if args.mtnc:
            try:
                c, alpha = (float(x) for x in args.mtnc.split(","))
            except ValueError:
                raise DomainError("--mtnc expects c,alpha") from None
            res = convert_mtnc(curve, RiskBoundInput(excess, c=c, alpha=alpha))
            result.update(route="mtnc", c=c, alpha=alpha)
        else:
            res = convert_calibrated(curve, RiskBoundInput(excess))
            result.update(route="calibrated")
        value = res.value
        result.update(bound=value, beyond_curve=res.beyond_curve)
    run.write("convert.json", json.dumps(result, sort_keys=True, indent=2) + "\n")
    print(f"{value:.10g}")


def cmd_zhang_constant(args, run: _Run):
    z = zhang_constant(_phi(args), args.grid_step, _settings(args))
    rows = "".join(f"{p!r},{v!r}\n" for p, v in zip(z.p_grid.tolist(), z.V_grid.tolist()))
    run.write("zhang_V.csv", "p,V\n" + rows)
    info = {"phi": args.phi, "c": z.c, "c_prime": z.c_prime, "notes": z.notes}
    run.write("zhang_constant.json", json.dumps(info, sort_keys=True, indent=2) + "\n")
    print("none" if z.c is None else f"{z.c:.10g}")


def cmd_experiment(args, run: _Run):
    settings = _settings(args)
    if args.name == "table2":
        res = reproduce_table2(settings=settings)
    elif args.name == "kink":
        res = kink_counterexample(settings)
    elif args.name == "logistic-eq":
        res = logistic_equivalence(args.K, args.resolution or 20, settings)
    else:
        if args.problem:
            try:
                problem = SyntheticProblem.from_dict(json.loads(Path(args.problem).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise DomainError(f"cannot read problem file {args.problem}: {exc}") from None
        else:
            problem = SyntheticProblem.single([0.7, 0.3], seed=args.seed)
        loss = _load_loss(args.loss) if args.loss else llw("hinge", problem.K)
        curve = _load_curve(args.curve) if args.curve else None
        n_grid = [int(x) for x in parse_grid(args.n)] if args.n else [10_000]
        res = simulate_erm(problem, loss, n_grid, args.trials, settings, curve=curve)
    for name, text in sorted(res.tables.items()):
        run.write(f"{res.name}_{name}.csv", text)
    run.write(f"{res.name}_result.json", res.to_json() + "\n")
    run.extra["pass"] = res.passed
    print(json.dumps({"name": res.name, "pass": res.passed}))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_ENV} or ./artifact_out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="count", default=0)

    phi = argparse.ArgumentParser(add_help=False)
    phi.add_argument("--phi", required=True, help="transformation function kind")
    phi.add_argument("--tau", type=float, default=0.0)
    phi.add_argument("--a", type=float, default=2.0)
    phi.add_argument("--b", type=float, default=1.0)

    p = _Parser(prog="calib", description="Calibration functions for multiclass surrogate losses.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("delta-binary", parents=[common, phi], help="binary calibration function")
    s.add_argument("--eps-grid", default="0.1:0.9:0.1")
    s.add_argument("--method", choices=("closed", "numeric"), default="closed")
    s.set_defaults(func=cmd_delta_binary)

    s = sub.add_parser("delta-max", parents=[common], help="maximum calibration function by brute force")
    s.add_argument("--loss", required=True, help="JSON loss description")
    s.add_argument("--eps-grid", default="0.25,0.5,0.75")
    s.add_argument("--resolution", type=int, default=None)
    s.set_defaults(func=cmd_delta_max)

    s = sub.add_parser("audit", parents=[common], help="check the reduction conditions")
    s.add_argument("--loss", required=True)
    s.add_argument("--conditions", default=None,
                   help="comma list from " + ",".join(AUDITS + tuple(c for c in CONDITION_IDS if c not in AUDITS)))
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("convert", parents=[common], help="surrogate to 0-1 excess risk bound")
    s.add_argument("--curve", default=None, help="curve CSV (eps,delta[,residual])")
    s.add_argument("--excess", type=float, required=True)
    s.add_argument("--mtnc", default=None, help="c,alpha of the noise condition")
    s.add_argument("--dominating", type=float, default=None, metavar="INF_RISK")
    s.add_argument("--loss", default=None, help="loss to spot-check for domination")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("zhang-constant", parents=[common, phi], help="strong-concavity constant of V(p)")
    s.add_argument("--grid-step", type=float, default=0.01)
    s.set_defaults(func=cmd_zhang_constant)

    s = sub.add_parser("experiment", parents=[common], help="run a reproduction")
    s.add_argument("--name", choices=EXPERIMENTS, required=True)
    s.add_argument("--problem", default=None, help="JSON SyntheticProblem (erm)")
    s.add_argument("--loss", default=None, help="JSON loss (erm; default LLW-hinge)")
    s.add_argument("--curve", default=None, help="curve CSV for the bound (erm; default brute force)")
    s.add_argument("--n", default=None, help="sample sizes as a grid (erm)")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--K", type=int, default=3)
    s.add_argument("--resolution", type=int, default=None)
    s.set_defaults(func=cmd_experiment)
    return p


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        out = _Run(args, argv)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        args.func(args, out)
    except SpecError as exc:
        msg = f"malformed loss description, field {exc}"
        print(f"error: {msg}", file=sys.stderr)
        out.manifest(2, msg)
        return 2
    except DomainError as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        out.manifest(2, msg)
        return 2
    except Exception as exc:  # internal failure
        log.debug("%s", traceback.format_exc())
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        out.manifest(1, f"{type(exc).__name__}: {exc}")
        return 1
    out.manifest(0)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
