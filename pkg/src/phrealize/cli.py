"""Command-line front end for the three realization pipelines.

    phrealize realize INPUT --method {simple,prbt,nearest} [options]
    phrealize analyze INPUT
    phrealize bench NAME [options] | phrealize bench --all [--timing]

``realize`` dispatches on the input kind and skips stages that are already
done: sample data is first realized (deconvolution + Hankel factorization +
bilinear map), descriptor systems are regularized to standard state space,
the result is made minimal, and the chosen method produces the pH model.
Input and output frequency responses are written as CSV on a shared grid so
the reported response error is well defined.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import benchmarks, fileio
from .errors import PHRealizeError
from .identify import IOSequence, bilinear_to_continuous, era_realize, markov_from_io
from .kyp import passivity_check, ph_from_kyp, solve_kyp, stability_check
from .minreal import minimal_realization
from .nearestph import FGMOptions, nearest_ph_realization
from .prbt import prbt_reduce
from .regularize import classify_pencil, to_semiexplicit, to_statespace
from .systems import (DescriptorSystem, PHSystem, SemiExplicitSystem,
                      StateSpaceSystem, Tolerances, ValidationReport, default_grid,
                      frequency_response, ph_to_statespace, response_error,
                      validate_ph)

DEFAULT_TIMEOUT_S = 3600.0


class PipelineTimeoutError(PHRealizeError):
    """The soft wall-clock budget was exhausted between pipeline stages."""


class _StageClock:
    def __init__(self, budget_s: float):
        self.t0 = time.perf_counter()
        self.budget = budget_s

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def check(self, stage: str) -> None:
        if self.elapsed() > self.budget:
            raise PipelineTimeoutError(
                f"aborted before stage '{stage}': {self.elapsed():.1f} s exceeds the "
                f"allowed {self.budget:.0f} s")


@dataclass
class PipelineReport:
    method: str
    input_order: int
    output_order: int
    wall_time_s: float
    response_error: float
    validation: ValidationReport
    stages: list[str]
    notes: dict

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "input_order": self.input_order,
            "output_order": self.output_order,
            "wall_time_s": self.wall_time_s,
            "response_error": self.response_error,
            "validation": {
                "passed": self.validation.passed,
                "checks": [{"name": c.name, "violation": c.violation,
                            "threshold": c.threshold, "passed": c.passed}
                           for c in self.validation.checks],
            },
            "stages": self.stages,
            "notes": self.notes,
        }


def _load_input(path: Path):
    if path.suffix.lower() == ".csv":
        return fileio.load_iosequence_csv(path)
    return fileio.load_system(path)


def _to_standard(obj, tol: Tolerances, stages: list[str], notes: dict,
                 clock: _StageClock, horizon: int | None):
    """Drive any input kind to a minimal standard state-space system."""
    if isinstance(obj, IOSequence):
        clock.check("identification")
        h = horizon if horizon is not None else max(2, min(obj.num_samples // 3, 240))
        est = markov_from_io(obj, h, tol)
        disc = era_realize(est.parameters, "auto", tol)
        obj = bilinear_to_continuous(disc, obj.dt)
        stages.append("identification")
        notes["markov_horizon"] = h
        notes["deconvolution_residual"] = est.residual
    if isinstance(obj, PHSystem):
        obj = ph_to_statespace(obj)
        stages.append("ph_expansion")
    if isinstance(obj, DescriptorSystem):
        if np.array_equal(obj.E, np.eye(obj.order)):
            obj = StateSpaceSystem(obj.A, obj.B, obj.C, obj.D)
        else:
            clock.check("regularization")
            obj = to_semiexplicit(obj, tol)
            stages.append("regularization")
    if isinstance(obj, SemiExplicitSystem):
        clock.check("state_space_reduction")
        obj, _ = to_statespace(obj, tol)
        stages.append("state_space_reduction")
    clock.check("minimal_realization")
    minimal = minimal_realization(obj, tol)
    stages.append("minimal_realization")
    return minimal


def _run_method(method: str, ss: StateSpaceSystem, args, tol: Tolerances,
                notes: dict, out_dir: Path, stem: str) -> PHSystem:
    if method == "simple":
        sol = solve_kyp(ss, tol, epsilon=args.epsilon)
        fileio.save_certificate(sol, out_dir / f"{stem}_simple_certificate.json")
        notes["kyp_projected"] = sol.projected
        notes["kyp_lmi_residual"] = sol.residual
        notes["kyp_solution_choice"] = "stabilizing (minimal); the feasible set may contain others"
        return ph_from_kyp(ss, sol, tol)
    if method == "prbt":
        reduced, spectrum = prbt_reduce(ss, order=args.order, threshold=args.threshold, tol=tol)
        _write_spectrum(spectrum.pi_values, out_dir / f"{stem}_prbt_spectrum.csv")
        notes["reduced_order"] = reduced.order
        notes["num_characteristic_values"] = len(spectrum)
        sol = solve_kyp(reduced, tol, epsilon=args.epsilon)
        fileio.save_certificate(sol, out_dir / f"{stem}_prbt_certificate.json")
        notes["kyp_projected"] = sol.projected
        return ph_from_kyp(reduced, sol, tol)
    if method == "nearest":
        opts = FGMOptions(seed=args.seed, max_iters=args.max_iters, stop_tol=args.stop_tol)
        ph, dec, trace, normalized = nearest_ph_realization(ss, opts, tol)
        _write_trace(trace, out_dir / f"{stem}_nearest_trace.csv")
        notes["final_objective"] = trace.final_objective
        notes["fgm_iterations"] = int(len(trace.objective_per_iter) - 1)
        notes["fgm_restarts"] = len(trace.restarts)
        notes["storage_normalized"] = normalized
        return ph
    raise PHRealizeError(f"unknown method {method!r}")


def _write_spectrum(pi_values: np.ndarray, path: Path) -> None:
    lines = ["j,pi_j"] + [f"{j + 1},{repr(float(v))}" for j, v in enumerate(pi_values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_trace(trace, path: Path) -> None:
    restart_set = set(trace.restarts)
    lines = ["iter,objective,restart_flag"]
    for i, f in enumerate(trace.objective_per_iter):
        lines.append(f"{i},{repr(float(f))},{int(i in restart_set)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_grid(spec: str) -> np.ndarray:
    try:
        wmin, wmax, npts = spec.split(":")
        return default_grid(float(wmin), float(wmax), int(npts))
    except ValueError as exc:
        raise PHRealizeError(f"grid must be 'wmin:wmax:npts', got {spec!r}") from exc


def cmd_realize(args) -> int:
    tol = Tolerances()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    grid = _parse_grid(args.grid) if args.grid else default_grid()
    clock = _StageClock(args.timeout)
    stages: list[str] = []
    notes: dict = {}

    obj = _load_input(Path(args.input))
    input_for_response = obj if not isinstance(obj, IOSequence) else None

    stage = "input"
    try:
        stage = "preprocessing"
        ss = _to_standard(obj, tol, stages, notes, clock, args.horizon)
        if input_for_response is None:
            input_for_response = ss
        clock.check(args.method)
        stage = args.method
        t_method = time.perf_counter()
        ph = _run_method(args.method, ss, args, tol, notes, out_dir, stem)
        method_time = time.perf_counter() - t_method
        stages.append(args.method)
    except PHRealizeError as exc:
        print(f"error in stage '{stage}': {exc}", file=_sys.stderr)
        return 1

    # for sample data the identified realization is the input the method saw
    input_order = ss.order if isinstance(obj, IOSequence) else obj.order

    report = validate_ph(ph, tol)
    resp_in = frequency_response(input_for_response, grid, tol)
    resp_out = frequency_response(ph, grid, tol)
    err = response_error(resp_in, resp_out)

    ph_path = out_dir / f"{stem}_{args.method}_ph.sys"
    fileio.save_system(ph, ph_path)
    fileio.save_response_csv(resp_in, out_dir / f"{stem}_input_response.csv")
    fileio.save_response_csv(resp_out, out_dir / f"{stem}_{args.method}_response.csv")

    pipeline_report = PipelineReport(
        method=args.method, input_order=input_order, output_order=ph.order,
        wall_time_s=method_time, response_error=err, validation=report,
        stages=stages, notes=notes)
    report_path = out_dir / f"{stem}_{args.method}_report.json"
    report_path.write_text(json.dumps(pipeline_report.to_dict(), indent=1) + "\n",
                           encoding="utf-8")

    print(f"method          : {args.method}")
    print(f"input order     : {pipeline_report.input_order}")
    print(f"output order    : {ph.order}")
    print(f"response error  : {err:.3e}")
    if args.timing:
        print(f"method time     : {method_time:.3f} s")
    print(report.summary())
    print(f"wrote {ph_path}, responses, and {report_path}")
    return 0 if report.passed else 1


def cmd_analyze(args) -> int:
    tol = Tolerances()
    obj = _load_input(Path(args.input))
    doc: dict = {"input": str(args.input)}
    if isinstance(obj, IOSequence):
        print(f"input/output record: {obj.num_samples} samples, {obj.num_channels} "
              f"channel(s), dt = {obj.dt}")
        doc.update(kind="iosequence", samples=obj.num_samples,
                   channels=obj.num_channels, dt=obj.dt)
        return _finish_analyze(doc, args)
    if isinstance(obj, PHSystem):
        print(f"pH system of order {obj.order} with {obj.num_ports} port(s)")
        report = validate_ph(obj, tol)
        print(report.summary())
        doc["ph_validation"] = {"passed": report.passed,
                                "checks": [{"name": c.name, "violation": c.violation,
                                            "threshold": c.threshold}
                                           for c in report.checks]}
        obj = ph_to_statespace(obj)
    if isinstance(obj, SemiExplicitSystem):
        print(f"semi-explicit system: d = {obj.num_diff}, a = {obj.num_alg}, "
              f"cond [E1; A2] = {obj.cond_stacked:.3e}")
        doc["semiexplicit"] = {"d": obj.num_diff, "a": obj.num_alg,
                               "cond_E1A2": obj.cond_stacked}
        obj = obj.to_descriptor()
    if isinstance(obj, DescriptorSystem):
        cls = classify_pencil(obj.E, obj.A, tol)
        print(f"descriptor system of order {obj.order}")
        print(f"  regular          : {cls.regular}")
        print(f"  index <= 1       : {cls.index_le_one}")
        print(f"  finite eigenvalues: {cls.finite_eig_count}")
        print(f"  cond [E1; A2]    : {cls.cond_E1A2:.3e}")
        doc["classification"] = {"regular": cls.regular,
                                 "index_le_one": cls.index_le_one,
                                 "finite_eig_count": cls.finite_eig_count,
                                 "cond_E1A2": cls.cond_E1A2}
        if not (cls.regular and cls.index_le_one):
            return _finish_analyze(doc, args)
        semi = to_semiexplicit(obj, tol)
        print(f"  differential/algebraic split: d = {semi.num_diff}, a = {semi.num_alg}")
        obj, _ = to_statespace(semi, tol)
    stable, abscissa = stability_check(obj)
    print(f"standard system of order {obj.order}")
    print(f"  stable            : {stable} (spectral abscissa {abscissa:.4e})")
    verdict = passivity_check(obj, tol)
    print(f"  passive           : {verdict.passive}")
    doc.update(order=obj.order, stable=stable, spectral_abscissa=abscissa,
               passive=verdict.passive)
    if verdict.passive:
        lam = np.linalg.eigvalsh(verdict.certificate.Qhat)
        rng = f"[{lam.min():.3e}, {lam.max():.3e}]" if lam.size else "[]"
        print(f"  certificate eigenvalue range: {rng}")
    return _finish_analyze(doc, args)


def _finish_analyze(doc: dict, args) -> int:
    if getattr(args, "json", None):
        Path(args.json).write_text(json.dumps(_plain(doc), indent=1) + "\n",
                                   encoding="utf-8")
        print(f"wrote {args.json}")
    return 0


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _bench_one(name: str, args, out_dir: Path) -> Path:
    if name == "example5":
        path = out_dir / "example5.sys"
        fileio.save_system(benchmarks.paper_example5(), path)
    elif name == "ladder":
        spec = benchmarks.LadderSpec(args.sections)
        path = out_dir / f"ladder{spec.order}.sys"
        fileio.save_system(benchmarks.ladder_network(spec), path)
    elif name == "random":
        path = out_dir / f"random_passive_n{args.n}_m{args.m}_s{args.seed}.sys"
        fileio.save_system(benchmarks.random_passive(args.n, args.m, args.seed), path)
    else:
        raise PHRealizeError(f"unknown benchmark {name!r}; choose from example5, "
                             "ladder, random")
    print(f"wrote {path}")
    return path


def _time_method(method: str, ss: StateSpaceSystem, tol: Tolerances) -> tuple[float, int]:
    t0 = time.perf_counter()
    if method == "simple":
        ph = ph_from_kyp(ss, solve_kyp(ss, tol), tol)
    elif method == "prbt":
        reduced, _ = prbt_reduce(ss, tol=tol)
        ph = ph_from_kyp(reduced, solve_kyp(reduced, tol), tol)
    else:
        ph, _, _, _ = nearest_ph_realization(ss, FGMOptions(), tol)
    return time.perf_counter() - t0, ph.order


def cmd_bench(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not args.all:
        if args.name is None:
            raise PHRealizeError("give a benchmark name or --all")
        _bench_one(args.name, args, out_dir)
        return 0

    tol = Tolerances()
    example5 = benchmarks.paper_example5()
    ladder = benchmarks.ladder_network(benchmarks.LadderSpec(args.sections))
    fileio.save_system(example5, out_dir / "example5.sys")
    fileio.save_system(ladder, out_dir / f"ladder{2 * args.sections}.sys")
    print(f"wrote example5.sys and ladder{2 * args.sections}.sys")
    if not args.timing:
        return 0

    cases = []
    semi = to_semiexplicit(example5, tol)
    ss5, _ = to_statespace(semi, tol)
    cases.append(("example5", minimal_realization(ss5, tol), ("simple", "prbt", "nearest")))
    lss = ph_to_statespace(ladder)
    # the unstructured method does not scale; run it on the ladder only on request
    ladder_methods = ("simple", "prbt", "nearest") if args.full else ("prbt", "nearest")
    cases.append((f"ladder{2 * args.sections}", minimal_realization(lss, tol), ladder_methods))

    rows = []
    for label, ss, methods in cases:
        row = {"example": label}
        for method in ("simple", "prbt", "nearest"):
            if method not in methods:
                row[method] = "skipped"
                continue
            seconds, order = _time_method(method, ss, tol)
            row[method] = f"{seconds:.3f} s (order {order})"
        rows.append(row)

    print()
    print("| Example | Simple method | PRBT | Nearest |")
    print("|---|---|---|---|")
    for row in rows:
        print(f"| {row['example']} | {row['simple']} | {row['prbt']} | {row['nearest']} |")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phrealize",
                                     description="Port-Hamiltonian realization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_real = sub.add_parser("realize", help="run a realization pipeline on a file")
    p_real.add_argument("input", help="system file (.sys JSON) or sample record (.csv)")
    p_real.add_argument("--method", choices=("simple", "prbt", "nearest"), default="simple")
    p_real.add_argument("--order", type=int, default=None, help="target order for prbt")
    p_real.add_argument("--threshold", type=float, default=None,
                        help="relative truncation threshold for prbt")
    p_real.add_argument("--epsilon", type=float, default=None,
                        help="opt-in feedthrough shift for singular D + D^T")
    p_real.add_argument("--grid", default=None, help="frequency grid wmin:wmax:npts")
    p_real.add_argument("--seed", type=int, default=0, help="seed for the nearest method")
    p_real.add_argument("--max-iters", type=int, default=10_000,
                        help="iteration budget for the nearest method")
    p_real.add_argument("--stop-tol", type=float, default=1e-10,
                        help="relative stagnation tolerance for the nearest method")
    p_real.add_argument("--horizon", type=int, default=None,
                        help="Markov horizon for sample-data input")
    p_real.add_argument("--out", default=".", help="output directory")
    p_real.add_argument("--timing", action="store_true", help="print the method wall time")
    p_real.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_S,
                        help="soft wall-clock budget in seconds")
    p_real.set_defaults(func=cmd_realize)

    p_ana = sub.add_parser("analyze", help="classify and validate a file")
    p_ana.add_argument("input")
    p_ana.add_argument("--json", default=None, help="also write the report as JSON")
    p_ana.set_defaults(func=cmd_analyze)

    p_bench = sub.add_parser("bench", help="emit benchmark systems")
    p_bench.add_argument("name", nargs="?", choices=("example5", "ladder", "random"))
    p_bench.add_argument("--sections", type=int, default=100, help="ladder sections")
    p_bench.add_argument("--n", type=int, default=10)
    p_bench.add_argument("--m", type=int, default=1)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--all", action="store_true",
                         help="emit both worked examples (desk scale)")
    p_bench.add_argument("--timing", action="store_true",
                         help="with --all: run every method and print a timing table")
    p_bench.add_argument("--full", action="store_true",
                         help="with --timing: include the unstructured method on the ladder")
    p_bench.add_argument("--out", default=".", help="output directory")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PHRealizeError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
