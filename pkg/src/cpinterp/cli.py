"""Command-line front end.

Subcommands: ``solve`` (full pipeline to a report), ``certify`` (feasibility
characterization with certificate search), ``apply`` (evaluate a solved map),
``kraus`` (print operation elements), ``verify`` (independently re-check a
report).  Exit codes for solve/certify: 0 feasible, 2 certified infeasible,
3 undetermined (including certified-no-strict), 4 input error.  ``verify``
exits 1 on the first failing check.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, certify, linalg, reports
from .choi import ChoiMatrix, KrausSet, apply_choi, choi_to_kraus, kraus_to_choi
from .constraints import (
    ConstraintSystem,
    InconsistentSystemError,
    ProblemInstance,
    instance_system,
    is_diagonal_instance,
    joint_support_reduce,
    embed_solution,
    prune_dependent,
)
from .reports import InstanceFormatError
from .solvers import (
    ExpSolveConfig,
    SolveStatus,
    barrier_sweep,
    project_affine,
    solve_diagonal,
    solve_exp,
    verify as verify_solution,
)

EXIT_FEASIBLE = 0
EXIT_VERIFY_FAIL = 1
EXIT_CERTIFIED_INFEASIBLE = 2
EXIT_UNDETERMINED = 3
EXIT_INPUT_ERROR = 4


@dataclass
class SolveOptions:
    method: str = "auto"
    tol: float = 1e-9
    max_iters: int = 10000
    seed: int = 0
    trace_preserving: bool | None = None  # None: take the instance file's flag
    parallel: bool = False
    certify_budget: int = 6


def _tool_block() -> dict:
    return {"name": "cpinterp", "version": __version__}


def _certificate_block(coefficients: np.ndarray, kind: str, system: ConstraintSystem) -> dict:
    combo = system.aggregate(coefficients)
    return {
        "kind": kind,
        "coefficients": [float(v) for v in coefficients],
        "objective": float(coefficients @ system.targets),
        "min_eigenvalue": float(linalg.min_eigenvalue(combo))
        if linalg.frobenius(combo) > 0
        else 0.0,
        "constraints": [str(t) for t in system.provenance],
    }


def _solver_block(outcome, method: str) -> dict:
    return {
        "method": method,
        "status": outcome.status.value,
        "iterations": int(outcome.iterations),
        "message": outcome.message,
    }


def run_solve(inst: ProblemInstance, options: SolveOptions) -> tuple[dict, int]:
    """Full pipeline: assemble, hermitize, prune, reduce, solve, project, extract.

    Returns the report dictionary and the process exit code.
    """
    started = time.perf_counter()
    tp = inst.trace_preserving if options.trace_preserving is None else options.trace_preserving
    report: dict = {
        "tool": _tool_block(),
        "status": None,
        "problem": {
            "n": inst.n,
            "k": inst.k,
            "pairs": inst.count,
            "trace_preserving": bool(tp),
        },
        "seed": int(options.seed),
    }

    try:
        base = instance_system(inst, trace_preserving=tp)
        pruned = prune_dependent(base)
    except InconsistentSystemError as exc:
        cert = certify.Certificate(
            exc.certificate_coefficients,
            certify.CertificateKind.EXCLUDES_PSD,
            objective=float(exc.certificate_coefficients @ exc.system.targets),
            min_eigenvalue=0.0,
        )
        assert certify.validate(cert, exc.system)
        report["status"] = "certified-infeasible"
        report["solver"] = {
            "method": "none",
            "status": "inconsistent-linear-system",
            "iterations": 0,
            "message": str(exc),
        }
        report["constraints"] = [str(t) for t in exc.system.provenance]
        report["targets"] = [float(b) for b in exc.system.targets]
        report["choi"] = None
        report["kraus"] = None
        report["certificate"] = _certificate_block(
            cert.coefficients, cert.kind.value, exc.system
        )
        report["timing"] = {"seconds": time.perf_counter() - started}
        return report, EXIT_CERTIFIED_INFEASIBLE

    report["constraints"] = [str(t) for t in base.provenance]
    report["targets"] = [float(b) for b in base.targets]

    reduced, reduction = joint_support_reduce(pruned)
    report["support"] = {
        "full_dim": int(reduction.full_dim),
        "reduced_dim": int(reduction.reduced_dim),
    }

    method = options.method
    if method == "auto":
        method = "diagonal" if is_diagonal_instance(inst) else "exp"

    exp_cfg = ExpSolveConfig(gradient_tol=options.tol, max_iterations=options.max_iters)
    if method == "exp":
        outcome = solve_exp(reduced, exp_cfg)
    elif method == "diagonal":
        outcome = solve_diagonal(reduced, exp_cfg)
    elif method == "barrier":
        outcome = barrier_sweep(
            reduced, feas_tol=max(options.tol, 1e-12), max_newton_steps=options.max_iters
        )
    else:
        raise InstanceFormatError(f"unknown method {options.method!r}")

    report["solver"] = _solver_block(outcome, method)

    if outcome.status is SolveStatus.FEASIBLE:
        x = embed_solution(outcome.solution, reduction)
        x = project_affine(x, pruned)
        check = verify_solution(x, base, tol=max(options.tol, 1e-12))
        # projection can nudge eigenvalues at the residual-tolerance scale
        kraus_tol = 10.0 * options.tol * (1.0 + linalg.frobenius(x))
        kraus = choi_to_kraus(ChoiMatrix(inst.n, inst.k, x), tol=kraus_tol)
        report["status"] = "feasible"
        report["choi"] = reports.matrix_to_jsonable(x)
        report["kraus"] = [reports.matrix_to_jsonable(v) for v in kraus.elements]
        report["kraus_count"] = len(kraus.elements)
        report["residuals"] = [float(r) for r in check.residuals]
        report["max_residual"] = float(check.max_residual)
        report["min_eigenvalue"] = float(check.min_eigenvalue)
        report["certificate"] = None
        report["timing"] = {"seconds": time.perf_counter() - started}
        return report, EXIT_FEASIBLE

    cert = certify.search_certificate(
        pruned,
        seed=options.seed,
        budget=options.certify_budget,
        parallel=options.parallel,
    )
    report["choi"] = None
    report["kraus"] = None
    if cert is not None and cert.kind is certify.CertificateKind.EXCLUDES_PSD:
        report["status"] = "certified-infeasible"
        report["certificate"] = _certificate_block(cert.coefficients, cert.kind.value, pruned)
        code = EXIT_CERTIFIED_INFEASIBLE
    elif cert is not None:
        report["status"] = "certified-no-strict"
        report["certificate"] = _certificate_block(cert.coefficients, cert.kind.value, pruned)
        code = EXIT_UNDETERMINED
    else:
        report["status"] = "undetermined"
        report["certificate"] = None
        code = EXIT_UNDETERMINED
    report["timing"] = {"seconds": time.perf_counter() - started}
    return report, code


def run_certify(inst: ProblemInstance, options: SolveOptions) -> tuple[dict, int]:
    """Feasibility characterization: solve, and on failure search certificates."""
    started = time.perf_counter()
    tp = inst.trace_preserving if options.trace_preserving is None else options.trace_preserving
    report: dict = {
        "tool": _tool_block(),
        "status": None,
        "problem": {
            "n": inst.n,
            "k": inst.k,
            "pairs": inst.count,
            "trace_preserving": bool(tp),
        },
        "seed": int(options.seed),
    }
    try:
        base = instance_system(inst, trace_preserving=tp)
        pruned = prune_dependent(base)
    except InconsistentSystemError as exc:
        report["status"] = "certified-infeasible"
        report["constraints"] = [str(t) for t in exc.system.provenance]
        report["certificate"] = _certificate_block(
            exc.certificate_coefficients / np.linalg.norm(exc.certificate_coefficients),
            certify.CertificateKind.EXCLUDES_PSD.value,
            exc.system,
        )
        report["solver"] = {
            "method": "none",
            "status": "inconsistent-linear-system",
            "iterations": 0,
            "message": str(exc),
        }
        report["span_check"] = None
        report["timing"] = {"seconds": time.perf_counter() - started}
        return report, EXIT_CERTIFIED_INFEASIBLE

    result = certify.feasibility_report(
        pruned,
        exp_config=ExpSolveConfig(gradient_tol=options.tol, max_iterations=options.max_iters),
        seed=options.seed,
        budget=options.certify_budget,
        parallel=options.parallel,
    )
    report["constraints"] = [str(t) for t in pruned.provenance]
    report["solver"] = _solver_block(result.solve_outcome, "exp")
    report["span_check"] = {
        "contains_positive_definite": bool(result.span_check.contains_positive_definite),
        "best_min_eigenvalue": float(result.span_check.best_min_eigenvalue),
    }
    report["status"] = result.status.value
    if result.status is certify.FeasibilityStatus.FEASIBLE:
        x = project_affine(result.solve_outcome.solution, pruned)
        check = verify_solution(x, base, tol=max(options.tol, 1e-12))
        report["choi"] = reports.matrix_to_jsonable(x)
        kraus_tol = 10.0 * options.tol * (1.0 + linalg.frobenius(x))
        kraus = choi_to_kraus(ChoiMatrix(inst.n, inst.k, x), tol=kraus_tol)
        report["kraus"] = [reports.matrix_to_jsonable(v) for v in kraus.elements]
        report["kraus_count"] = len(kraus.elements)
        report["residuals"] = [float(r) for r in check.residuals]
        report["max_residual"] = float(check.max_residual)
        report["min_eigenvalue"] = float(check.min_eigenvalue)
        report["certificate"] = None
        code = EXIT_FEASIBLE
    else:
        report["choi"] = None
        report["kraus"] = None
        if result.certificate is not None:
            report["certificate"] = _certificate_block(
                result.certificate.coefficients, result.certificate.kind.value, pruned
            )
        else:
            report["certificate"] = None
        code = (
            EXIT_CERTIFIED_INFEASIBLE
            if result.status is certify.FeasibilityStatus.CERTIFIED_INFEASIBLE
            else EXIT_UNDETERMINED
        )
    report["timing"] = {"seconds": time.perf_counter() - started}
    return report, code


def run_apply(report_path: str | Path, matrix_path: str | Path) -> np.ndarray:
    """Evaluate the solved map (from a report's Choi matrix) on an input matrix."""
    doc = reports.read_report(report_path)
    problem = doc.get("problem", {})
    n, k = problem.get("n"), problem.get("k")
    if not isinstance(n, int) or not isinstance(k, int):
        raise InstanceFormatError("report lacks problem dimensions")
    phi = reports.report_matrix(doc, "choi", n * k, n * k)
    try:
        matrix_doc = json.loads(Path(matrix_path).read_text())
    except OSError as exc:
        raise InstanceFormatError(f"cannot read {matrix_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{matrix_path} is not valid JSON: {exc}") from exc
    if isinstance(matrix_doc, dict) and "A" in matrix_doc:
        matrix_doc = matrix_doc["A"]
    a = reports.matrix_from_json(matrix_doc, n, n, "input matrix")
    return apply_choi(ChoiMatrix(n, k, phi), a)


def run_verify(report_path: str | Path, instance_path: str | Path, tol: float = 1e-8):
    """Independently re-check a report against its instance.

    Yields (check name, passed, detail) tuples, stopping after the first
    failure.
    """
    doc = reports.read_report(report_path)
    inst = reports.parse_instance(instance_path)
    status = doc.get("status")
    problem = doc.get("problem", {})
    tp = bool(problem.get("trace_preserving", inst.trace_preserving))

    if problem.get("n") != inst.n or problem.get("k") != inst.k:
        yield ("dimensions", False,
               f"report is for {problem.get('n')} x {problem.get('k')}, "
               f"instance is {inst.n} x {inst.k}")
        return
    yield ("dimensions", True, f"n={inst.n} k={inst.k}")

    if status == "feasible":
        if doc.get("choi") is None:
            yield ("payload", False, "status feasible but no Choi matrix present")
            return
        yield ("payload", True, "feasible report carries a Choi matrix")
        p = inst.n * inst.k
        phi = reports.report_matrix(doc, "choi", p, p)
        herm_gap = linalg.frobenius(phi - phi.conj().T)
        if herm_gap > tol * (1.0 + linalg.frobenius(phi)):
            yield ("hermitian", False, f"Choi matrix is not Hermitian (gap {herm_gap:.3g})")
            return
        yield ("hermitian", True, f"gap {herm_gap:.3g}")

        base = instance_system(inst, trace_preserving=tp)
        res = base.residuals(phi)
        max_res = float(np.max(np.abs(res)))
        if max_res > tol:
            worst = int(np.argmax(np.abs(res)))
            yield ("residuals", False,
                   f"constraint {base.provenance[worst]} residual {res[worst]:.3g} "
                   f"exceeds {tol:.3g}")
            return
        yield ("residuals", True, f"max residual {max_res:.3g}")

        mineig = linalg.min_eigenvalue(phi)
        if mineig < -tol * (1.0 + linalg.frobenius(phi)):
            yield ("psd", False, f"min eigenvalue {mineig:.3g}")
            return
        yield ("psd", True, f"min eigenvalue {mineig:.3g}")

        if doc.get("kraus") is None:
            yield ("kraus", False, "feasible report carries no Kraus elements")
            return
        elements = [
            reports.matrix_from_json(v, inst.n, inst.k, f"kraus[{i}]")
            for i, v in enumerate(doc["kraus"])
        ]
        rebuilt = kraus_to_choi(KrausSet(inst.n, inst.k, elements)).matrix
        gap = linalg.frobenius(rebuilt - phi) / (1.0 + linalg.frobenius(phi))
        if gap > tol:
            yield ("kraus", False, f"Kraus round trip misses the Choi matrix by {gap:.3g}")
            return
        yield ("kraus", True, f"round-trip gap {gap:.3g}")
        return

    if status == "certified-infeasible":
        cert_doc = doc.get("certificate")
        if not cert_doc:
            yield ("payload", False, "certified-infeasible report carries no certificate")
            return
        yield ("payload", True, "certificate present")
        try:
            base = instance_system(inst, trace_preserving=tp)
            system = prune_dependent(base)
        except InconsistentSystemError as exc:
            system = exc.system
        tags = [str(t) for t in system.provenance]
        if cert_doc.get("constraints") != tags:
            yield ("certificate", False, "certificate constraint list does not match "
                   "the rebuilt system")
            return
        cert = certify.Certificate(
            np.asarray(cert_doc["coefficients"], dtype=float),
            certify.CertificateKind(cert_doc["kind"]),
            objective=float(cert_doc.get("objective", 0.0)),
            min_eigenvalue=float(cert_doc.get("min_eigenvalue", 0.0)),
        )
        if not certify.validate(cert, system):
            yield ("certificate", False, "certificate does not validate against the "
                   "rebuilt system")
            return
        yield ("certificate", True, "certificate validates")
        return

    yield ("payload", doc.get("choi") is None,
           f"status {status!r} must not carry a solution")


def _print_matrix(m: np.ndarray, stream=None) -> None:
    stream = stream or _sys.stdout
    for row in np.asarray(m, dtype=complex):
        cells = []
        for z in row:
            if abs(z.imag) == 0.0:
                cells.append(format(z.real, ".17g"))
            else:
                cells.append(f"{format(z.real, '.17g')}{z.imag:+.17g}j")
        stream.write("  ".join(cells) + "\n")


def _emit_report(report: dict, out: str | None) -> None:
    text = reports.dumps_canonical(report) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        _sys.stdout.write(text)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=("exp", "barrier", "auto"), default=None,
                        help="solver: exponential potential, barrier sweep, or auto "
                             "(diagonal fast path when applicable; default auto)")
    parser.add_argument("--tol", type=float, default=None,
                        help="residual tolerance (default 1e-9)")
    parser.add_argument("--max-iters", type=int, default=None,
                        help="iteration cap (default 10000)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for the certificate search (default 0)")
    parser.add_argument("--trace-preserving", action="store_true", default=None,
                        help="require a quantum channel (trace preserving)")
    parser.add_argument("--parallel", action="store_true",
                        help="parallelize certificate-search restarts")
    parser.add_argument("--out", default=None, help="write the report to this path")


def _options_from_args(args, file_options: dict) -> SolveOptions:
    opts = SolveOptions()
    opts.method = args.method or file_options.get("method", "auto")
    opts.tol = args.tol if args.tol is not None else file_options.get("tol", 1e-9)
    opts.max_iters = (
        args.max_iters if args.max_iters is not None else file_options.get("max_iters", 10000)
    )
    opts.seed = args.seed if args.seed is not None else file_options.get("seed", 0)
    opts.trace_preserving = True if args.trace_preserving else None
    opts.parallel = bool(args.parallel)
    if opts.tol <= 0:
        raise InstanceFormatError("--tol must be positive")
    if opts.max_iters < 1:
        raise InstanceFormatError("--max-iters must be at least 1")
    return opts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpinterp",
        description="Find completely positive maps taking prescribed values.",
    )
    parser.add_argument("--version", action="version", version=f"cpinterp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance and emit a report")
    p_solve.add_argument("instance", help="instance JSON file")
    _add_solver_flags(p_solve)

    p_cert = sub.add_parser("certify", help="characterize feasibility with certificates")
    p_cert.add_argument("instance", help="instance JSON file")
    p_cert.add_argument("--budget", type=int, default=6,
                        help="random restarts for the certificate search")
    _add_solver_flags(p_cert)

    p_apply = sub.add_parser("apply", help="apply a solved map to a matrix")
    p_apply.add_argument("report", help="report JSON file with a Choi matrix")
    p_apply.add_argument("matrix", help="JSON file holding an n x n matrix")

    p_kraus = sub.add_parser("kraus", help="print the operation elements of a report")
    p_kraus.add_argument("report", help="report JSON file with Kraus elements")

    p_verify = sub.add_parser("verify", help="independently re-check a report")
    p_verify.add_argument("report", help="report JSON file")
    p_verify.add_argument("instance", help="instance JSON file")
    p_verify.add_argument("--tol", type=float, default=1e-8)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("solve", "certify"):
            inst = reports.parse_instance(args.instance)
            file_options = reports.solver_options_from_jsonable(
                json.loads(Path(args.instance).read_text())
            )
            options = _options_from_args(args, file_options)
            if args.command == "solve":
                report, code = run_solve(inst, options)
            else:
                options.certify_budget = args.budget
                report, code = run_certify(inst, options)
            _emit_report(report, args.out)
            return code

        if args.command == "apply":
            result = run_apply(args.report, args.matrix)
            _print_matrix(result)
            return 0

        if args.command == "kraus":
            doc = reports.read_report(args.report)
            problem = doc.get("problem", {})
            n, k = problem.get("n"), problem.get("k")
            if doc.get("kraus") is None or not isinstance(n, int) or not isinstance(k, int):
                raise InstanceFormatError("report carries no Kraus elements")
            for i, v in enumerate(doc["kraus"]):
                _sys.stdout.write(f"# element {i + 1}\n")
                _print_matrix(reports.matrix_from_json(v, n, k, f"kraus[{i}]"))
            return 0

        if args.command == "verify":
            failed = False
            for name, ok, detail in run_verify(args.report, args.instance, tol=args.tol):
                _sys.stdout.write(f"{'ok' if ok else 'FAIL'}: {name}: {detail}\n")
                if not ok:
                    failed = True
                    break
            return EXIT_VERIFY_FAIL if failed else 0

    except InstanceFormatError as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    except OSError as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
