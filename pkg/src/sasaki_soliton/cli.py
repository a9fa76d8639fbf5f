"""Command-line interface: ``sasaki-soliton verify <suite>`` and ``sasaki-soliton matrix``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric capability error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import Callable

from . import contact, models, riemann, soliton
from .errors import (
    CapabilityError,
    DomainError,
    GeometryError,
    InvalidArgument,
    NumericError,
    SingularValueError,
    TheoremViolation,
)
from .fields import sample_points
from .report import SCHEMA_VERSION, Check, VerificationReport

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3

SUITES = (
    "axioms",
    "identities",
    "classify",
    "theorem1",
    "lemma1",
    "theorem2",
    "pde",
    "integrability",
    "universal",
)

MATRIX_MODELS = (
    "heisenberg:n=1",
    "heisenberg:n=2",
    "heisenberg:n=3",
    "heisenberg-deformed:n=1,a=2",
    "random:dim=3",
    "random:dim=5",
    "flat-r3",
)

# lowest jet order at which each suite's identities are fully resolved
REQUIRED_ORDER = {
    "axioms": 1,
    "identities": 3,
    "classify": 3,
    "theorem1": 3,
    "lemma1": 3,
    "theorem2": 3,
    "pde": 1,
    "integrability": 3,
    "universal": 3,
}

NOT_APPLICABLE = {"not-applicable", "not-a-soliton", "refused"}


@dataclass
class RunConfig:
    command: str = "verify"
    suite: str = "axioms"
    model: str = "heisenberg:n=1"
    n: int | None = None
    a: float | None = None
    tolerance: float = 1e-7
    order: int = 3
    samples: int = 64
    seed: int = 0
    format: str = "text"
    output: str | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be positive")
        if self.samples < 1:
            raise InvalidArgument("sample count must be at least 1")
        if not 1 <= self.order <= 3:
            raise InvalidArgument("jet order must be in 1..3")
        if self.format not in ("text", "json"):
            raise InvalidArgument(f"unknown format {self.format!r}")
        if self.command == "verify" and self.suite not in SUITES:
            raise InvalidArgument(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")

    def selector(self) -> str:
        kind, params = models.parse_selector(self.model)
        if self.n is not None:
            params["n"] = str(self.n)
        if self.a is not None:
            params["a"] = str(self.a)
        if kind == "random":
            params.setdefault("seed", str(self.seed))
        if not params:
            return kind
        return kind + ":" + ",".join(f"{k}={v}" for k, v in params.items())

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("output")
        out.pop("format")
        return out


# suites ---------------------------------------------------------------------------------------


def _unavailable(suite: str, entry: models.CatalogEntry, tol: float, why: str) -> VerificationReport:
    rep = VerificationReport(suite=suite, model=entry.selector)
    rep.checks.append(Check.not_applicable(suite, "precondition", tol, why))
    rep.classification = "not-applicable"
    return rep


def _need_structure(fn: Callable) -> Callable:
    def run(entry, points, tol):
        if entry.structure is None:
            return _unavailable(fn.__name__.removeprefix("_run_"), entry, tol, "model has no contact structure")
        return fn(entry, points, tol)

    run.__name__ = fn.__name__
    return run


@_need_structure
def _run_axioms(entry, points, tol):
    return contact.verify_axioms(entry.structure, points, tol)


@_need_structure
def _run_identities(entry, points, tol):
    return contact.identity_suite(entry.structure, points, tol)


@_need_structure
def _run_classify(entry, points, tol):
    return contact.classify_report(entry.structure, points, tol)


@_need_structure
def _run_theorem1(entry, points, tol):
    return soliton.theorem1_suite(entry.structure, entry.V, points, tol)


@_need_structure
def _run_lemma1(entry, points, tol):
    return soliton.lemma1_suite(entry.structure, entry.V, points, tol)


@_need_structure
def _run_theorem2(entry, points, tol):
    return soliton.theorem2_suite(entry.structure, entry.V, points, tol)


def _run_pde(entry, points, tol):
    if entry.kind != "heisenberg":
        return _unavailable("pde", entry, tol, "the PDE system is specific to the Heisenberg model")
    model = models.build_heisenberg(int(entry.params.get("n", 1)))
    rep = models.pde_check(model, entry.V, points, tol)
    for label, (cand, target) in models.pde_mutations(model.n).items():
        mutated = models.pde_check(model, cand, points, tol)
        c = mutated.check(target)
        rep.checks.append(
            Check.from_values(
                f"mutation {label} breaks '{target}'",
                "pde-mutation",
                [c.max_residual],
                1e-2,
                comparison="above",
            )
        )
    return rep


def _run_integrability(entry, points, tol):
    data = soliton.SolitonData(entry.V, entry.lam)
    return soliton.integrability_check(entry.geometry, data, points, tol, entry.structure)


def _run_universal(entry, points, tol):
    return riemann.universal_suite(entry.geometry, entry.V, points)


RUNNERS: dict[str, Callable] = {
    "axioms": _run_axioms,
    "identities": _run_identities,
    "classify": _run_classify,
    "theorem1": _run_theorem1,
    "lemma1": _run_lemma1,
    "theorem2": _run_theorem2,
    "pde": _run_pde,
    "integrability": _run_integrability,
    "universal": _run_universal,
}


def run_suite(suite: str, entry: models.CatalogEntry, points, tol: float) -> VerificationReport:
    start = time.perf_counter()
    rep = RUNNERS[suite](entry, points, tol)
    rep.suite = suite
    rep.model = entry.selector
    rep.runtime = time.perf_counter() - start
    return rep


def _points(entry: models.CatalogEntry, config: RunConfig):
    return sample_points(entry.geometry.chart, config.samples, config.seed)


# commands -------------------------------------------------------------------------------------


def cmd_verify(config: RunConfig) -> tuple[int, VerificationReport]:
    need = REQUIRED_ORDER[config.suite]
    if config.order < need:
        raise CapabilityError(f"suite {config.suite} needs jets of order {need}, got --order {config.order}")
    entry = models.resolve_model(config.selector())
    rep = run_suite(config.suite, entry, _points(entry, config), config.tolerance)
    rep.config = config.echo()
    return (EXIT_PASS if rep.passed else EXIT_FAIL), rep


def cell_status(rep: VerificationReport) -> str:
    if rep.classification in NOT_APPLICABLE:
        return "n/a"
    return "pass" if rep.passed else "fail"


def cmd_report_matrix(config: RunConfig, model_selectors=MATRIX_MODELS, suites=SUITES) -> tuple[int, dict]:
    """Every suite on every catalog model; cells carry a status and per-tag residuals."""
    cells: dict[str, dict] = {}
    coverage: dict[str, dict[str, float | None]] = {}
    for sel in model_selectors:
        cfg = RunConfig(command="matrix", model=sel, samples=config.samples, seed=config.seed,
                        tolerance=config.tolerance, order=config.order)
        entry = models.resolve_model(cfg.selector())
        points = _points(entry, cfg)
        row = {}
        for suite in suites:
            try:
                rep = run_suite(suite, entry, points, config.tolerance)
            except (GeometryError, ArithmeticError, ValueError) as exc:
                row[suite] = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
                continue
            checks = {}
            for c in rep.checks:
                if not c.applicable:
                    continue
                checks[c.tag] = max(checks.get(c.tag, 0.0), c.statistic or 0.0) if c.comparison == "below" else c.statistic
                if c.comparison == "below" and c.passed:
                    cov = coverage.setdefault(c.tag, {})
                    prev = cov.get(entry.selector)
                    cov[entry.selector] = c.statistic if prev is None else max(prev, c.statistic)
            row[suite] = {
                "status": cell_status(rep),
                "classification": rep.classification,
                "checks": checks,
                "fitted": {k: v.value for k, v in rep.fitted.items()},
            }
        cells[entry.selector] = row
    statuses = [cell["status"] for row in cells.values() for cell in row.values()]
    ok = all(s in ("pass", "n/a") for s in statuses)
    matrix = {
        "schema_version": SCHEMA_VERSION,
        "config": {"tolerance": config.tolerance, "samples": config.samples, "seed": config.seed},
        "models": list(cells),
        "suites": list(suites),
        "cells": cells,
        "coverage": coverage,
        "tags": sorted(coverage),
        "passed": ok,
    }
    return (EXIT_PASS if ok else EXIT_FAIL), matrix


def matrix_json(matrix: dict) -> str:
    return json.dumps(matrix, indent=2, sort_keys=True)


def matrix_text(matrix: dict) -> str:
    suites = matrix["suites"]
    width = max(len(m) for m in matrix["models"]) + 2
    lines = ["model".ljust(width) + "".join(s[:13].ljust(15) for s in suites)]
    for model, row in matrix["cells"].items():
        lines.append(model.ljust(width) + "".join(row[s]["status"].ljust(15) for s in suites))
    lines.append(f"{len(matrix['tags'])} distinct identity tags verified")
    lines.append("overall: " + ("PASS" if matrix["passed"] else "FAIL"))
    return "\n".join(lines)


# argument parsing -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="heisenberg:n=1", help="model selector, e.g. heisenberg:n=2")
    common.add_argument("--n", type=int, default=None, help="override the model's n")
    common.add_argument("--a", type=float, default=None, help="override the deformation parameter")
    common.add_argument("--tolerance", type=float, default=1e-7)
    common.add_argument("--order", type=int, default=3, help="jet order (1..3)")
    common.add_argument("--samples", type=int, default=64)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="sasaki-soliton", description="Numerical verification of Ricci solitons on contact metric manifolds."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run one verification suite on one model")
    v.add_argument("suite", choices=SUITES)
    sub.add_parser("matrix", parents=[common], help="run every suite on every catalog model")
    sub.add_parser("models", help="list catalog model selectors")
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    if args.command == "models":
        _emit("\n".join(MATRIX_MODELS), None)
        return EXIT_PASS
    try:
        config = RunConfig(
            command=args.command,
            suite=getattr(args, "suite", "axioms"),
            model=args.model,
            n=args.n,
            a=args.a,
            tolerance=args.tolerance,
            order=args.order,
            samples=args.samples,
            seed=args.seed,
            format=args.format,
            output=args.output,
        )
        if config.command == "verify":
            code, rep = cmd_verify(config)
            _emit(rep.to_json() if config.format == "json" else rep.text(), config.output)
        else:
            code, matrix = cmd_report_matrix(config)
            _emit(matrix_json(matrix) if config.format == "json" else matrix_text(matrix), config.output)
        return code
    except (CapabilityError, NumericError, SingularValueError) as exc:
        print(f"numeric capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (InvalidArgument, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TheoremViolation, GeometryError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
