"""`pclass analyze | verify | random`.

Exit codes: 0 when every check passed (undecided does not count as a
failure), 1 when a check failed, 2 on parse or configuration errors and 3
when a backend gave up, for instance after exhausting precision retries.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from .analysis import FAIL, PASS, SCHEMA, CaseSpec, random_suite, run_case
from .errors import (APthPower, BackendFailure, InvalidModule, ParseError, PClassError,
                     UnsupportedConfiguration)
from . import __version__
from .local import is_prime

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BACKEND = 0, 1, 2, 3
CONFIG_ERRORS = (ParseError, UnsupportedConfiguration, APthPower, InvalidModule, ValueError)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _log(path: str | None, record: dict) -> None:
    if not path:
        return
    with open(path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True, default=str) + "\n")


def _classify(exc: BaseException) -> int:
    if isinstance(exc, BackendFailure):
        return EXIT_BACKEND
    if isinstance(exc, CONFIG_ERRORS):
        return EXIT_CONFIG
    return EXIT_BACKEND


def _run_one(args: tuple[dict, int, int | None]) -> tuple[dict, float]:
    case, seed, precision = args
    t0 = time.perf_counter()
    spec = CaseSpec.from_dict(case)
    try:
        report = run_case(spec, seed, precision)
    except PClassError as exc:
        code = _classify(exc)
        report = {"schema": SCHEMA, "version": __version__, "case": spec.to_dict(), "key": spec.key(),
                  "seed": seed, "status": "error", "error": f"{type(exc).__name__}: {exc}",
                  "exit_code": code}
    return report, time.perf_counter() - t0


def cmd_analyze(ns) -> int:
    case = {"p": ns.p, "backend": ns.backend, "a": ns.a}
    if ns.backend == "local":
        if ns.ell is None:
            print("error: --ell is required for the local backend", file=sys.stderr)
            return EXIT_CONFIG
        case["ell"] = ns.ell
    if ns.precision is not None:
        case["precision"] = ns.precision
    try:
        spec = CaseSpec.from_dict(case)
        t0 = time.perf_counter()
        report = run_case(spec, ns.seed, ns.precision)
        elapsed = time.perf_counter() - t0
    except PClassError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _classify(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if ns.timing:
        report["timing"] = {"seconds": round(elapsed, 3)}
    _write(dumps(report), ns.out)
    _log(ns.log, {"key": report["key"], "case": report["case"], "status": report["status"],
                  "checks": report["checks"], "seconds": round(elapsed, 3)})
    return EXIT_OK if report["status"] == PASS else EXIT_CHECK


def load_corpus(path: str | None) -> list[dict]:
    if path:
        text = Path(path).read_text()
    else:
        text = resources.files("pclass").joinpath("data/corpus.jsonl").read_text()
    cases = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            case = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"corpus line {lineno}: {exc}") from exc
        CaseSpec.from_dict(case)
        cases.append(case)
    return cases


def cmd_verify(ns) -> int:
    try:
        cases = load_corpus(ns.corpus)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    jobs = [(c, ns.seed, ns.precision) for c in cases]
    if ns.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    results = []
    worst = EXIT_OK
    for report, seconds in outcomes:
        status = report["status"]
        if status == FAIL:
            worst = max(worst, EXIT_CHECK)
        elif status == "error":
            worst = max(worst, report["exit_code"])
        results.append({"key": report["key"], "case": report["case"], "status": status,
                        "checks": report.get("checks"), "error": report.get("error"),
                        "multiplicities": report.get("multiplicities")})
        _log(ns.log, {"key": report["key"], "case": report["case"], "status": status,
                      "checks": report.get("checks"), "error": report.get("error"),
                      "seconds": round(seconds, 3)})
    summary = {"schema": SCHEMA, "version": __version__, "seed": ns.seed, "cases": len(results),
               "passed": sum(r["status"] == PASS for r in results),
               "failed": sum(r["status"] != PASS for r in results), "results": results}
    _write(dumps(summary), ns.out)
    return worst


def cmd_random(ns) -> int:
    if ns.dim < 0 or ns.dim > 32 or ns.trials < 0:
        print("error: need 0 <= dim <= 32 and trials >= 0", file=sys.stderr)
        return EXIT_CONFIG
    if not is_prime(ns.p):
        print(f"error: p = {ns.p} is not prime", file=sys.stderr)
        return EXIT_CONFIG
    summary = random_suite(ns.p, ns.dim, ns.trials, ns.seed)
    _write(dumps(summary), ns.out)
    _log(ns.log, {"kind": "random", "p": ns.p, "dim": ns.dim, "trials": ns.trials, "seed": ns.seed,
                  "status": summary["status"], "failures": len(summary["failures"])})
    return EXIT_OK if summary["status"] == PASS else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pclass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pclass {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--log", help="append a JSONL run record to this file")
    common.add_argument("--precision", type=int, default=None,
                        help="starting ell-adic precision (default 40, or PCLASS_PRECISION)")

    an = sub.add_parser("analyze", parents=[common], help="analyze one tower K/F")
    an.add_argument("--p", type=int, required=True)
    an.add_argument("--backend", choices=["local", "quadratic"], default="local")
    an.add_argument("--ell", type=int)
    an.add_argument("--a", required=True, help="element expression, e.g. 'pi*u^2' or '-5'")
    an.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    an.set_defaults(func=cmd_analyze)

    ve = sub.add_parser("verify", parents=[common], help="run a JSONL corpus of cases")
    ve.add_argument("--corpus", help="JSONL file (default: the bundled corpus)")
    ve.add_argument("--workers", type=int, default=1)
    ve.set_defaults(func=cmd_verify)

    ra = sub.add_parser("random", parents=[common], help="fuzz the module engine")
    ra.add_argument("--p", type=int, required=True)
    ra.add_argument("--dim", type=int, default=20)
    ra.add_argument("--trials", type=int, default=500)
    ra.set_defaults(func=cmd_random)
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    return ns.func(ns)


if __name__ == "__main__":
    sys.exit(main())
