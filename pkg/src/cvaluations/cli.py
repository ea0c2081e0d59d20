"""Command line entry point.

    cvaluations run CONFIG [--out DIR] [--seed N] [--jobs K]
    cvaluations validate CONFIG
    cvaluations list-scenarios

Exit codes: 0 all scenarios pass, 1 some scenario failed, 2 the config could
not be read or the reports could not be written.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, ConfigParseError, load_config
from .harness import KINDS
from .suite import ReportWriteError, run_suite, write_reports

OUT_DIR_ENV = "CVALUATIONS_OUT_DIR"
DEFAULT_OUT_DIR = "cvaluations-out"

log = logging.getLogger("cvaluations")

KIND_HELP = {
    "valuation_law": "Phi(f v g) + Phi(f ^ g) = Phi(f) + Phi(g) on random simple functions",
    "oracle_equivalence": "direct evaluation vs. the E/F/G/H four-set reconstruction, bitwise",
    "characteristic_formula": "closed form of Phi(c chi_E) vs. direct evaluation",
    "re_im_split": "Phi(f) = Phi(Re f) + Phi(i Im f)",
    "imaginary_rotation": "f -> Phi(i f) and its valuation law on real functions",
    "component_split": "Phi = Phi1 + i Phi2 on real functions, both real valuations",
    "times_i_lattice": "i(f v g) = if v ig and i(f ^ g) = if ^ ig for real f, g",
    "translation_invariance": "Phi(f(. - t)) = Phi(f) on a box grid",
    "rotation_invariance": "Phi(f o theta^-1) = Phi(f) on a sphere quadrature",
    "continuity": "Phi(f_k) -> Phi(f) along an L^p-convergent sequence",
    "refinement_invariance": "splitting cells leaves Phi and the L^p norm unchanged",
    "necessity_growth": "a generator above the |a|^p envelope makes Phi unbounded near 0",
    "necessity_delta_infinite": "h(0) != 0 diverges on an infinite-measure space",
}


def _load(path):
    try:
        return load_config(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
    except (ConfigParseError, ConfigError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
    return None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return 2
    out = args.out or cfg.output.dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR
    summary = run_suite(cfg, jobs=args.jobs, seed=args.seed)
    for r in summary.reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.scenario_id:<28} {r.kind:<26} dev={r.max_deviation:.3e} tol={r.tolerance:.1e}")
    try:
        json_path, csv_path = write_reports(summary, out, cfg.output.json_name, cfg.output.csv_name)
    except ReportWriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    log.info("wrote %s and %s", json_path, csv_path)
    print(f"overall: {'PASS' if summary.overall_pass else 'FAIL'}")
    return 0 if summary.overall_pass else 1


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return 2
    print(f"valid: {len(cfg.scenarios)} scenarios, {len(cfg.quadruples)} quadruples, {len(cfg.domains)} domains")
    return 0


def cmd_list(args) -> int:
    for kind in KINDS:
        print(f"{kind:<26} {KIND_HELP[kind]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvaluations", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run every scenario of a config")
    run.add_argument("config")
    run.add_argument("--out", help=f"report directory (default: config, ${OUT_DIR_ENV}, ./{DEFAULT_OUT_DIR})")
    run.add_argument("--seed", type=int, help="override every scenario seed")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.set_defaults(func=cmd_run)
    val = sub.add_parser("validate", help="parse and check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    ls = sub.add_parser("list-scenarios", help="list scenario kinds")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
