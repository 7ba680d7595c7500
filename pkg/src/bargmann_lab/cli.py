"""``bargmann-lab`` command line.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, fock, functionals, quadrature, toeplitz
from .config import EXPERIMENTS, ExperimentConfig
from .errors import InvalidArgument, NumericalFailure, ResourceLimitError

log = logging.getLogger("bargmann_lab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_singular_csv(path, profiles):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["D", "d", "k", "sigma"])
        for profile in profiles:
            for D, d, k, s in profile.rows():
                out.writerow([D, d, k, repr(s)])


def _run_assemble(cfg, prefix):
    phi = cfg.make_symbol()
    rule = quadrature.build_product_rule(phi.n, cfg.order)
    entries = []
    for D in cfg.D_ladder:
        op = toeplitz.assemble_toeplitz(phi, fock.TruncationSpec(phi.n, D, phi.d), rule)
        name = f"{prefix}_D{D}"
        toeplitz.save_operator(op, name)
        entries.append({"D": D, "prefix": Path(name).name, "rows": op.matrix.shape[0],
                        "frobenius_norm": float(np.linalg.norm(op.matrix))})
    write_json(prefix + ".json", {"experiment": "assemble", "symbol": phi.description,
                                  "quadrature_order": cfg.order, "operators": entries})
    return EXIT_OK


def _run_profile(cfg, prefix):
    phi = cfg.make_symbol()
    rule = quadrature.build_product_rule(phi.n, cfg.order)
    prof = functionals.functional_profile(phi, cfg.functional, rule, cfg.radii, g=cfg.g_vector(),
                                          seed=cfg.seed, threads=cfg.threads)
    functionals.write_profile(prof, prefix)
    sp = diagnostics.compactness_profile(phi, cfg.D_ladder, cfg.order, threads=cfg.threads,
                                         **cfg.thresholds)
    write_singular_csv(prefix + "_singular.csv", [sp])
    write_json(prefix + "_singular.json", {"symbol": phi.description, "quadrature_order": cfg.order,
                                           **sp.to_json_dict()})
    return EXIT_OK


def _run_certify(cfg, prefix):
    phi = cfg.make_symbol()
    rule = quadrature.build_product_rule(phi.n, cfg.order)
    spec = fock.TruncationSpec(phi.n, cfg.D_ladder[-1], phi.d)
    grid = functionals.default_grid(phi.n, cfg.seed, cfg.radii)
    summary = []
    for r in cfg.schur_radii:
        rep = functionals.schur_tail_report(phi, r, spec, rule, grid=grid, threads=cfg.threads)
        functionals.write_schur_report(rep, f"{prefix}_r{r:g}", phi.description, cfg.order)
        summary.append({"r": r, "alpha_hat": rep.alpha_hat, "beta_hat": rep.beta_hat,
                        "tail_norm": rep.tail_norm, "bound": rep.bound, "passes": rep.passes,
                        "alpha_printed": rep.alpha_printed, "beta_printed": rep.beta_printed})
    betas = [s["beta_hat"] for s in summary]
    payload = {"experiment": "certify", "symbol": phi.description, "quadrature_order": cfg.order,
               "D": spec.D, "reports": summary,
               "beta_strictly_decreasing": all(b < a for a, b in zip(betas, betas[1:])),
               "passed": all(s["passes"] for s in summary)}
    write_json(prefix + ".json", payload)
    return EXIT_OK if payload["passed"] else EXIT_VERIFY


def _run_verify(cfg, prefix):
    report = diagnostics.verify(cfg.suite, cfg)
    write_json(prefix + ".json", report)
    for check in report["checks"]:
        log.info("%-28s %s residual=%s tol=%s", check["name"],
                 "pass" if check["passed"] else "FAIL", check["residual"], check["tolerance"])
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _run_example(cfg, prefix):
    report = diagnostics.run_example(cfg.example, cfg.d_ladder, cfg.order, cfg.radii, cfg.D_ladder,
                                     seed=cfg.seed, threads=cfg.threads, thresholds=cfg.thresholds)
    for row in report["per_d"]:
        for key in ("stroethoff", "necessary_e1", "necessary_random"):
            functionals.write_profile(row[key], f"{prefix}_d{row['d']}_{key}")
    write_singular_csv(prefix + "_singular.csv", [row["singular"] for row in report["per_d"]])
    write_json(prefix + ".json", diagnostics.example_to_json(report))
    log.info("%s: %s", cfg.example, report["summary"])
    return EXIT_OK


RUNNERS = {"assemble": _run_assemble, "profile": _run_profile, "certify": _run_certify,
           "verify": _run_verify, "example": _run_example}


def build_parser():
    parser = argparse.ArgumentParser(prog="bargmann-lab",
                                     description="Vector-valued Toeplitz operators on truncated Fock spaces.")
    parser.add_argument("command", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", help="output path prefix (overrides the config)")
    parser.add_argument("--seed", type=int, help="unsigned seed (overrides the config)")
    parser.add_argument("--order", type=int, help="quadrature order (overrides the config)")
    parser.add_argument("--threads", type=int, help="worker threads (overrides the config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = ExperimentConfig.load(args.config, experiment=args.command)
        overrides = {k: getattr(args, k) for k in ("out", "seed", "order", "threads")
                     if getattr(args, k) is not None}
        if overrides:
            cfg = ExperimentConfig.from_dict({**vars(cfg), **overrides})
        prefix = str(cfg.out)
        Path(prefix).parent.mkdir(parents=True, exist_ok=True)
        return RUNNERS[cfg.experiment](cfg, prefix)
    except (InvalidArgument, ResourceLimitError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (NumericalFailure, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
