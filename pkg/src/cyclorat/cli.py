"""Command-line front end.

Subcommands wire the library into a pipeline over CSV datasets:

* ``simulate``   - run a preference model over a value design, write a dataset CSV
* ``check``      - test cyclic monotonicity, reporting witness cycles
* ``fit``        - build potentials and the conjugate cost description
* ``verify``     - fit plus Fenchel/optimality verification
* ``report-all`` - the full pipeline plus two-point and weak-stochastic-
  transitivity diagnostics

Exit codes: 0 success, 2 usage/IO/config failure, 3 analysis ran and the
hypothesis was rejected (a violation was found or verification exceeded its
tolerance).  Menus in a multi-menu file are analyzed independently; report
sections are ordered by menu id.  ``CYCLORAT_LOG`` sets log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import TOL_CM, TOL_OPT, TOL_SIMPLEX, Dataset
from .dataio import (
    load_model_spec,
    parse_datasets_csv,
    write_dataset_csv,
)
from .errors import CycloratError, InconsistentPairError
from .models import simulate_dataset
from .dataio import fmt17
from .monotonicity import (
    check_cyclic_monotonicity,
    check_two_point_monotonicity,
    check_weak_stochastic_transitivity,
    cycle_sum,
)
from .rationalization import (
    SmoothedDataDerivedCost,
    compute_potentials,
    cost_description,
    pum_solve_general,
    verify_rationalization,
)
from .report import SCHEMA_VERSION, dumps_report

log = logging.getLogger("cyclorat")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REJECTED = 3


@dataclass
class RunConfig:
    """Everything one invocation needs; tolerances must be positive."""

    command: str
    input: str | None = None
    output: str | None = None
    model: str | None = None
    tol_simplex: float = TOL_SIMPLEX
    tol_cm: float = TOL_CM
    tol_opt: float = TOL_OPT
    epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("tol_simplex", "tol_cm", "tol_opt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def echo(self) -> dict:
        return {
            "command": self.command,
            "input": self.input,
            "output": self.output,
            "model": self.model,
            "tol_simplex": self.tol_simplex,
            "tol_cm": self.tol_cm,
            "tol_opt": self.tol_opt,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }


def _base_report(config: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "cyclorat", "version": __version__},
        "config": config.echo(),
    }


def _wst_section(datasets: dict[str, Dataset], tol: float) -> dict | None:
    # Weak stochastic transitivity needs plain binary choice frequencies:
    # use menus of exactly two alternatives carrying a single observation.
    binary: dict[tuple[str, str], float] = {}
    used = []
    for menu_id in sorted(datasets):
        d = datasets[menu_id]
        if d.menu.size != 2 or d.n != 1:
            continue
        x, y = d.menu.alternatives
        p = float(d.observations[0].probs.entries[0])
        for key, val in (((x, y), p), ((y, x), 1.0 - p)):
            if key in binary and abs(binary[key] - val) > tol:
                return {
                    "error": f"conflicting binary probabilities for pair {key!r}",
                    "menus_used": used,
                }
            binary[key] = val
        used.append(menu_id)
    if len({z for pair in binary for z in pair}) < 3:
        return None
    try:
        triples = check_weak_stochastic_transitivity(binary, tol)
    except InconsistentPairError as exc:
        return {"error": str(exc), "menus_used": used}
    return {
        "menus_used": used,
        "violations": [list(t) for t in triples],
    }


def _analyze_menu(d: Dataset, config: RunConfig, depth: str) -> tuple[dict, bool, bool]:
    """Returns (section, cm_ok, verify_ok) for one menu at the given depth."""
    section: dict = {"menu_id": d.menu.id, "n_observations": d.n, "n_alternatives": d.menu.size}
    t0 = time.perf_counter()
    verdict = check_cyclic_monotonicity(d, config.tol_cm)
    section["cyclic_monotonicity"] = dict(verdict.to_dict(), tolerance=config.tol_cm)
    cm_ok = verdict.is_pass
    verify_ok = True
    if depth != "check" and cm_ok:
        fit = compute_potentials(d, config.tol_cm)
        section["potentials"] = fit.to_dict()
        section["cost"] = cost_description(fit, d)
        if depth in ("verify", "report-all"):
            rng = np.random.default_rng(config.seed)
            report = verify_rationalization(d, fit, config.tol_opt, rng=rng)
            section["verification"] = report.to_dict()
            verify_ok = report.max_fenchel_gap <= config.tol_opt
            if config.epsilon > 0:
                smoothed = SmoothedDataDerivedCost(fit, d, config.epsilon)
                rows = []
                for i in range(d.n):
                    sol = pum_solve_general(smoothed, d.values_matrix[i], config.tol_opt)
                    rows.append(
                        {
                            "observation": i + 1,
                            "probs": sol.probs.entries.tolist(),
                            "distance_to_observed": float(
                                np.max(np.abs(sol.probs.entries - d.probs_matrix[i]))
                            ),
                        }
                    )
                section["smoothed_solutions"] = {"epsilon": config.epsilon, "rows": rows}
    if depth == "report-all":
        section["two_point_violations"] = [
            {
                "first": v.first,
                "second": v.second,
                "alternative": v.alternative,
                "product": v.product,
            }
            for v in check_two_point_monotonicity(d, config.tol_cm)
        ]
    section["timing_ms"] = (time.perf_counter() - t0) * 1000.0
    return section, cm_ok, verify_ok


def _series_rows(datasets: dict[str, Dataset], report: dict) -> list[tuple[str, str, str, float]]:
    # Tidy (menu_id, series, key, value) rows for downstream plotting: the
    # two-cycle sum distribution, potentials, and per-observation gaps.
    rows: list[tuple[str, str, str, float]] = []
    by_id = {section["menu_id"]: section for section in report.get("menus", [])}
    for menu_id in sorted(datasets):
        d = datasets[menu_id]
        for i in range(1, d.n + 1):
            for j in range(i + 1, d.n + 1):
                rows.append((menu_id, "two_cycle_sum", f"{i}-{j}", cycle_sum(d, [i, j])))
        section = by_id.get(menu_id, {})
        for i, phi in enumerate(section.get("potentials", {}).get("potentials", []), start=1):
            rows.append((menu_id, "potential", str(i), float(phi)))
        verification = section.get("verification", {})
        for name in ("fenchel_gaps", "optimality_gaps"):
            for i, gap in enumerate(verification.get(name, []), start=1):
                rows.append((menu_id, name[:-1], str(i), float(gap)))
    return rows


def _write_series_csv(path: Path, rows: list[tuple[str, str, str, float]]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("menu_id,series,key,value\n")
        for menu_id, series, key, value in rows:
            fh.write(f"{menu_id},{series},{key},{fmt17(value)}\n")


def run(config: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns (exit_code, report dict)."""
    report = _base_report(config)

    if config.command == "simulate":
        if not config.model or not config.output:
            raise CycloratError("simulate needs --model and --output")
        model, menu, design = load_model_spec(config.model)
        if isinstance(design, dict):
            rng = np.random.default_rng(config.seed)
            design = rng.uniform(
                design["low"], design["high"], size=(design["count"], menu.size)
            ).tolist()
        dataset = simulate_dataset(model, menu, design)
        write_dataset_csv(config.output, dataset)
        report["simulate"] = {
            "menu_id": menu.id,
            "n_observations": dataset.n,
            "output": config.output,
        }
        return EXIT_OK, report

    if not config.input:
        raise CycloratError(f"{config.command} needs --input")
    datasets = parse_datasets_csv(config.input, config.tol_simplex)

    depth = {"check": "check", "fit": "fit", "verify": "verify", "report-all": "report-all"}[
        config.command
    ]
    sections = []
    all_cm = True
    all_verified = True
    for menu_id in sorted(datasets):
        section, cm_ok, verify_ok = _analyze_menu(datasets[menu_id], config, depth)
        sections.append(section)
        all_cm &= cm_ok
        all_verified &= verify_ok
    report["menus"] = sections
    if depth == "report-all":
        wst = _wst_section(datasets, config.tol_simplex)
        if wst is not None:
            report["weak_stochastic_transitivity"] = wst
        if config.output:
            series_path = Path(config.output).with_suffix(".series.csv")
            _write_series_csv(series_path, _series_rows(datasets, report))
            report["series_csv"] = str(series_path)

    if not all_cm:
        return EXIT_REJECTED, report
    if depth in ("verify", "report-all") and not all_verified:
        return EXIT_REJECTED, report
    return EXIT_OK, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclorat",
        description="Cyclic-monotonicity tests and convex-cost rationalization "
        "for stochastic choice datasets.",
    )
    parser.add_argument("--version", action="version", version=f"cyclorat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("simulate", "simulate a dataset from a model spec"),
        ("check", "test cyclic monotonicity"),
        ("fit", "fit potentials and the conjugate cost"),
        ("verify", "fit plus Fenchel/optimality verification"),
        ("report-all", "full pipeline plus diagnostics"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--input", help="dataset CSV path")
        p.add_argument("--output", help="output path (report JSON, or dataset CSV for simulate)")
        p.add_argument("--model", help="model spec JSON path (simulate)")
        p.add_argument("--tol-cm", type=float, default=TOL_CM, help="cycle-sum tolerance")
        p.add_argument("--tol-opt", type=float, default=TOL_OPT, help="verification tolerance")
        p.add_argument("--epsilon", type=float, default=0.0, help="entropic smoothing weight")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled verification")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("CYCLORAT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        config = RunConfig(
            command=args.command,
            input=args.input,
            output=args.output,
            model=args.model,
            tol_cm=args.tol_cm,
            tol_opt=args.tol_opt,
            epsilon=args.epsilon,
            seed=args.seed,
        )
        code, report = run(config)
    except (CycloratError, OSError, ValueError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps_report(report)
    if config.command == "simulate" or not config.output:
        sys.stdout.write(text)
    else:
        Path(config.output).write_text(text, encoding="utf-8", newline="\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
