"""
Command-line entry point: ``covert-lab <subcommand> ...``.

Exit status is 0 on success, 1 on a configuration error (including bad
flags) and 2 when a Monte Carlo validation or output check fails.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import metrics
from .exceptions import CovertLabError, ConfigError
from .experiments import (
    FIGURE_IDS,
    NOISE_DEFAULTS,
    PlotSpec,
    SweepSpec,
    Validation,
    emit_csv,
    format_csv,
    emit_svg,
    figure_recipe,
    parse_config,
    provenance,
    run_sweep,
)
from .link_model import NoiseProfile, ScenarioId, SecurityConstraints, TransmitConfig, db_to_linear
from .monte_carlo import validate_scenario
from .solver import solve, solve_reference

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario(text: str) -> ScenarioId:
    try:
        return ScenarioId.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _noise_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("noise (dB) and detection margin")
    g.add_argument("--sigma-b-db", type=float, default=NOISE_DEFAULTS["sigma_b_db"])
    g.add_argument("--sigma-w-db", type=float, default=NOISE_DEFAULTS["sigma_w_db"])
    g.add_argument("--sigma-e-db", type=float, default=NOISE_DEFAULTS["sigma_e_db"])
    g.add_argument("--upsilon", type=float, default=NOISE_DEFAULTS["upsilon"])


def _constraint_flags(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_argument_group("constraints")
    g.add_argument("--eps-c", type=float, required=required)
    g.add_argument("--eps-s", type=float, required=required)
    g.add_argument("--eps-t", type=float, required=required)


def _noise(args) -> NoiseProfile:
    return NoiseProfile.from_db(args.sigma_b_db, args.sigma_w_db, args.sigma_e_db, args.upsilon)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covert-lab", description="Covert secrecy rate analysis of a Rayleigh-faded wiretap link.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="TP, SOP and COP at one operating point")
    p.add_argument("--scenario", type=_scenario, required=True)
    p.add_argument("--pa-db", type=float, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--rs", type=float, required=True)
    p.add_argument("--theta", type=float, help="Willie's threshold (default: optimal)")
    _noise_flags(p)

    p = sub.add_parser("csr", help="solve for the covert secrecy rate")
    p.add_argument("--scenario", type=_scenario, required=True)
    p.add_argument("--pa-db", type=float, help="transmit power, required for ia/fa")
    p.add_argument("--reference", action="store_true", help="also run the brute-force reference")
    _noise_flags(p)
    _constraint_flags(p, required=True)

    p = sub.add_parser("sweep", help="parameter sweep from a config file and/or flags")
    p.add_argument("--config", type=Path)
    p.add_argument("--scenarios", help="comma list, e.g. ip,fp")
    p.add_argument("--axis", help="name=start:stop:steps[:spacing]")
    p.add_argument("--series", action="append", default=[], help="name=v1,v2,... (repeatable, zipped)")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE", help="fixed parameter")
    _sweep_output_flags(p)

    p = sub.add_parser("figure", help="run a numerical-results figure recipe")
    p.add_argument("figure_id", nargs="?", help="one of: " + ", ".join(FIGURE_IDS))
    p.add_argument("--list", action="store_true", help="list recipe ids")
    _sweep_output_flags(p)

    p = sub.add_parser("validate", help="Monte Carlo check of the analytic metrics")
    p.add_argument("--scenario", type=_scenario, required=True)
    p.add_argument("--pa-db", type=float, default=-20.0)
    p.add_argument("--rho", type=float, default=0.75)
    p.add_argument("--rs", type=float, default=0.25)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help="offset added to every analytic value")
    _noise_flags(p)
    return parser


def _sweep_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    p.add_argument("--svg", type=Path, help="SVG path (default: next to --out)")
    p.add_argument("--no-svg", action="store_true")
    p.add_argument("--mc-samples", type=int, help="validate each optimum with this many samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _print_fields(pairs) -> None:
    for key, value in pairs:
        if isinstance(value, float):
            value = f"{value:.12g}"
        print(f"{key}: {value}")


def _cmd_metrics(args) -> int:
    noise = _noise(args)
    s = args.scenario
    rho = args.rho if s.uses_artificial_noise else 1.0
    cfg = TransmitConfig(db_to_linear(args.pa_db), rho, args.rs)
    theta = metrics.theta_star(s, noise, cfg.pa, rho) if args.theta is None else args.theta
    errs = metrics.detection_errors(s, noise, cfg.pa, rho, theta)
    _print_fields([
        ("scenario", s.code),
        ("tp", metrics.tp(s, noise, cfg)),
        ("sop", metrics.sop(s, noise, cfg) if args.rs > 0 else float("nan")),
        ("theta", theta),
        ("p_fa", errs.p_fa),
        ("p_md", errs.p_md),
        ("cop", metrics.cop(s, noise, cfg.pa, rho, theta)),
        ("cop_at_optimal_theta", metrics.cop_at_optimal_theta(s, noise, cfg.pa, rho)),
    ])
    return EXIT_OK


def _cmd_csr(args) -> int:
    s = args.scenario
    if s.uses_artificial_noise and args.pa_db is None:
        raise ConfigError(f"--pa-db is required for scenario {s.code.lower()}")
    noise = _noise(args)
    cons = SecurityConstraints(args.eps_c, args.eps_s, args.eps_t)
    pa = db_to_linear(args.pa_db) if s.uses_artificial_noise else None
    sol = solve(s, noise, cons, pa)
    _print_fields([("scenario", s.code), *sol.as_dict().items()])
    for note in sol.notes:
        print(f"note: {note}")
    if args.reference:
        ref = solve_reference(s, noise, pa, cons)
        _print_fields([(f"reference_{k}", v) for k, v in ref.as_dict().items()])
    return EXIT_OK


def _kv(text: str, flag: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"{flag}: expected NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip().replace("-", "_"), v.strip()


def _sweep_spec(args) -> SweepSpec:
    lines = []
    if args.config is not None:
        try:
            lines.append(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {str(args.config)!r}: {exc.strerror or exc}") from None
    if args.scenarios:
        lines.append(f"scenarios = {args.scenarios}")
    if args.axis:
        k, v = _kv(args.axis, "--axis")
        lines.append(f"axis.{k} = {v}")
    for item in args.series:
        k, v = _kv(item, "--series")
        lines.append(f"series.{k} = {v}")
    for item in args.set:
        k, v = _kv(item, "--set")
        lines.append(f"{k} = {v}")
    return parse_config("\n".join(lines), defaults=NOISE_DEFAULTS)


def _run_and_emit(spec: SweepSpec, args) -> int:
    if args.mc_samples is not None:
        spec = replace(spec, validation=Validation(args.mc_samples, args.seed))
    rows = run_sweep(spec, workers=args.workers)
    comments = provenance(spec)
    if args.out is None:
        sys.stdout.write(format_csv(rows, comments))
    else:
        emit_csv(rows, args.out, comments)
    svg = args.svg or (args.out.with_suffix(".svg") if args.out is not None else None)
    if svg is not None and not args.no_svg:
        emit_svg(rows, PlotSpec.for_sweep(spec), svg)
    if spec.validation is not None:
        failed = [r for r in rows if r.mc_pass is False]
        for r in failed:
            print(f"validation failed: {r.scenario} {r.series} index {r.index}", file=sys.stderr)
        if failed:
            return EXIT_VALIDATION
    return EXIT_OK


def _cmd_sweep(args) -> int:
    return _run_and_emit(_sweep_spec(args), args)


def _cmd_figure(args) -> int:
    if args.list:
        for fid in FIGURE_IDS:
            spec = figure_recipe(fid)
            flag = " (assumed settings)" if spec.is_assumed else ""
            print(f"{fid}: {spec.title}{flag}")
        return EXIT_OK
    if not args.figure_id:
        raise ConfigError("figure: an id is required (see --list)")
    return _run_and_emit(figure_recipe(args.figure_id), args)


def _cmd_validate(args) -> int:
    s = args.scenario
    rho = args.rho if s.uses_artificial_noise else 1.0
    cfg = TransmitConfig(db_to_linear(args.pa_db), rho, args.rs)
    report = validate_scenario(s, _noise(args), cfg, args.samples, args.seed, args.perturb)
    for line in report.lines():
        print(line)
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_VALIDATION


_COMMANDS = {
    "metrics": _cmd_metrics,
    "csr": _cmd_csr,
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except AssertionError as exc:
        print(f"covert-lab: output check failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CovertLabError, ValueError, OSError) as exc:
        print(f"covert-lab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
