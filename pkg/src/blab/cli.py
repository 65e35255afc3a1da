"""Command-line entry point: config-driven experiment runs plus one-shot evaluations.

``blab run CONFIG`` reads a line-oriented ``key = value`` config, dispatches a
named experiment, and writes ``report.csv`` and ``summary.json`` into the
output directory.  Exit status: 0 when every verdict passes, 2 on a verdict
failure, 1 on an execution error, so experiment runs double as CI checks.

``blab kernel | berezin | toeplitz`` print single values or matrices in plain
decimal with configurable precision.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import experiments as xp
from .geometry import (
    STANDARD_EXHAUSTIONS,
    DomainError,
    compact_band,
    parse_domain,
    standard_exhaustions,
)
from .kernels import model_for
from .operators import berezin_of_symbol, grid_for_symbol, toeplitz_matrix
from .symbols import parse_symbol, parse_word

EXPERIMENTS = (
    "ramadanov",
    "theorem1",
    "theorem2",
    "theorem3",
    "corollary_truncation",
    "prop1",
    "prop2",
    "lemma_suite",
)


class ConfigError(ValueError):
    """Raised for malformed run configs, with the offending line number."""


@dataclass
class RunConfig:
    """Validated experiment configuration with defaults for missing keys."""

    experiment: str = ""
    exhaustion: str | None = None
    length: int | None = None
    word: str | None = None
    band: tuple[float, float] | None = None
    samples: int = 20
    p_list: tuple[float, ...] = (1.0, 2.0)
    n_radial: int = 96
    n_angular: int = 256
    field_n_radial: int = 64
    field_n_angular: int = 192
    truncation: int = 48
    degree: int = 64
    tol_final_sup: float | None = None
    tol_final_lp: float | None = None
    tol_path: float = 1e-6
    tol_trunc: float = 1e-6
    tol_gap: float = 0.4
    growth_factor: float = 2.0
    k_levels: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    radii: tuple[float, ...] | None = None
    n_points: int = 20
    z_ref: float = 0.5
    seed: int = 20240801
    out: str = "out"


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())


def _parse_band(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.replace(",", ":").split(":") if p.strip()]
    if len(parts) != 2 or not parts[0] <= parts[1]:
        raise ValueError(f"band must be 'r_min:r_max', got {text!r}")
    return parts[0], parts[1]


#: key -> (RunConfig attribute, parser)
_KEY_TABLE = {
    "experiment": ("experiment", str),
    "exhaustion": ("exhaustion", str),
    "length": ("length", int),
    "word": ("word", str),
    "symbol": ("word", str),
    "band": ("band", _parse_band),
    "samples": ("samples", int),
    "p_list": ("p_list", _parse_floats),
    "quad.n_radial": ("n_radial", int),
    "quad.n_angular": ("n_angular", int),
    "field.n_radial": ("field_n_radial", int),
    "field.n_angular": ("field_n_angular", int),
    "truncation": ("truncation", int),
    "degree": ("degree", int),
    "tol.final_sup": ("tol_final_sup", float),
    "tol.final_lp": ("tol_final_lp", float),
    "tol.path": ("tol_path", float),
    "tol.trunc": ("tol_trunc", float),
    "tol.gap": ("tol_gap", float),
    "growth_factor": ("growth_factor", float),
    "k_levels": ("k_levels", _parse_floats),
    "radii": ("radii", _parse_floats),
    "n_points": ("n_points", int),
    "z_ref": ("z_ref", float),
    "seed": ("seed", int),
    "out": ("out", str),
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; duplicate keys warn and last wins."""
    cfg = RunConfig()
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEY_TABLE:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r}; known keys: {', '.join(sorted(_KEY_TABLE))}"
            )
        if key in seen:
            print(
                f"warning: line {lineno}: duplicate key {key!r} "
                f"(previous on line {seen[key]}); last value wins",
                file=sys.stderr,
            )
        seen[key] = lineno
        attr, parser = _KEY_TABLE[key]
        try:
            setattr(cfg, attr, parser(value))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: malformed value for {key!r}: {exc}") from exc
    if not cfg.experiment:
        raise ConfigError("config must set 'experiment'")
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {cfg.experiment!r}; registry: {', '.join(EXPERIMENTS)}"
        )
    if cfg.exhaustion is not None and cfg.exhaustion not in STANDARD_EXHAUSTIONS:
        raise ConfigError(
            f"unknown exhaustion {cfg.exhaustion!r}; registry: {', '.join(STANDARD_EXHAUSTIONS)}"
        )
    if cfg.word is not None:
        try:
            parse_word(cfg.word)
        except ValueError as exc:
            raise ConfigError(f"unresolvable word {cfg.word!r}: {exc}") from exc
    for tol in ("tol_final_sup", "tol_final_lp", "tol_path", "tol_trunc", "tol_gap"):
        v = getattr(cfg, tol)
        if v is not None and v <= 0:
            raise ConfigError(f"tolerance {tol} must be positive")
    return cfg


def _plan_and_region(cfg: RunConfig, exhaustion: str, length: int, band: tuple[float, float]):
    plan = standard_exhaustions(cfg.exhaustion or exhaustion, cfg.length or length)
    b = cfg.band or band
    region = compact_band(plan.limit, b[0], b[1], cfg.samples)
    return plan, region


def build_report(cfg: RunConfig) -> xp.ConvergenceReport:
    """Dispatch a validated config to its experiment runner."""
    name = cfg.experiment
    if name == "ramadanov":
        default_band = (0.3, 0.9) if cfg.exhaustion == "annuli_to_punctured_disc" else (0.1, 0.5)
        plan, region = _plan_and_region(cfg, "discs_increasing", 10, default_band)
        return xp.run_ramadanov(
            plan, region, degrees=cfg.degree, tol_final=cfg.tol_final_sup or 1e-4
        )
    if name == "theorem1":
        plan, region = _plan_and_region(cfg, "discs_increasing", 10, (0.3, 0.7))
        return xp.run_theorem1(
            plan,
            parse_word(cfg.word or "green:0.3+0i"),
            region,
            p_list=cfg.p_list,
            truncation=cfg.truncation,
            quad=(cfg.n_radial, cfg.n_angular),
            field_quad=(cfg.field_n_radial, cfg.field_n_angular),
            tol_final=cfg.tol_final_sup or 1e-3,
            tol_lp=cfg.tol_final_lp or 1e-3,
            tol_path=cfg.tol_path,
            tol_trunc=cfg.tol_trunc,
        )
    if name == "theorem2":
        plan, region = _plan_and_region(cfg, "discs_decreasing", 10, (0.3, 0.7))
        return xp.run_theorem2(
            plan,
            parse_word(cfg.word or "green:0.3+0i"),
            region,
            p_list=cfg.p_list,
            truncation=cfg.truncation,
            quad=(cfg.n_radial, cfg.n_angular),
            field_quad=(cfg.field_n_radial, cfg.field_n_angular),
            tol_final=cfg.tol_final_sup or 1e-3,
            tol_lp=cfg.tol_final_lp or 1e-3,
            tol_trunc=cfg.tol_trunc,
        )
    if name == "theorem3":
        plan, region = _plan_and_region(cfg, "discs_increasing", 10, (0.3, 0.7))
        return xp.run_theorem3(
            plan,
            parse_word(cfg.word or "green:0.3+0i,clamp:log_abs:5"),
            region,
            p_list=cfg.p_list,
            truncation=cfg.truncation,
            quad=(cfg.n_radial, cfg.n_angular),
            field_quad=(cfg.field_n_radial, cfg.field_n_angular),
            tol_final=cfg.tol_final_sup or 1e-2,
            tol_lp=cfg.tol_final_lp or 1e-2,
            tol_trunc=cfg.tol_trunc,
        )
    if name == "corollary_truncation":
        plan, region = _plan_and_region(cfg, "annuli_to_punctured_disc", 400, (0.3, 0.9))
        return xp.run_corollary_truncation(
            plan,
            region,
            k_levels=cfg.k_levels,
            p_list=cfg.p_list,
            field_quad=(cfg.field_n_radial, cfg.field_n_angular),
            tol_final=cfg.tol_final_sup or 0.15,
        )
    if name == "prop1":
        return xp.run_prop1(
            r_schedule=cfg.radii or (1e-1, 10**-1.5, 1e-2, 10**-2.5, 1e-3),
            z_ref=cfg.z_ref,
            quad=(max(cfg.n_radial, 128), cfg.n_angular),
            tol_final=cfg.tol_final_sup or 1e-2,
            tol_gap=cfg.tol_gap,
        )
    if name == "prop2":
        return xp.run_prop2(
            r_schedule=cfg.radii or (1e-1, 1e-2, 1e-3),
            p_list=cfg.p_list,
            n_radial=max(cfg.n_radial, 192),
            growth_factor=cfg.growth_factor,
        )
    if name == "lemma_suite":
        return xp.run_lemma_suite(
            seed=cfg.seed, n_points=cfg.n_points, quad=(cfg.n_radial, cfg.n_angular)
        )
    raise ConfigError(f"unknown experiment {name!r}")


def _write_artifacts(report: xp.ConvergenceReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "summary.json").write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        report = build_report(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # execution failure, incl. ExperimentError
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write_artifacts(report, Path(cfg.out))
    verdicts = report.verdicts()
    for key, ok in verdicts.items():
        print(f"{report.name}.{key}: {'pass' if ok else 'FAIL'}")
    return 0 if all(verdicts.values()) else 2


def _fmt_value(v: complex, precision: int) -> str:
    v = complex(v)
    if abs(v.imag) <= 1e-14 * max(1.0, abs(v)):
        return f"{v.real:.{precision}g}"
    return f"{v.real:.{precision}g}{v.imag:+.{precision}g}i"


def _parse_point(text: str) -> complex:
    return complex(text.replace("i", "j"))


def cmd_kernel(args) -> int:
    values = [_parse_point(v) for v in args.values]
    if len(values) == 3:
        dom = parse_domain(f"{args.domain}:{values[0].real:g}")
        z, w = values[1], values[2]
    elif len(values) == 2:
        dom = parse_domain(args.domain)
        z, w = values
    else:
        print("error: kernel expects DOMAIN [RADIUS] Z W", file=sys.stderr)
        return 1
    model = model_for(dom, max_degree=args.degree)
    print(_fmt_value(model.eval(z, w), args.precision))
    return 0


def cmd_berezin(args) -> int:
    dom = parse_domain(args.domain)
    sym = parse_symbol(args.symbol)
    model = model_for(dom, max_degree=args.degree)
    grid = grid_for_symbol(dom, sym, args.n_radial, args.n_angular)
    val = berezin_of_symbol(model, sym, grid, _parse_point(args.z))
    print(_fmt_value(val, args.precision))
    return 0


def cmd_toeplitz(args) -> int:
    dom = parse_domain(args.domain)
    sym = parse_symbol(args.symbol)
    model = model_for(dom, max_degree=max(args.degree, args.n + 1))
    mat = toeplitz_matrix(model, sym, truncation=args.n,
                          n_radial=args.n_radial, n_angular=args.n_angular)
    for row in mat.entries:
        print(" ".join(_fmt_value(v, args.precision) for v in row))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blab",
        description="Bergman-space laboratory: kernels, Toeplitz operators, "
        "Berezin transforms, and convergence experiments on radial domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config-driven experiment")
    p_run.add_argument("config", help="path to a 'key = value' config file")
    p_run.add_argument("--out", help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, help="seed override")
    p_run.set_defaults(func=cmd_run)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=12)
    common.add_argument("--degree", type=int, default=64)
    common.add_argument("--n-radial", type=int, default=96, dest="n_radial")
    common.add_argument("--n-angular", type=int, default=256, dest="n_angular")

    p_k = sub.add_parser("kernel", parents=[common], help="evaluate a Bergman kernel")
    p_k.add_argument("domain", help="disc | annulus:<r> | kind:r_inner:r_outer")
    p_k.add_argument("values", nargs="+", help="[radius] z w (complex as a+bi)")
    p_k.set_defaults(func=cmd_kernel)

    p_b = sub.add_parser("berezin", parents=[common], help="Berezin transform of a symbol")
    p_b.add_argument("domain")
    p_b.add_argument("symbol", help="e.g. green:0.3+0.0i, log_abs, clamp:log_abs:10")
    p_b.add_argument("z")
    p_b.set_defaults(func=cmd_berezin)

    p_t = sub.add_parser("toeplitz", parents=[common], help="print a truncated Toeplitz matrix")
    p_t.add_argument("domain")
    p_t.add_argument("symbol")
    p_t.add_argument("--n", type=int, default=8, help="truncation size")
    p_t.set_defaults(func=cmd_toeplitz)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
