"""Command-line entry point: run, bounds, reproduce, validate."""
from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .configfile import PRESETS, Experiment, build, parse_text, render
from .errors import ConfigError, InfeasibleObjectiveError, InvalidArgumentError, SatbanditError
from .harness import AggregateResult, SimulationConfig, bound_overlays, run_monte_carlo
from .metrics import pull_bounds, regret_frame, bound_family
from .policies import Heuristic

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3

CURVE_HEADER = "t,mean_cum_regret,se_regret,mean_cum_reward,mean_cum_happiness,mean_cum_switches,bound"
ARM_HEADER = "arm,mean_pulls,delta,delta_M,bound_pulls"
BOUND_HEADER = "t,upper_bound,lower_bound"
MANIFEST_NAME = "manifest.cfg"


def fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if not np.isfinite(v):
        return ""
    return f"{v:.12g}"


@dataclass(frozen=True)
class RunManifest:
    config_sections: dict
    version: str
    master_seed: int
    timestamp: str
    outputs: tuple[str, ...]

    def text(self) -> str:
        sections = dict(self.config_sections)
        sections["manifest"] = {
            "version": self.version,
            "master_seed": self.master_seed,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
        }
        return render(sections)


def _bounds_apply(cfg: SimulationConfig) -> bool:
    return cfg.policy.heuristic is Heuristic.gaussian_known_variance


def curve_rows(result: AggregateResult) -> list[str]:
    cfg = result.config
    ub = result.upper_bound.values if (_bounds_apply(cfg) and result.upper_bound) else None
    happy = result.mean_cum_happiness
    rows = [CURVE_HEADER]
    for j, t in enumerate(result.t):
        rows.append(",".join((
            str(int(t)),
            fmt(result.mean_cum_regret[j]),
            fmt(result.se_regret[j]),
            fmt(result.mean_cum_reward[j]),
            fmt(happy[j]) if happy is not None else "",
            fmt(result.mean_cum_switches[j]),
            fmt(ub[j]) if ub is not None else "",
        )))
    return rows


def arm_rows(cfg: SimulationConfig, mean_pulls: Optional[np.ndarray]) -> list[str]:
    """Per-arm summary; ``mean_pulls`` is None when nothing was simulated."""
    obj = cfg.objective
    values, _ = obj.reference(cfg.instance)
    delta = values.max() - values
    delta_m, stds = regret_frame(cfg.instance, obj)
    bp = None
    if _bounds_apply(cfg):
        bp = pull_bounds(bound_family(obj.problem), delta_m, stds, cfg.horizon, obj.delta)
    rows = [ARM_HEADER]
    for i in range(cfg.instance.n_arms):
        rows.append(",".join((
            str(i),
            fmt(mean_pulls[i]) if mean_pulls is not None else "",
            fmt(delta[i]),
            fmt(delta_m[i]),
            fmt(bp[i]) if bp is not None and delta_m[i] > 0 else "",
        )))
    return rows


def bound_rows(cfg: SimulationConfig) -> list[str]:
    t = np.arange(1, cfg.horizon + 1)
    upper, lower = bound_overlays(cfg, t)
    rows = [BOUND_HEADER]
    for j in range(t.size):
        rows.append(f"{int(t[j])},{fmt(upper.values[j])},{fmt(lower.values[j])}")
    return rows


def _write(path: Path, rows: list[str]) -> None:
    try:
        path.write_text("\n".join(rows) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_results(results: dict[str, AggregateResult], sections: dict, out: Path,
                 seed: int) -> RunManifest:
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for pname, res in results.items():
        curve, arms = f"{pname}_curves.csv", f"{pname}_arms.csv"
        _write(out / curve, curve_rows(res))
        _write(out / arms, arm_rows(res.config, res.mean_pulls))
        names += [curve, arms]
    return _manifest(sections, out, seed, names)


def _manifest(sections: dict, out: Path, seed: int, names: list[str]) -> RunManifest:
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    m = RunManifest({k: v for k, v in sections.items() if k != "manifest"}, __version__, seed,
                    stamp, tuple(names + [MANIFEST_NAME]))
    _write(out / MANIFEST_NAME, m.text().splitlines())
    return m


# --- command plumbing -------------------------------------------------------

def _default_seed() -> int:
    env = os.environ.get("SATBANDIT_SEED")
    if env is None or env.strip() == "":
        return 42
    try:
        return int(env, 0)
    except ValueError as exc:
        raise ConfigError(f"SATBANDIT_SEED must be an integer, got {env!r}") from exc


def _resolve(args, text: str, source: str) -> tuple[dict, Experiment]:
    """Parse, fold CLI overrides into the top level, and validate."""
    sections = parse_text(text, source)
    top = sections[""]
    if args.seed is not None:
        top["seed"] = args.seed
    elif "seed" not in top:
        top["seed"] = _default_seed()
    if args.trials is not None:
        top["trials"] = args.trials
    if args.horizon is not None:
        top["horizon"] = args.horizon
    return sections, build(sections)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc


def _simulate(args, sections: dict, exp: Experiment) -> int:
    results = {}
    for pname, cfg in exp.runs:
        results[pname] = run_monte_carlo(cfg, jobs=args.jobs, backend=args.backend)
    out = Path(args.out)
    seed = exp.runs[0][1].master_seed
    emit_results(results, sections, out, seed)
    for pname, res in results.items():
        line = (f"{pname}: T={res.t[-1]} trials={res.config.trials} "
                f"regret={res.mean_cum_regret[-1]:.4f} switches={res.mean_cum_switches[-1]:.2f}")
        if res.mean_cum_happiness is not None:
            line += f" happiness={res.mean_cum_happiness[-1]:.1f}"
        print(line)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    sections, exp = _resolve(args, _read(args.config), args.config)
    return _simulate(args, sections, exp)


def cmd_reproduce(args) -> int:
    sections, exp = _resolve(args, PRESETS[args.figure], args.figure)
    return _simulate(args, sections, exp)


def cmd_bounds(args) -> int:
    sections, exp = _resolve(args, _read(args.config), args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for pname, cfg in exp.runs:
        _write(out / f"{pname}_bounds.csv", bound_rows(cfg))
        _write(out / f"{pname}_arms.csv", arm_rows(cfg, None))
        names += [f"{pname}_bounds.csv", f"{pname}_arms.csv"]
    _manifest(sections, out, exp.runs[0][1].master_seed, names)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _, exp = _resolve(args, _read(args.config), args.config)
    for pname, cfg in exp.runs:
        print(f"{pname}: {cfg.objective.problem.value} ok "
              f"(N={cfg.instance.n_arms}, T={cfg.horizon}, trials={cfg.trials}, seed={cfg.master_seed})")
    return EXIT_OK


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None,
                        help="master seed (default: config seed, else $SATBANDIT_SEED, else 42)")
    common.add_argument("--trials", type=_positive, default=None)
    common.add_argument("--horizon", type=_positive, default=None)
    common.add_argument("--out", default="results")
    common.add_argument("--jobs", type=_positive, default=1, help="parallel trial workers")
    common.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")

    parser = argparse.ArgumentParser(prog="satbandit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="simulate a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("bounds", parents=[common], help="emit bound curves only")
    p.add_argument("config")
    p.set_defaults(func=cmd_bounds)
    p = sub.add_parser("reproduce", parents=[common], help="run a built-in figure preset")
    p.add_argument("figure", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_reproduce)
    p = sub.add_parser("validate", parents=[common], help="parse and feasibility-check")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)   # exits 2 on usage errors
    try:
        return args.func(args)
    except InfeasibleObjectiveError as exc:
        print(f"satbandit: infeasible objective: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"satbandit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SatbanditError, OSError) as exc:
        print(f"satbandit: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
