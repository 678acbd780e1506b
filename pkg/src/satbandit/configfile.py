"""Plain-text experiment configs and the built-in figure presets.

Format: ``key = value`` lines, ``#`` comments, and ``[section]`` headers.
Values are Python literals (numbers, strings, lists); a bare word is read as
a string. Top-level keys describe the instance and run; each
``[policy.NAME]`` section adds one policy. A policy inherits any top-level
objective key it does not set itself.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .belief import Prior
from .environment import BanditInstance, ObjectiveSpec
from .errors import ConfigError, InfeasibleObjectiveError, InvalidArgumentError
from .harness import SimulationConfig
from .policies import PolicySpec

_SECTION = re.compile(r"^\[([A-Za-z0-9_.\-]+)\]$")
_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")

RUN_KEYS = {"name", "means", "stds", "horizon", "trials", "seed"}
OBJECTIVE_KEYS = {"mean_threshold", "sufficiency", "happiness_threshold",
                  "happiness_prob_threshold"}
POLICY_KEYS = OBJECTIVE_KEYS | {"problem", "K", "heuristic", "zeta", "eligible_rule",
                                "prior", "prior_mean", "prior_var", "prior_cov"}
IGNORED_SECTIONS = ("manifest",)


@dataclass(frozen=True)
class Experiment:
    name: str
    runs: tuple[tuple[str, SimulationConfig], ...]   # (policy name, config)

    @property
    def instance(self) -> BanditInstance:
        return self.runs[0][1].instance


def _value(text: str, where: str) -> Any:
    text = text.strip()
    if _BARE.match(text) and text not in ("True", "False", "None"):
        return text
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{where}: cannot parse value {text!r}") from exc


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def render(sections: dict[str, dict[str, Any]]) -> str:
    """Inverse of :func:`parse_text` (values written as Python literals)."""
    out = []
    for name, body in sections.items():
        if name:
            out.append(f"\n[{name}]")
        out.extend(f"{k} = {v!r}" for k, v in body.items())
    return "\n".join(out).lstrip("\n") + "\n"


def parse_text(text: str, source: str = "<config>") -> dict[str, dict[str, Any]]:
    """Split config text into ``{section: {key: value}}``; top level is ``""``."""
    sections: dict[str, dict[str, Any]] = {"": {}}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        m = _SECTION.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ConfigError(f"{where}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in sections[current]:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        sections[current][key] = _value(val, where)
    return sections


def _floats(v, key: str) -> np.ndarray:
    try:
        arr = np.asarray(v, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a list of numbers") from exc
    return arr


def _int(v, key: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def _prior(d: dict, n: int) -> Optional[Prior]:
    kind = d.get("prior", "uninformative")
    if kind == "uninformative":
        return None
    if "prior_mean" not in d:
        raise ConfigError(f"prior = {kind} requires prior_mean")
    mu0 = _floats(d["prior_mean"], "prior_mean")
    if kind == "uncorrelated":
        if "prior_var" not in d:
            raise ConfigError("prior = uncorrelated requires prior_var")
        return Prior.uncorrelated(mu0, _floats(d["prior_var"], "prior_var"))
    if kind == "informative":
        if "prior_cov" not in d:
            raise ConfigError("prior = informative requires prior_cov")
        cov = np.asarray(d["prior_cov"], dtype=np.float64)
        return Prior.informative(mu0, cov.reshape(n, n) if cov.size == n * n else cov)
    raise ConfigError(f"unknown prior kind {kind!r}")


def build(sections: dict[str, dict[str, Any]], seed: Optional[int] = None,
          trials: Optional[int] = None, horizon: Optional[int] = None) -> Experiment:
    """Validate parsed sections into simulation configs; overrides win over the file."""
    top = dict(sections.get("", {}))
    unknown = set(top) - RUN_KEYS - OBJECTIVE_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    for key in ("means", "stds"):
        if key not in top:
            raise ConfigError(f"missing required key {key!r}")
    policies = {k.split(".", 1)[1]: v for k, v in sections.items()
                if k.startswith("policy.")}
    stray = [k for k in sections if k and not k.startswith("policy.") and k not in IGNORED_SECTIONS]
    if stray:
        raise ConfigError(f"unknown section(s): {', '.join(stray)}")
    if not policies:
        raise ConfigError("config defines no [policy.NAME] section")
    try:
        instance = BanditInstance(_floats(top["means"], "means"), _floats(top["stds"], "stds"))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    T = horizon if horizon is not None else _int(top.get("horizon", 1000), "horizon")
    n_trials = trials if trials is not None else _int(top.get("trials", 100), "trials")
    master = seed if seed is not None else _int(top.get("seed", 42), "seed")
    runs = []
    for pname, body in policies.items():
        bad = set(body) - POLICY_KEYS
        if bad:
            raise ConfigError(f"[policy.{pname}]: unknown key(s): {', '.join(sorted(bad))}")
        if "problem" not in body:
            raise ConfigError(f"[policy.{pname}]: missing required key 'problem'")
        merged = {k: top[k] for k in OBJECTIVE_KEYS if k in top}
        merged.update(body)
        try:
            obj = ObjectiveSpec(merged["problem"],
                                mean_threshold=merged.get("mean_threshold"),
                                sufficiency=float(merged.get("sufficiency", 0.0)),
                                happiness_threshold=merged.get("happiness_threshold"),
                                happiness_prob_threshold=merged.get("happiness_prob_threshold"))
            spec = PolicySpec(obj, K=float(merged.get("K", 1.0)),
                              heuristic=merged.get("heuristic", "gaussian_known_variance"),
                              zeta=merged.get("zeta"),
                              prior=_prior(merged, instance.n_arms),
                              eligible_rule=merged.get("eligible_rule", "max_q"))
            cfg = SimulationConfig(instance, spec, T, n_trials, master, pname)
        except InfeasibleObjectiveError as exc:
            raise InfeasibleObjectiveError(f"[policy.{pname}]: {exc}") from exc
        except (InvalidArgumentError, ValueError, TypeError) as exc:
            raise ConfigError(f"[policy.{pname}]: {exc}") from exc
        runs.append((pname, cfg))
    return Experiment(str(top.get("name", "experiment")), tuple(runs))


def parse_config(path, **overrides) -> Experiment:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: {exc.strerror or exc}") from exc
    return build(parse_text(text, str(p)), **overrides)


_BASE = """\
means = [1, 2, 3, 4]
stds = [1, 1, 1, 1]
horizon = 1000
trials = 100
"""
_ROBUST = """\
means = [1, 2, 3, 4]
stds = [1, 1, 1, 3]
horizon = 1000
trials = 100
happiness_threshold = 2
"""

PRESETS: dict[str, str] = {
    "fig1": "name = fig1\n" + _BASE + """
[policy.P1]
problem = P1

[policy.P2]
problem = P2
mean_threshold = 2.5
""",
    "fig2": "name = fig2\n" + _BASE + """
[policy.P3]
problem = P3
sufficiency = 0.05

[policy.P4]
problem = P4
mean_threshold = 2.5
sufficiency = 0.05
""",
    "fig3": "name = fig3\n" + _BASE + """
[policy.P1]
problem = P1

[policy.P3]
problem = P3
sufficiency = 0.05
""",
    "fig4": "name = fig4\n" + _ROBUST + """
[policy.P5]
problem = P5
""",
    "fig5": "name = fig5\n" + _ROBUST + """
[policy.P1]
problem = P1

[policy.P5]
problem = P5

[policy.P7]
problem = P7
sufficiency = 0.05
""",
}


def preset(name: str, **overrides) -> Experiment:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return build(parse_text(PRESETS[name], name), **overrides)
