"""Command line interface.

Subcommands: analyze, plan, critical size, critical competence, table,
simulate.  Output formats: human (default), json, csv.  Every run builds a
Report (command echo, resolved params, result payload, provenance) and the
rendering of a given invocation is byte-identical across runs.  A config
file of key=value lines can supply any option; explicit flags win.

Exit codes: 0 success, 2 usage or domain error, 3 plan target unattainable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from . import __version__
from .approx import normal_route_consensus, poisson_consensus_probability
from .core import (
    AgentClass,
    DomainError,
    Ensemble,
    VotePolicy,
    consensus_probability,
    majority_threshold,
    mixed_consensus_probability,
)
from .planning import (
    ConvergenceError,
    critical_competence,
    critical_group_size,
    plan_agent_count,
)
from .priors import DecisionPrior, bayes_adjusted_competence, consensus_advice
from .reference import (
    ADJUSTED_TABLE,
    ADJUSTED_TABLE_COLS,
    ADJUSTED_TABLE_ROWS,
    CONSENSUS_TABLE,
    CONSENSUS_TABLE_COLS,
    CONSENSUS_TABLE_ROWS,
    CRITICAL_COMPETENCE_REFERENCE,
)
from .simulation import SimulationConfig, simulate, write_trace

__all__ = ["Report", "main"]


@dataclass(frozen=True)
class Report:
    command: str
    params: dict
    result: dict
    provenance: dict

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "params": self.params,
            "result": self.result,
            "provenance": self.provenance,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        return cls(
            command=data["command"],
            params=data["params"],
            result=data["result"],
            provenance=data["provenance"],
        )


def _provenance(seed: int | None = None) -> dict:
    return {"tool": "quorumkit", "version": __version__, "seed": seed}


# Converters double as argparse `type=` callables; argparse prints their
# names in usage errors, so they are named for the value they parse.


def probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise DomainError(f"not a number: {text!r}") from exc
    if not (0.0 < value < 1.0):
        raise DomainError(f"probability must lie strictly in (0, 1), got {text}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise DomainError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise DomainError(f"expected a positive integer, got {text}")
    return value


def seed64(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise DomainError(f"not an integer: {text!r}") from exc
    if not (0 <= value < 1 << 64):
        raise DomainError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return value


def tolerance(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise DomainError(f"not a number: {text!r}") from exc
    if value < 1e-6:
        raise DomainError(f"tolerance must be >= 1e-6, got {text}")
    return value


def class_list(text: str) -> tuple[tuple[int, float], ...]:
    """Parse the ensemble grammar count@competence[,count@competence...]."""
    groups = []
    for part in text.split(","):
        part = part.strip()
        if "@" not in part:
            raise DomainError(
                f"bad class {part!r}: expected count@competence, e.g. 3@0.8"
            )
        count_text, _, comp_text = part.partition("@")
        groups.append((positive_int(count_text), probability(comp_text)))
    if not groups:
        raise DomainError("empty class list")
    return tuple(groups)


def text(value: str) -> str:
    return value


# ------------------------------------------------------- option declarations


@dataclass(frozen=True)
class Opt:
    name: str  # long flag without dashes, also the config-file key
    conv: Callable[[str], Any]
    default: Any = None
    required: bool = False
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Opt("quorum", text, "1/2", help="quorum fraction, e.g. 1/2 or 2/3"),
    Opt("format", text, "human", help="output format: human, json, csv"),
    Opt("config", text, None, help="key=value file supplying defaults"),
]

_COMMAND_OPTIONS: dict[str, list[Opt]] = {
    "analyze": [
        Opt("n", positive_int, required=True, help="agent count"),
        Opt("p", probability, required=True, help="per-agent competence"),
        Opt("prior", probability, help="prior that the favoured alternative is true"),
        *_COMMON,
    ],
    "plan": [
        Opt("p", probability, required=True, help="per-agent competence"),
        Opt("target", probability, required=True, help="target consensus probability"),
        Opt("prior", probability, help="prior to Bayes-adjust the competence"),
        Opt("max-n", positive_int, 9999, help="largest agent count to consider"),
        *_COMMON,
    ],
    "critical size": [
        Opt("a-count", positive_int, required=True, help="base group size"),
        Opt("a-p", probability, required=True, help="base group competence"),
        Opt("b-p", probability, required=True, help="added group competence"),
        Opt("cap", positive_int, 5000, help="largest addition size to scan"),
        *_COMMON,
    ],
    "critical competence": [
        Opt("a-count", positive_int, required=True, help="base group size (odd)"),
        Opt("a-p", probability, required=True, help="base group competence"),
        Opt("cap", positive_int, 200, help="largest addition size the answer must cover"),
        Opt("tol", tolerance, 1e-4, help="bisection resolution"),
        *_COMMON,
    ],
    "table": [*_COMMON],
    "simulate": [
        Opt("classes", class_list, help="ensemble, e.g. 3@0.8,2@0.6"),
        Opt("n", positive_int, help="single-class shorthand: agent count"),
        Opt("p", probability, help="single-class shorthand: competence"),
        Opt("prior", probability, 0.5, help="prior that alternative 1 is true"),
        Opt("trials", positive_int, 10000, help="number of trials"),
        Opt("seed", seed64, 0, help="unsigned 64-bit seed"),
        Opt("workers", positive_int, 1, help="worker threads"),
        Opt("trace", text, help="write a per-trial NDJSON trace to this path"),
        *_COMMON,
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quorumkit",
        description="Majority-vote consensus reliability calculator",
    )
    parser.add_argument("--version", action="version", version=f"quorumkit {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_opts(p: argparse.ArgumentParser, options_key: str) -> None:
        for opt in _COMMAND_OPTIONS[options_key]:
            p.add_argument(f"--{opt.name}", type=opt.conv, default=None, help=opt.help)
        p.set_defaults(options_key=options_key)

    add_opts(sub.add_parser("analyze", help="consensus probability for one ensemble"), "analyze")
    add_opts(sub.add_parser("plan", help="smallest agent count reaching a target"), "plan")

    critical = sub.add_parser("critical", help="critical-value solvers")
    crit_sub = critical.add_subparsers(dest="crit_cmd", required=True)
    add_opts(crit_sub.add_parser("size", help="smallest helpful addition size"), "critical size")
    add_opts(
        crit_sub.add_parser("competence", help="minimum helpful addition competence"),
        "critical competence",
    )

    table = sub.add_parser("table", help="regenerate a published reference table")
    table.add_argument("name", choices=("table1", "table2"), help="which table")
    add_opts(table, "table")

    add_opts(sub.add_parser("simulate", help="seeded Monte Carlo run"), "simulate")
    return parser


def _load_config(path: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                mapping[key.strip()] = value.strip()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    return mapping


def _resolve_options(ns: argparse.Namespace) -> dict[str, Any]:
    """Merge CLI flags over config-file values over built-in defaults."""
    options = _COMMAND_OPTIONS[ns.options_key]
    config: dict[str, str] = {}
    config_path = getattr(ns, "config", None)
    if config_path is not None:
        config = _load_config(config_path)
        known = {o.name for o in options}
        unknown = sorted(set(config) - known)
        if unknown:
            raise DomainError(
                f"config keys not recognised for this command: {', '.join(unknown)}"
            )
    resolved: dict[str, Any] = {}
    for opt in options:
        value = getattr(ns, opt.dest, None)
        if value is None and opt.name in config:
            value = opt.conv(config[opt.name])
        if value is None:
            value = opt.default
        if value is None and opt.required:
            raise DomainError(f"missing required option --{opt.name}")
        resolved[opt.name] = value
    return resolved


def _policy_from(resolved: dict[str, Any]) -> VotePolicy:
    return VotePolicy(quorum=resolved["quorum"])


# ------------------------------------------------------------------ commands


def _cmd_analyze(resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    n, p = resolved["n"], resolved["p"]
    prior_given = resolved["prior"] is not None
    prior = DecisionPrior(resolved["prior"]) if prior_given else DecisionPrior()
    p_c = consensus_probability(n, p, policy)
    advice = consensus_advice(p, prior)
    ensemble = Ensemble([AgentClass(n, p)])
    normal = normal_route_consensus(ensemble, policy)
    pois = poisson_consensus_probability(n, p, policy)
    result: dict[str, Any] = {
        "threshold": majority_threshold(n, policy),
        "consensus_probability": p_c,
        "advice": {
            "verdict": advice.verdict.value,
            "margin": advice.margin,
        },
        "approximations": {
            "normal_route": {
                "approx": normal.approx_value,
                "exact": normal.exact_value,
                "abs_error": normal.abs_error,
            },
            "poisson": {
                "approx": pois.approx_value,
                "exact": pois.exact_value,
                "abs_error": pois.abs_error,
            },
        },
    }
    if prior_given:
        result["adjusted_competence"] = advice.adjusted_competence
        result["adjusted_consensus_probability"] = consensus_probability(
            n, advice.adjusted_competence, policy
        )
    params = {
        "n": n,
        "p": p,
        "prior": resolved["prior"],
        "quorum": str(policy.quorum),
    }
    return Report("analyze", params, result, _provenance()), 0


def _cmd_plan(resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    prior = DecisionPrior(resolved["prior"]) if resolved["prior"] is not None else None
    plan = plan_agent_count(
        resolved["p"],
        resolved["target"],
        prior=prior,
        max_n=resolved["max-n"],
        policy=policy,
    )
    effective = (
        bayes_adjusted_competence(resolved["p"], prior) if prior else resolved["p"]
    )
    result = {
        "required_n": plan.required_n,
        "achieved_value": plan.achieved_value,
        "attainable": plan.attainable,
        "effective_competence": effective,
        "reason": plan.reason,
    }
    params = {
        "p": resolved["p"],
        "target": resolved["target"],
        "prior": resolved["prior"],
        "max-n": resolved["max-n"],
        "quorum": str(policy.quorum),
    }
    return Report("plan", params, result, _provenance()), 0 if plan.attainable else 3


def _cmd_critical_size(resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    outcome = critical_group_size(
        AgentClass(resolved["a-count"], resolved["a-p"]),
        resolved["b-p"],
        search_cap=resolved["cap"],
        policy=policy,
    )
    result = {
        "verdict": outcome.verdict.value,
        "b_star": outcome.b_star,
        "search_cap": outcome.search_cap,
        "baseline": outcome.baseline,
        "achieved_value": outcome.achieved_value,
    }
    params = {
        "a-count": resolved["a-count"],
        "a-p": resolved["a-p"],
        "b-p": resolved["b-p"],
        "cap": resolved["cap"],
        "quorum": str(policy.quorum),
    }
    return Report("critical size", params, result, _provenance()), 0


def _cmd_critical_competence(resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    value = critical_competence(
        resolved["a-p"],
        resolved["a-count"],
        search_cap=resolved["cap"],
        tolerance=resolved["tol"],
        policy=policy,
    )
    reference = None
    for key, ref in CRITICAL_COMPETENCE_REFERENCE.items():
        if abs(resolved["a-p"] - key) < 1e-9:
            reference = ref
    result = {
        "critical_competence": value,
        "reference_value": reference,
        "delta_vs_reference": None if reference is None else value - reference,
    }
    params = {
        "a-p": resolved["a-p"],
        "a-count": resolved["a-count"],
        "cap": resolved["cap"],
        "tol": resolved["tol"],
        "quorum": str(policy.quorum),
    }
    return Report("critical competence", params, result, _provenance()), 0


def _cmd_table(name: str, resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    if name == "table1":
        rows: Sequence[Any] = CONSENSUS_TABLE_ROWS
        cols = CONSENSUS_TABLE_COLS
        reference = CONSENSUS_TABLE
        row_label = "agents"

        def cell(row: Any, col: float) -> float:
            return consensus_probability(row, col, policy)

    else:
        rows = ADJUSTED_TABLE_ROWS
        cols = ADJUSTED_TABLE_COLS
        reference = ADJUSTED_TABLE
        row_label = "prior"

        def cell(row: Any, col: float) -> float:
            return bayes_adjusted_competence(col, DecisionPrior(row))

    computed = [[cell(r, c) for c in cols] for r in rows]
    rounded = [[round(v, 3) for v in row] for row in computed]
    max_abs_diff = max(
        abs(computed[i][j] - reference[i][j])
        for i in range(len(rows))
        for j in range(len(cols))
    )
    mismatches = sum(
        1
        for i in range(len(rows))
        for j in range(len(cols))
        if abs(rounded[i][j] - reference[i][j]) > 1e-9
    )
    result = {
        "name": name,
        "row_label": row_label,
        "rows": list(rows),
        "cols": list(cols),
        "computed": rounded,
        "reference": [list(r) for r in reference],
        "max_abs_diff_prerounding": max_abs_diff,
        "rounded_mismatches": mismatches,
    }
    params = {"name": name, "quorum": str(policy.quorum)}
    return Report("table", params, result, _provenance()), 0


def _cmd_simulate(resolved: dict[str, Any]) -> tuple[Report, int]:
    policy = _policy_from(resolved)
    classes = resolved["classes"]
    if classes is None:
        if resolved["n"] is None or resolved["p"] is None:
            raise DomainError("provide --classes, or both --n and --p")
        classes = ((resolved["n"], resolved["p"]),)
    elif resolved["n"] is not None or resolved["p"] is not None:
        raise DomainError("--classes and the --n/--p shorthand are mutually exclusive")
    ensemble = Ensemble([AgentClass(c, p) for c, p in classes])
    config = SimulationConfig(
        ensemble=ensemble,
        trials=resolved["trials"],
        seed=resolved["seed"],
        prior=DecisionPrior(resolved["prior"]),
        policy=policy,
    )
    outcome = simulate(config, workers=resolved["workers"])
    trace_records = None
    if resolved["trace"] is not None:
        trace_records = write_trace(config, resolved["trace"])
    result = {
        "trials": outcome.trials,
        "correct_consensus": outcome.correct_consensus,
        "wrong_consensus": outcome.wrong_consensus,
        "ties": outcome.ties,
        "empirical_p_c": outcome.empirical_p_c,
        "analytic_p_c": mixed_consensus_probability(ensemble, policy),
        "per_alternative": [
            {
                "alternative": alt,
                "chosen": outcome.alternative_chosen[alt - 1],
                "chosen_true": outcome.alternative_chosen_true[alt - 1],
                "empirical_p_r": outcome.empirical_p_r(alt),
            }
            for alt in (1, 2)
        ],
    }
    if trace_records is not None:
        result["trace_path"] = resolved["trace"]
        result["trace_records"] = trace_records
    params = {
        "classes": [[c, p] for c, p in classes],
        "prior": resolved["prior"],
        "trials": resolved["trials"],
        "seed": resolved["seed"],
        "workers": resolved["workers"],
        "quorum": str(policy.quorum),
    }
    return Report("simulate", params, result, _provenance(resolved["seed"])), 0


# ----------------------------------------------------------------- rendering


def _fmt_value(key: str, value: Any) -> str:
    if isinstance(value, bool) or not isinstance(value, float):
        return str(value)
    if "error" in key or "diff" in key or "margin" in key or "delta" in key:
        return f"{value:.3g}"
    return f"{value:.3f}"


def _human_lines(data: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for key, value in data.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_human_lines(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(f"{pad}  -")
                lines.extend(_human_lines(item, indent + 2))
        else:
            lines.append(f"{pad}{key}: {_fmt_value(key, value)}")
    return lines


def _grid_lines(result: dict) -> list[str]:
    cols = result["cols"]
    header = [result["row_label"].rjust(8)] + [f"{c:>8}" for c in cols]
    lines = ["".join(header)]
    for label, row in zip(result["rows"], result["computed"]):
        cells = [f"{label:>8}"] + [f"{v:>8.3f}" for v in row]
        lines.append("".join(cells))
    lines.append(
        f"max |computed - reference| before rounding: "
        f"{result['max_abs_diff_prerounding']:.3g}"
    )
    lines.append(f"cells differing after 3-decimal rounding: {result['rounded_mismatches']}")
    return lines


def _render_human(report: Report) -> str:
    title = f"quorumkit {report.command}"
    if sys.stdout.isatty() and not os.environ.get("NO_COLOR"):
        title = f"\x1b[1m{title}\x1b[0m"
    lines = [title]
    if report.command == "table":
        lines.extend(_grid_lines(report.result))
    else:
        lines.extend(_human_lines(report.result))
    return "\n".join(lines)


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    return str(value)


def _flatten(data: dict, prefix: str = "") -> list[tuple[str, Any]]:
    rows: list[tuple[str, Any]] = []
    for key, value in data.items():
        label = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, prefix=f"{label}."))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                rows.extend(_flatten(item, prefix=f"{label}[{i}]."))
        else:
            rows.append((label, value))
    return rows


def _render_csv(report: Report) -> str:
    if report.command == "table":
        result = report.result
        lines = [",".join([result["row_label"]] + [str(c) for c in result["cols"]])]
        for label, row in zip(result["rows"], result["computed"]):
            lines.append(",".join([str(label)] + [f"{v:.3f}" for v in row]))
        return "\n".join(lines)
    lines = ["key,value"]
    for key, value in _flatten(report.result):
        lines.append(f"{key},{_csv_cell(value)}")
    return "\n".join(lines)


def _render(report: Report, fmt: str) -> str:
    if fmt == "human":
        return _render_human(report)
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return _render_csv(report)
    raise DomainError(f"unknown format {fmt!r} (use human, json, or csv)")


# ---------------------------------------------------------------- entrypoint


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        resolved = _resolve_options(ns)
        if ns.cmd == "analyze":
            report, code = _cmd_analyze(resolved)
        elif ns.cmd == "plan":
            report, code = _cmd_plan(resolved)
        elif ns.cmd == "critical" and ns.crit_cmd == "size":
            report, code = _cmd_critical_size(resolved)
        elif ns.cmd == "critical":
            report, code = _cmd_critical_competence(resolved)
        elif ns.cmd == "table":
            report, code = _cmd_table(ns.name, resolved)
        elif ns.cmd == "simulate":
            report, code = _cmd_simulate(resolved)
        else:  # pragma: no cover - argparse enforces the choices
            raise DomainError(f"unknown command {ns.cmd!r}")
        print(_render(report, resolved["format"]))
        return code
    except (ValueError, ConvergenceError) as exc:
        # DomainError subclasses ValueError; plain ValueError also covers
        # bad kernel-backend names surfacing from the env var
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
