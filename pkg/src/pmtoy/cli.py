"""Command-line front end.

Subcommands: `verify` (exhaustive depth-bounded verification), `ks-scan`
(the 512-table parity scan), `simulate` (seeded single runs), `dump`
(state tables with context products), and `search` (bounded completion
search over a candidate family).

Exit codes are stable across commands: 0 pass, 1 violations found,
2 usage error, 3 search budget exhausted without full coverage.  With no
--output the report goes to stdout; the PMTOY_REPORT_DIR environment
variable supplies a default report directory.  Reports with the same
command, configuration and seed are byte-identical except for the
elapsed-time field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass

from . import pauli
from .extension import ALIASES, extended_machine, four_state_machine
from .machine import MealyMachine, step
from .toy import spekkens_machine
from .verify import FAMILIES, SearchOutcome, VerificationReport, search_machines, verify_machine

BUILTIN_MACHINES = ("spekkens16", "extended32", "extended32-randomized", "paper4")


class UsageError(Exception):
    pass


def build_machine(selector: str) -> MealyMachine:
    """A builtin machine by name, or any machine from its JSON file."""
    if selector == "spekkens16":
        return spekkens_machine()
    if selector == "extended32":
        return extended_machine(randomized=False)
    if selector == "extended32-randomized":
        return extended_machine(randomized=True)
    if selector == "paper4":
        return four_state_machine()
    if os.path.exists(selector):
        with open(selector) as f:
            try:
                return MealyMachine.from_json(f.read())
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot load machine from {selector}: {exc}") from None
    raise UsageError(
        f"unknown machine {selector!r}; expected one of {', '.join(BUILTIN_MACHINES)} "
        "or a machine JSON file"
    )


@dataclass
class RunConfig:
    command: str
    machine: str | None = None
    depth: int = 6
    seed: int = 0
    output: str | None = None
    format: str = "json"
    start: str | None = None
    seq: str | None = None
    family: str | None = None
    budget: int = 200_000

    def validate(self) -> None:
        if self.depth < 1:
            raise UsageError("depth must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit value")
        if self.budget < 1:
            raise UsageError("budget must be >= 1")


def _write_report(cfg: RunConfig, default_name: str, text: str) -> None:
    path = cfg.output
    if path is None and os.environ.get("PMTOY_REPORT_DIR"):
        path = os.path.join(os.environ["PMTOY_REPORT_DIR"], default_name)
    if path:
        with open(path, "w") as f:
            f.write(text)
        print(f"report written to {path}")
    else:
        sys.stdout.write(text)


def _report_json(report: VerificationReport) -> str:
    return report.to_json()


def _report_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["kind", "start", "sequence", "outputs", "positions", "expected", "observed"]
    )
    for v in report.violations:
        writer.writerow(
            [
                v.kind,
                v.start,
                " ".join(v.sequence),
                " ".join(f"{o:+d}" for o in v.outputs),
                " ".join(str(p) for p in v.positions),
                f"{v.expected:+d}",
                f"{v.observed:+d}",
            ]
        )
    return buf.getvalue()


def _report_text(report: VerificationReport) -> str:
    lines = [
        f"machine: {report.machine}",
        f"depth: {report.depth}",
        f"sequences checked: {report.sequences_checked}",
        f"violations: {len(report.violations)}",
    ]
    for v in report.violations:
        lines.append(
            f"  {v.kind} from {v.start}: seq {' '.join(v.sequence)} "
            f"outputs {' '.join(f'{o:+d}' for o in v.outputs)} "
            f"at {','.join(str(p) for p in v.positions)} "
            f"expected {v.expected:+d} observed {v.observed:+d}"
        )
    for note in report.notes:
        lines.append(f"note: {note}")
    lines.append("result: " + ("pass" if report.passed else "fail"))
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig) -> int:
    m = build_machine(cfg.machine or "")
    report = verify_machine(m, cfg.depth)
    ext = {"json": "json", "csv": "csv", "text": "txt"}[cfg.format]
    render = {"json": _report_json, "csv": _report_csv, "text": _report_text}[cfg.format]
    _write_report(cfg, f"verify-{m.name}-depth{cfg.depth}.{ext}", render(report))
    return 0 if report.passed else 1


def cmd_ks_scan(cfg: RunConfig) -> int:
    summary = pauli.ks_scan_summary()
    if cfg.format == "json":
        text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    else:
        lines = [
            f"sign tables scanned: {summary['tables']}",
            f"satisfying the QM context signs (rows +1, cols 1-2 +1, col 3 -1): "
            f"{summary['qm_satisfying']}",
            f"satisfying all-plus context signs: {summary['all_plus_satisfying']}",
            "histogram of -1 context products per table: "
            + ", ".join(
                f"{k} -> {v}" for k, v in summary["minus_product_histogram"].items()
            ),
            f"six-product values seen: {summary['six_product_values']}",
        ]
        text = "\n".join(lines) + "\n"
    _write_report(cfg, f"ks-scan.{'json' if cfg.format == 'json' else 'txt'}", text)
    return 0


def _resolve_start(m: MealyMachine, start: str) -> int:
    if start in m.states:
        return m.states.index(start)
    if start in ALIASES and ALIASES[start].label in m.states:
        return m.states.index(ALIASES[start].label)
    raise UsageError(f"unknown start state {start!r} for machine {m.name}")


def cmd_simulate(cfg: RunConfig) -> int:
    m = build_machine(cfg.machine or "")
    tokens = [t.strip() for t in (cfg.seq or "").split(",") if t.strip()]
    if not tokens:
        raise UsageError("empty measurement sequence")
    for t in tokens:
        if t not in pauli.OBSERVABLES:
            raise UsageError(f"unknown observable: {t!r}")
    if cfg.start is None:
        raise UsageError("--start is required")
    state = _resolve_start(m, cfg.start)
    rng = random.Random(cfg.seed)
    lines = [f"machine: {m.name}  seed: {cfg.seed}"]
    for n, token in enumerate(tokens, start=1):
        before = m.states[state]
        try:
            out, state = step(m, state, token, rng)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        lines.append(
            f"step {n}: {token:<5} output {out:+d}  {before} -> {m.states[state]}"
        )
    lines.append(f"final state: {m.states[state]}")
    print("\n".join(lines))
    return 0


def _dump_dict(m: MealyMachine) -> dict:
    pos = {name: i for i, name in enumerate(m.inputs)}
    states = []
    for s, label in enumerate(m.states):
        rows = [
            [m.outputs[s][pos[name]] for name in grid_row]
            for grid_row in pauli.GRID_NAMES
        ]
        compact = "/".join(
            "".join("+" if v == +1 else "-" for v in row) for row in rows
        )
        products = {}
        for ctx, positions in pauli.CONTEXT_POSITIONS.items():
            p = 1
            for r, c in positions:
                p *= rows[r][c]
            products[ctx] = p
        deviations = [
            ctx for ctx, sign in pauli.PRESCRIBED_SIGN.items() if products[ctx] != sign
        ]
        alias = next(
            (a for a, st in ALIASES.items() if st.label == label), None
        )
        states.append(
            {
                "label": label,
                "alias": alias,
                "table": compact,
                "context_products": products,
                "qm_deviation": deviations,
            }
        )
    return {"machine": m.name, "states": states}


def cmd_dump(cfg: RunConfig) -> int:
    m = build_machine(cfg.machine or "")
    data = _dump_dict(m)
    if cfg.format == "json":
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
        _write_report(cfg, f"dump-{m.name}.json", text)
        return 0
    lines = [f"machine: {m.name} ({len(data['states'])} states)"]
    for st in data["states"]:
        name = st["label"] + (f" ({st['alias']})" if st["alias"] else "")
        prods = " ".join(
            f"{ctx}={st['context_products'][ctx]:+d}"
            for ctx in ("row1", "row2", "row3", "col1", "col2", "col3")
        )
        dev = ",".join(st["qm_deviation"]) or "none"
        lines.append(f"{name:<14} {st['table']}  {prods}  deviation: {dev}")
    _write_report(cfg, f"dump-{m.name}.txt", "\n".join(lines) + "\n")
    return 0


def cmd_search(cfg: RunConfig) -> int:
    if cfg.family not in FAMILIES:
        raise UsageError(
            f"unknown family {cfg.family!r}; expected one of {', '.join(FAMILIES)}"
        )
    outcome = search_machines(FAMILIES[cfg.family](), cfg.depth, budget=cfg.budget)
    if cfg.format == "json":
        text = json.dumps(outcome.to_dict(), indent=2, sort_keys=True) + "\n"
        _write_report(cfg, f"search-{cfg.family}-depth{cfg.depth}.json", text)
    else:
        text = _search_text(outcome)
        _write_report(cfg, f"search-{cfg.family}-depth{cfg.depth}.txt", text)
    return 0 if outcome.exhausted else 3


def _search_text(outcome: SearchOutcome) -> str:
    lines = [
        f"family: {outcome.family}  depth: {outcome.depth}",
        f"completions found: {outcome.completions}",
        f"search nodes: {outcome.nodes} (budget {outcome.budget})",
        "coverage: "
        + ("exhaustive" if outcome.exhausted else "budget exhausted, incomplete"),
    ]
    if outcome.exhausted and outcome.completions == 0:
        lines.append("certificate: no machine in this family passes at this depth")
    for m in outcome.machines:
        lines.append(f"machine: {m.name}")
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmtoy",
        description="Peres-Mermin square toy machines: verification, scans, "
        "simulation, dumps, and completion search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, formats: list[str], default: str) -> None:
        p.add_argument("--output", help="report file path (default: stdout)")
        p.add_argument("--format", choices=formats, default=default)

    p = sub.add_parser("verify", help="exhaustively verify a machine to a depth bound")
    p.add_argument("--machine", required=True, help="builtin name or machine JSON file")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    add_common(p, ["json", "csv", "text"], "json")

    p = sub.add_parser("ks-scan", help="scan all 512 noncontextual sign tables")
    add_common(p, ["json", "text"], "text")

    p = sub.add_parser("simulate", help="run one seeded measurement sequence")
    p.add_argument("--machine", required=True)
    p.add_argument("--start", required=True, help="state label (aliases a-d accepted)")
    p.add_argument("--seq", required=True, help="comma-separated observables, e.g. Z1,Z1Z2")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("dump", help="dump all state tables with context products")
    p.add_argument("--machine", required=True)
    add_common(p, ["text-table", "text", "json"], "text-table")

    p = sub.add_parser("search", help="search completions of a candidate family")
    p.add_argument("--family", required=True, help=", ".join(FAMILIES))
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--budget", type=int, default=200_000)
    add_common(p, ["json", "text"], "json")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        machine=getattr(args, "machine", None),
        depth=getattr(args, "depth", 6),
        seed=getattr(args, "seed", 0),
        output=getattr(args, "output", None),
        format=getattr(args, "format", "json"),
        start=getattr(args, "start", None),
        seq=getattr(args, "seq", None),
        family=getattr(args, "family", None),
        budget=getattr(args, "budget", 200_000),
    )
    handlers = {
        "verify": cmd_verify,
        "ks-scan": cmd_ks_scan,
        "simulate": cmd_simulate,
        "dump": cmd_dump,
        "search": cmd_search,
    }
    try:
        cfg.validate()
        return handlers[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
