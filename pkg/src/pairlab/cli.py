"""Scenario runner and fixture generator.

    pairlab run <scenario.json | bundled-name> [--out DIR] [--seed-override N] [--format json|text]
    pairlab compare <scenario> <scenario> ... [--format json|text]
    pairlab gen-fixtures (--q Q | --bits N) --table-size N --seed S --out DIR
    pairlab list

A scenario declares an expectation; ``run`` exits 0 only if every session
meets it, 1 if any session violates it, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .adversaries import BehaviorConfigError, RhoSubstitution, ServerBehavior, behavior_from_config
from .algebra import PairingParams, ParamsError, make_params, params_for_q
from .codec import DecodeError, canonical_json
from .protocols import PROTOCOLS, CMPublic, Verdict
from .randtable import RandTable, TableExhausted, generate_table
from .simnet import SessionResult, compare_costs, eavesdrop_recover, format_cost_table, run_session

log = logging.getLogger("pairlab")

ROWS_PER_SESSION = {"chen": 3, "revised": 1, "cm": 0}
SERVER_KEYS = {"chen": {"u1": "U1", "u2": "U2"}, "revised": {"u1": "U1", "u2": "U2"}, "cm": {"u": "U"}}
MAX_EXHAUSTIVE_Q = 101


class ScenarioError(ValueError):
    pass


# -- expectations -------------------------------------------------------------------


def _honest_correct(r: SessionResult, ctx: dict) -> str | None:
    if r.verdict is Verdict.REJECTED:
        return "rejected"
    return None if r.correct else "output differs from truth"


def _attack_undetected(r: SessionResult, ctx: dict) -> str | None:
    if r.verdict is Verdict.REJECTED:
        return "attack was detected"
    if r.correct:
        return "output equals truth"
    expected = ctx.get("expected_residual")
    if expected is not None and r.residual != expected:
        return f"residual {r.residual.encode()} != expected {expected.encode()}"
    return None


def _rejected(r: SessionResult, ctx: dict) -> str | None:
    return None if r.verdict is Verdict.REJECTED else f"verdict {r.verdict.value}"


def _eavesdrop_recovers(r: SessionResult, ctx: dict) -> str | None:
    got = eavesdrop_recover(r.transcript)
    return None if got == (r.A, r.B) else f"eavesdropper got {got}"


def _eavesdrop_blocked(r: SessionResult, ctx: dict) -> str | None:
    got = eavesdrop_recover(r.transcript)
    return None if got is None else f"eavesdropper got {got}"


EXPECTATIONS: dict[str, Callable[[SessionResult, dict], str | None]] = {
    "honest_correct": _honest_correct,
    "attack_undetected": _attack_undetected,
    "rejected": _rejected,
    "eavesdrop_recovers": _eavesdrop_recovers,
    "eavesdrop_blocked": _eavesdrop_blocked,
}


# -- scenario loading ------------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    protocol: str
    params: PairingParams
    inputs: list[tuple[int, int]]
    behavior_sets: list[dict[str, dict]]
    expect: str
    seed: int
    encrypted: bool = False
    encryption_overhead: int = 0
    table_cfg: dict = field(default_factory=dict)
    cm_public_seed: int = 0
    base_dir: Path = Path(".")

    @property
    def n_sessions(self) -> int:
        return len(self.inputs) * len(self.behavior_sets)


def bundled_scenarios() -> list[str]:
    root = resources.files("pairlab") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario_path(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    name = ref[:-5] if ref.endswith(".json") else ref
    if name in bundled_scenarios():
        return Path(str(resources.files("pairlab") / "scenarios" / f"{name}.json"))
    raise ScenarioError(f"scenario not found: {ref}")


def _load_params(cfg: Any, base: Path) -> PairingParams:
    if not isinstance(cfg, dict):
        raise ScenarioError(f"params must be an object, got {cfg!r}")
    if "file" in cfg:
        path = base / cfg["file"]
        if not path.exists():
            raise ScenarioError(f"params file not found: {path}")
        return PairingParams.from_json(json.loads(path.read_text()))
    if {"q", "p", "gt_gen"} <= cfg.keys():
        return PairingParams.from_json(cfg)
    if "q" in cfg:
        return params_for_q(int(cfg["q"]))
    if "bits" in cfg:
        return make_params(int(cfg["bits"]), cfg.get("seed"))
    raise ScenarioError("params needs one of: file, q, bits, or a full {q, p, gt_gen} record")


def _inputs(cfg: Any, params: PairingParams, seed: int) -> list[tuple[int, int]]:
    if not isinstance(cfg, dict) or "mode" not in cfg:
        raise ScenarioError("inputs needs a 'mode' of explicit, random or exhaustive")
    mode = cfg["mode"]
    if mode == "explicit":
        return [(int(cfg["A"]) % params.q, int(cfg["B"]) % params.q)]
    if mode == "random":
        count = int(cfg.get("count", 0))
        if count < 1:
            raise ScenarioError("random inputs need count >= 1")
        rng = random.Random(f"inputs/{cfg.get('seed', seed)}")
        return [(rng.randrange(params.q), rng.randrange(params.q)) for _ in range(count)]
    if mode == "exhaustive":
        if params.q > MAX_EXHAUSTIVE_Q:
            raise ScenarioError(f"exhaustive inputs limited to q <= {MAX_EXHAUSTIVE_Q}")
        return [(a, b) for a in range(params.q) for b in range(params.q)]
    raise ScenarioError(f"unknown input mode {mode!r}")


def load_scenario(path: Path, seed_override: int | None = None) -> Scenario:
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    try:
        protocol = cfg["protocol"]
        expect = cfg["expect"]
        behaviors = cfg["behaviors"]
    except KeyError as exc:
        raise ScenarioError(f"{path}: missing required key {exc}") from exc
    if protocol not in PROTOCOLS:
        raise ScenarioError(f"unknown protocol {protocol!r}")
    if expect not in EXPECTATIONS:
        raise ScenarioError(f"unknown expectation {expect!r}; choose from {sorted(EXPECTATIONS)}")
    if expect.startswith("eavesdrop") and protocol == "cm":
        raise ScenarioError("the channel tap applies to two-server protocols only")

    behavior_sets = behaviors if isinstance(behaviors, list) else [behaviors]
    for bset in behavior_sets:
        if not isinstance(bset, dict) or set(bset) != set(SERVER_KEYS[protocol]):
            raise ScenarioError(f"{protocol} needs behaviors for {sorted(SERVER_KEYS[protocol])}, got {bset!r}")
        for bcfg in bset.values():
            behavior_from_config(bcfg)  # validate early

    seed = int(cfg.get("seed", 0)) if seed_override is None else seed_override
    base = path.parent
    try:
        params = _load_params(cfg.get("params", {"q": 11}), base)
    except (ParamsError, DecodeError, ValueError) as exc:
        raise ScenarioError(f"bad params: {exc}") from exc
    return Scenario(
        name=cfg.get("name", path.stem),
        protocol=protocol,
        params=params,
        inputs=_inputs(cfg.get("inputs", {"mode": "random", "count": 1}), params, seed),
        behavior_sets=behavior_sets,
        expect=expect,
        seed=seed,
        encrypted=bool(cfg.get("encrypted", False)),
        encryption_overhead=int(cfg.get("encryption_overhead", 0)),
        table_cfg=cfg.get("table", {}),
        cm_public_seed=int(cfg.get("cm_public_seed", 0)),
        base_dir=base,
    )


# -- running ------------------------------------------------------------------------


@dataclass
class ScenarioReport:
    scenario: Scenario
    results: list[SessionResult]
    failures: list[dict]
    summaries: list[dict]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        sc = self.scenario
        return {
            "scenario": sc.name,
            "protocol": sc.protocol,
            "params": sc.params.to_json(),
            "expect": sc.expect,
            "seed": sc.seed,
            "encrypted": sc.encrypted,
            "sessions_run": len(self.results),
            "passed": self.passed,
            "failures": self.failures,
            "costs": compare_costs(self.results),
            "sessions": self.summaries,
        }

    def text(self) -> str:
        sc = self.scenario
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}  {sc.name}: {sc.protocol}, {len(self.results)} sessions, expect {sc.expect}",
            f"      q={sc.params.q} p={sc.params.p} seed={sc.seed} encrypted={sc.encrypted}",
        ]
        for f in self.failures[:10]:
            lines.append(f"      session {f['session']}: {f['reason']}")
        if len(self.failures) > 10:
            lines.append(f"      ... {len(self.failures) - 10} more")
        return "\n".join(lines) + "\n\n" + format_cost_table(compare_costs(self.results))


def _table_for(sc: Scenario) -> RandTable | None:
    rows = ROWS_PER_SESSION[sc.protocol]
    if rows == 0:
        return None
    if "file" in sc.table_cfg:
        table = RandTable.load(sc.base_dir / sc.table_cfg["file"])
        if table.params != sc.params:
            raise ScenarioError("table file was generated for different params")
        return table
    size = int(sc.table_cfg.get("size", rows * sc.n_sessions))
    return generate_table(size, sc.params, f"table/{sc.table_cfg.get('seed', sc.seed)}")


def _behaviors(sc: Scenario, bset: dict[str, dict], session: int) -> dict[str, ServerBehavior]:
    keys = SERVER_KEYS[sc.protocol]
    return {
        keys[k]: behavior_from_config(cfg, seed=f"{cfg.get('seed', 0)}/{sc.seed}/{session}/{k}")
        for k, cfg in sorted(bset.items())
    }


def run_scenario(sc: Scenario) -> ScenarioReport:
    table = _table_for(sc)
    public = CMPublic.create(sc.params, f"cm-public/{sc.cm_public_seed}") if sc.protocol == "cm" else None
    check = EXPECTATIONS[sc.expect]
    results, failures, summaries = [], [], []
    session = 0
    for bset in sc.behavior_sets:
        for a, b in sc.inputs:
            behaviors = _behaviors(sc, bset, session)
            r = run_session(
                sc.protocol,
                sc.params.g1(a),
                sc.params.g2(b),
                behaviors,
                table=table,
                cm_public=public,
                seed=f"session/{sc.seed}/{session}",
                encrypted=sc.encrypted,
                session=session,
                encryption_overhead=sc.encryption_overhead,
            )
            ctx: dict = {}
            summary = r.summary()
            u1 = behaviors.get("U1")
            if isinstance(u1, RhoSubstitution) and u1.rho is not None:
                # forged delta over honest delta
                ctx["expected_residual"] = u1.rho / u1.replaced
                summary["attack"] = {
                    "rho": u1.rho.encode(),
                    "expected_residual": ctx["expected_residual"].encode(),
                }
            reason = check(r, ctx)
            summary["expectation_met"] = reason is None
            if reason is not None:
                failures.append({"session": session, "reason": reason})
            results.append(r)
            summaries.append(summary)
            session += 1
    return ScenarioReport(sc, results, failures, summaries)


def write_report(report: ScenarioReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report.scenario.name
    summary_path = out_dir / f"{name}.summary.json"
    transcript_path = out_dir / f"{name}.transcript.jsonl"
    costs_path = out_dir / f"{name}.costs.txt"
    summary_path.write_text(canonical_json(report.to_json()) + "\n")
    transcript_path.write_text("".join(r.transcript.to_jsonl() for r in report.results))
    costs_path.write_text(format_cost_table(compare_costs(report.results)))
    return [summary_path, transcript_path, costs_path]


# -- fixtures -----------------------------------------------------------------------


def gen_fixtures(params: PairingParams, table_size: int, seed: int, out_dir: Path) -> tuple[Path, Path]:
    if table_size < 1:
        raise ValueError(f"table size must be >= 1, got {table_size}")
    out_dir.mkdir(parents=True, exist_ok=True)
    params_path = out_dir / "params.json"
    table_path = out_dir / "table.json"
    params_path.write_text(canonical_json(params.to_json()) + "\n")
    generate_table(table_size, params, seed).save(table_path)
    return params_path, table_path


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and enforce its expectation")
    run.add_argument("scenario")
    run.add_argument("--out", type=Path, help="directory for summary, transcript and cost files")
    run.add_argument("--seed-override", type=int)
    run.add_argument("--format", choices=("json", "text"), default="text")

    cmp_ = sub.add_parser("compare", help="run several scenarios and tabulate their costs")
    cmp_.add_argument("scenarios", nargs="+")
    cmp_.add_argument("--seed-override", type=int)
    cmp_.add_argument("--format", choices=("json", "text"), default="text")

    gen = sub.add_parser("gen-fixtures", help="write params.json and table.json")
    grp = gen.add_mutually_exclusive_group(required=True)
    grp.add_argument("--q", type=int)
    grp.add_argument("--bits", type=int)
    gen.add_argument("--params-seed", type=int)
    gen.add_argument("--table-size", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)

    sub.add_parser("list", help="list bundled scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "list":
            print("\n".join(bundled_scenarios()))
            return 0
        if args.command == "gen-fixtures":
            params = params_for_q(args.q) if args.q is not None else make_params(args.bits, args.params_seed)
            for p in gen_fixtures(params, args.table_size, args.seed, args.out):
                print(p)
            return 0
        if args.command == "run":
            sc = load_scenario(resolve_scenario_path(args.scenario), args.seed_override)
            report = run_scenario(sc)
            if args.out:
                for p in write_report(report, args.out):
                    log.info("wrote %s", p)
            if args.format == "json":
                print(json.dumps(report.to_json(), indent=2, sort_keys=True))
            else:
                print(report.text(), end="")
            return 0 if report.passed else 1
        if args.command == "compare":
            results = []
            for ref in args.scenarios:
                report = run_scenario(load_scenario(resolve_scenario_path(ref), args.seed_override))
                results.extend(report.results)
            comparison = compare_costs(results)
            if args.format == "json":
                print(json.dumps(comparison, indent=2, sort_keys=True))
            else:
                print(format_cost_table(comparison), end="")
            return 0
    except (ScenarioError, BehaviorConfigError, ParamsError, DecodeError, TableExhausted, ValueError) as exc:
        print(f"pairlab: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
