"""Command-line front end: JSON instance files, certificates, reproduction suite.

Commands
  mms             exact max-min value and witness partition for one agent
  solve           run the protocol matching the demand vector, emit certificate
  verify          re-check a certificate against its instance
  check-class     monotonicity / hierarchy-class report per agent
  counterexamples run every impossibility construction and checker
  oracle          brute-force existence or best-ratio search

Instances are JSON files {label, m, agents: [{class, ...spec}]} or builtin
names such as "submodular_6", "grid27", "421", "half_cap:2,2,2",
"n_minus_1:3", "floor_n3:6" -- the whole reproduction suite runs without any
data files.  Rationals are encoded as exact "p/q" strings.  Exit codes:
0 success, 2 budget refusal, 3 impossibility, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .core import Allocation, BudgetExceeded, Instance, ItemSet, Partition
from .counterexamples import (
    HalfCapValuation,
    MaxBlockThirdsValuation,
    OnesValuation,
    counterexample_suite,
    instance_27,
    instance_421,
    instance_floor_n3,
    instance_half_cap,
    instance_n_minus_1,
    instance_submodular_6,
)
from .mms import mms_value, verify_alpha_mms_P
from .oracle import SearchBudget, best_alpha, exists_alpha_mms
from .protocols import (
    ImpossibilityReference,
    ProtocolCertificate,
    cut_and_choose_two,
    dispatch_three,
    four_agents_3344,
    two_types,
)
from .valuations import (
    AdditiveValuation,
    BudgetAdditiveValuation,
    BundleMaxValuation,
    CoverageValuation,
    TableValuation,
    ValuationOracle,
    XOSValuation,
    is_monotone,
    is_subadditive,
    is_submodular,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_IMPOSSIBLE = 3
EXIT_VERIFY = 4


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))


def parse_frac(s) -> Fraction:
    return Fraction(str(s))


# --- agent (de)serialization -------------------------------------------------


def agent_to_json(v: ValuationOracle) -> dict:
    out: dict = {"class": v.declared_class}
    if isinstance(v, AdditiveValuation):
        out["weights"] = [frac_str(w) for w in v.weights]
    elif isinstance(v, XOSValuation):
        out["clauses"] = [[frac_str(w) for w in c] for c in v.clauses]
    elif isinstance(v, TableValuation):
        out["table"] = {str(mask): frac_str(x) for mask, x in enumerate(v.table) if x}
    elif isinstance(v, BundleMaxValuation):
        out["bundles"] = [sorted(b) for b in v.bundles]
        out["inner_tables"] = [[frac_str(x) for x in t] for t in v.inner_tables]
    elif isinstance(v, OnesValuation):
        out["builtin"] = "ones"
    elif isinstance(v, HalfCapValuation):
        out["builtin"] = "half_cap"
        out["blocks"] = list(v.blocks)
    elif isinstance(v, MaxBlockThirdsValuation):
        out["builtin"] = "max_block_thirds"
        out["blocks"] = list(v.blocks)
    elif isinstance(v, BudgetAdditiveValuation):
        out["builtin"] = "budget_additive"
        out["weights"] = [frac_str(w) for w in v.weights]
        out["cap"] = frac_str(v.cap)
    elif isinstance(v, CoverageValuation):
        out["builtin"] = "coverage"
        out["covers"] = list(v.covers)
    else:
        raise ValueError(f"cannot serialize valuation of type {type(v).__name__}")
    return out


def agent_from_json(obj: dict, m: int) -> ValuationOracle:
    declared = obj.get("class", "unknown")
    builtin = obj.get("builtin")
    if builtin == "ones":
        return OnesValuation(m)
    if builtin == "half_cap":
        return HalfCapValuation(m, obj["blocks"])
    if builtin == "max_block_thirds":
        return MaxBlockThirdsValuation(m, obj["blocks"])
    if builtin == "budget_additive":
        return BudgetAdditiveValuation(
            [parse_frac(w) for w in obj["weights"]], parse_frac(obj["cap"])
        )
    if builtin == "coverage":
        return CoverageValuation(m, obj["covers"])
    if builtin is not None:
        raise ValueError(f"unknown builtin agent spec {builtin!r}")
    if "weights" in obj:
        return AdditiveValuation([parse_frac(w) for w in obj["weights"]])
    if "clauses" in obj:
        return XOSValuation([[parse_frac(w) for w in c] for c in obj["clauses"]])
    if "table" in obj:
        table = [Fraction(0)] * (1 << m)
        for mask, x in obj["table"].items():
            table[int(mask)] = parse_frac(x)
        return TableValuation(m, table, declared_class=declared)
    if "bundles" in obj:
        return BundleMaxValuation(
            m,
            [ItemSet.of(m, b) for b in obj["bundles"]],
            [[parse_frac(x) for x in t] for t in obj["inner_tables"]],
            declared_class=declared,
        )
    raise ValueError("agent spec needs weights, clauses, table, bundles or builtin")


def instance_to_json(inst: Instance) -> dict:
    return {
        "label": inst.label,
        "m": inst.m,
        "agents": [agent_to_json(v) for v in inst.agents],
    }


def instance_from_json(obj: dict) -> Instance:
    m = int(obj["m"])
    agents = tuple(agent_from_json(a, m) for a in obj["agents"])
    return Instance(m, agents, label=obj.get("label", ""))


BUILTIN_INSTANCES = {
    "submodular_6": lambda args: instance_submodular_6(),
    "grid27": lambda args: instance_27(parse_frac(args[0])) if args else instance_27(),
    "421": lambda args: instance_421(),
    "half_cap": lambda args: instance_half_cap([int(x) for x in args]),
    "n_minus_1": lambda args: instance_n_minus_1(int(args[0])),
    "floor_n3": lambda args: instance_floor_n3(int(args[0])),
}


def load_instance(name: str) -> Instance:
    """A path to a JSON instance file, or a builtin name like half_cap:2,2,2."""
    path = Path(name)
    if path.exists():
        return instance_from_json(json.loads(path.read_text()))
    base, _, argstr = name.partition(":")
    if base in BUILTIN_INSTANCES:
        args = [a for a in argstr.split(",") if a] if argstr else []
        return BUILTIN_INSTANCES[base](args)
    raise ValueError(f"no such file or builtin instance: {name!r}")


# --- certificate (de)serialization -------------------------------------------


def certificate_to_json(cert: ProtocolCertificate, inst: Instance) -> dict:
    return {
        "label": inst.label,
        "m": inst.m,
        "alpha": [frac_str(a) for a in cert.alpha],
        "partitions": [[sorted(part) for part in p.parts] for p in cert.partitions],
        "allocation": [sorted(b) for b in cert.allocation],
        "trace": list(cert.trace),
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def certificate_from_json(obj: dict, m: int):
    alpha = [parse_frac(a) for a in obj["alpha"]]
    allocation = Allocation(tuple(ItemSet.of(m, b) for b in obj["allocation"]))
    partitions = [Partition.of(m, *[list(part) for part in p]) for p in obj["partitions"]]
    return allocation, alpha, partitions


# --- helpers ------------------------------------------------------------------


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _parse_frac_list(text: str) -> list[Fraction]:
    return [parse_frac(x) for x in text.split(",") if x]


def _emit(payload: dict, text_lines: list[str], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(canonical_json(payload))
    else:
        for line in text_lines:
            print(line)


def _budget(args) -> SearchBudget:
    jobs = args.jobs or int(os.environ.get("MMSLAB_JOBS", "1"))
    return SearchBudget(
        max_assignments=args.max_assignments,
        mms_states=args.max_states,
        parallel_width=jobs,
    )


# --- commands -----------------------------------------------------------------


def cmd_mms(args) -> int:
    inst = load_instance(args.instance)
    if not (0 <= args.agent < inst.n):
        raise ValueError(f"agent index {args.agent} outside 0..{inst.n - 1}")
    try:
        result = mms_value(
            inst.agents[args.agent], inst.ground(), args.d, max_states=args.max_states
        )
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    witness = [sorted(part) for part in result.witness.parts]
    _emit(
        {"value": frac_str(result.value), "witness": witness},
        [f"{frac_str(result.value)} : {result.witness}"],
        args.format,
    )
    return EXIT_OK


def _load_partitions(path: str, m: int, n: int):
    data = json.loads(Path(path).read_text())
    if len(data) != n:
        raise ValueError(f"partitions file has {len(data)} entries for {n} agents")
    return tuple(Partition.of(m, *[list(part) for part in p]) for p in data)


def _solve(inst: Instance, mode: str, d, partitions, max_states: int):
    if inst.n == 2:
        if max(d) < 2:
            return ImpossibilityReference(
                "n_minus_1", "both agents demand a single part"
            )
        proposer = 1 if d[1] >= d[0] else 0
        picker = 1 - proposer
        if partitions is not None:
            p_t = partitions[proposer]
        else:
            p_t = mms_value(
                inst.agents[proposer], inst.ground(), 2, max_states=max_states
            ).witness
        cert = cut_and_choose_two(inst.agents[picker], inst.agents[proposer], p_t)
        if proposer == 0:  # protocol fixes (picker, proposer) order; swap back
            bundles = (cert.allocation[1], cert.allocation[0])
            alpha = (cert.alpha[1], cert.alpha[0])
            parts = (cert.partitions[1], cert.partitions[0])
            cert = ProtocolCertificate(Allocation(bundles), alpha, parts, cert.trace)
            if not cert.verify(inst).ok:
                raise AssertionError("internal: swapped certificate failed")
        return cert
    if inst.n == 3:
        return dispatch_three(inst, mode, d, partitions=partitions, max_states=max_states)
    if inst.n == 4:
        order = sorted(range(4), key=lambda i: (d[i], i))
        counts_sorted = (3, 3, 4, 4)
        for pos, agent in enumerate(order):
            if d[agent] < counts_sorted[pos]:
                raise ValueError(
                    f"four-agent demands {tuple(d)} not covered: need two agents "
                    "with at least 3 parts and two with at least 4"
                )
        perm_inst = Instance(inst.m, tuple(inst.agents[i] for i in order), label=inst.label)
        if partitions is None:
            perm_parts = tuple(
                mms_value(
                    perm_inst.agents[pos], inst.ground(), counts_sorted[pos],
                    max_states=max_states,
                ).witness
                for pos in range(4)
            )
        else:
            perm_parts = tuple(partitions[i] for i in order)
        cert = four_agents_3344(perm_inst, perm_parts)
        inverse = [0] * 4
        for pos, agent in enumerate(order):
            inverse[agent] = pos
        bundles = tuple(cert.allocation[inverse[i]] for i in range(4))
        alpha = tuple(cert.alpha[inverse[i]] for i in range(4))
        parts = tuple(cert.partitions[inverse[i]] for i in range(4))
        trace = ({"step": "dispatch", "protocol": "3344", "agent_order": order},) + cert.trace
        out = ProtocolCertificate(Allocation(bundles), alpha, parts, trace)
        if not out.verify(inst).ok:
            raise AssertionError("internal: permuted certificate failed")
        return out
    # n >= 5: only the two-types protocol is available
    distinct: list[ValuationOracle] = []
    for v in inst.agents:
        if not any(v == u for u in distinct):
            distinct.append(v)
    if len(distinct) > 2:
        raise ValueError(
            f"no protocol covers {inst.n} agents with {len(distinct)} distinct valuations"
        )
    if min(d) < inst.n:
        raise ValueError(
            f"{inst.n}-agent two-types protocol needs every demand >= {inst.n}"
        )
    v_s = distinct[0]
    v_t = distinct[1] if len(distinct) > 1 else distinct[0]
    types = tuple("S" if v == v_s else "T" for v in inst.agents)
    if partitions is not None:
        p_s = partitions[types.index("S")]
        p_t = partitions[types.index("T")] if "T" in types else p_s
    else:
        p_s = mms_value(v_s, inst.ground(), inst.n, max_states=max_states).witness
        p_t = (
            mms_value(v_t, inst.ground(), inst.n, max_states=max_states).witness
            if "T" in types
            else p_s
        )
    return two_types(inst.n, v_s, v_t, types, p_s, p_t)


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    d = _parse_int_list(args.d)
    if len(d) != inst.n:
        raise ValueError(f"demand vector has {len(d)} entries for {inst.n} agents")
    partitions = (
        _load_partitions(args.partitions, inst.m, inst.n) if args.partitions else None
    )
    try:
        result = _solve(inst, args.alpha, d, partitions, args.max_states)
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if isinstance(result, ImpossibilityReference):
        print(f"impossible: family {result.family} ({result.detail})", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    payload = certificate_to_json(result, inst)
    text = canonical_json(payload)
    if args.out:
        Path(args.out).write_text(text)
        print(f"certificate written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    obj = json.loads(Path(args.certificate).read_text())
    allocation, alpha, partitions = certificate_from_json(obj, inst.m)
    try:
        result = verify_alpha_mms_P(allocation, inst, alpha, partitions)
    except ValueError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if result.ok:
        _emit(
            {"ok": True, "margins": [frac_str(x) for x in result.margins]},
            ["ok: all margins nonnegative"]
            + [f"  agent {i}: margin {frac_str(x)}" for i, x in enumerate(result.margins)],
            args.format,
        )
        return EXIT_OK
    bad = result.first_violation()
    print(
        f"verification failed: agent {bad} margin {frac_str(result.margins[bad])}",
        file=sys.stderr,
    )
    return EXIT_VERIFY


def cmd_check_class(args) -> int:
    inst = load_instance(args.instance)
    rows = []
    for i, v in enumerate(inst.agents):
        entry = {"agent": i, "declared": v.declared_class}
        mono = is_monotone(v)
        entry["monotone"] = mono.ok
        entry["monotone_mode"] = mono.mode
        sub = is_subadditive(v)
        entry["subadditive"] = sub.ok
        entry["subadditive_mode"] = sub.mode
        if v.m <= 13:
            entry["submodular"] = is_submodular(v).ok
        rows.append(entry)
    lines = []
    for e in rows:
        bits = [f"monotone: {str(e['monotone']).lower()} ({e['monotone_mode']})",
                f"subadditive: {str(e['subadditive']).lower()} ({e['subadditive_mode']})"]
        if "submodular" in e:
            bits.append(f"submodular: {str(e['submodular']).lower()}")
        lines.append(f"agent {e['agent']} (declared {e['declared']}): " + "; ".join(bits))
    _emit({"agents": rows}, lines, args.format)
    return EXIT_OK


def cmd_counterexamples(args) -> int:
    rows = counterexample_suite()
    width = max(len(name) for name, _, _ in rows)
    lines = []
    for name, ok, detail in rows:
        lines.append(f"{name:<{width}}  {'pass' if ok else 'FAIL'}  {detail}")
    payload = {"rows": [{"name": n, "ok": ok, "detail": d} for n, ok, d in rows]}
    _emit(payload, lines, args.format)
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_VERIFY


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    d = _parse_int_list(args.d)
    budget = _budget(args)
    if args.best_alpha:
        result = best_alpha(inst, d, budget=budget)
        if result.status == "refused":
            print(f"refused: {result.reason}", file=sys.stderr)
            return EXIT_BUDGET
        value = "unbounded" if result.value is None else frac_str(result.value)
        witness = [sorted(b) for b in result.witness]
        _emit(
            {"best_alpha": value, "witness": witness, "visited": result.visited},
            [f"best alpha: {value}", f"witness: {result.witness}",
             f"visited: {result.visited} of {result.space}"],
            args.format,
        )
        return EXIT_OK
    if not args.alpha:
        raise ValueError("oracle needs --alpha unless --best-alpha is given")
    alpha = _parse_frac_list(args.alpha)
    result = exists_alpha_mms(inst, alpha, d, budget=budget)
    if result.status == "refused":
        print(f"refused: {result.reason}", file=sys.stderr)
        return EXIT_BUDGET
    if result.status == "exists":
        _emit(
            {"exists": True, "witness": [sorted(b) for b in result.witness],
             "visited": result.visited},
            [f"exists: {result.witness} (visited {result.visited})"],
            args.format,
        )
        return EXIT_OK
    _emit(
        {"exists": False, "visited": result.visited, "space": result.space,
         "pruned": result.pruned},
        [f"not exists: exhausted {result.visited} states "
         f"(space {result.space}, discard branch pruned {result.pruned})"],
        args.format,
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmslab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker hint (also MMSLAB_JOBS); runs are deterministic")
        p.add_argument("--max-states", type=int, default=5**14,
                       help="cap on the d^m partition search space")
        p.add_argument("--max-assignments", type=int, default=10_000_000,
                       help="cap on the brute-force assignment space")

    p = sub.add_parser("mms", help="exact max-min value for one agent")
    p.add_argument("instance")
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("solve", help="run the matching protocol, emit a certificate")
    p.add_argument("instance")
    p.add_argument("--alpha", choices=("uniform-half", "one-half-half"),
                   default="uniform-half")
    p.add_argument("--d", required=True, help="comma-separated demands, e.g. 3,2,2")
    p.add_argument("--partitions", help="JSON file with one partition per agent")
    p.add_argument("--out", help="write the certificate here instead of stdout")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-check a certificate")
    p.add_argument("instance")
    p.add_argument("certificate")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check-class", help="monotonicity and hierarchy checks")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_check_class)

    p = sub.add_parser("counterexamples", help="run the impossibility suite")
    p.add_argument("--all", action="store_true", default=True)
    common(p)
    p.set_defaults(func=cmd_counterexamples)

    p = sub.add_parser("oracle", help="brute-force existence / best-ratio search")
    p.add_argument("instance")
    p.add_argument("--d", required=True)
    p.add_argument("--alpha", help="comma-separated thresholds, e.g. 1/2,1/2,1/2")
    p.add_argument("--best-alpha", action="store_true")
    common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
