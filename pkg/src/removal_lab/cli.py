"""Batch experiment runner.

Every subcommand writes ``<out>/<command>.json`` (and a CSV table where one
makes sense) and prints a one-line summary.  The output directory is
``--out``, else ``$REMOVAL_LAB_OUT``, else ``./removal_lab_out``.

Exit status: 0 success, 1 internal consistency failure, 2 validation error,
3 capacity or budget error, 64 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import constructions, exponents, oracle, procedures
from .errors import CapacityError, InvariantError, ParseError, ValidationError
from .formats import ExperimentRecord, as_system, read_instance, write_csv, write_instance
from .fpn import GroupParams, PointSet
from .triangles import (
    ROLES,
    MatchedTriples,
    TripleSystem,
    count_naive,
    count_transform,
    degree_profile,
    verify_matching,
)

EXIT_OK, EXIT_INVARIANT, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_USAGE = 0, 1, 2, 3, 64
DEFAULT_OUT = "removal_lab_out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Context:
    def __init__(self, args):
        self.args = args
        self.out = Path(args.out or os.environ.get("REMOVAL_LAB_OUT") or DEFAULT_OUT)
        self.start = time.monotonic()
        self.csv_path = None
        self.files = []

    def record(self, params: dict, outputs: dict) -> ExperimentRecord:
        ms = int((time.monotonic() - self.start) * 1000)
        return ExperimentRecord(self.args.command, self.args.seed, params, outputs, ms)

    def csv(self, header, rows):
        self.csv_path = write_csv(self.out / f"{self.args.name or self.args.command}.csv", header, rows)


def _load(path) -> TripleSystem | MatchedTriples:
    return read_instance(path)


def _load_system(path) -> TripleSystem:
    return as_system(_load(path))


def _load_matched(path) -> MatchedTriples:
    obj = _load(path)
    if not isinstance(obj, MatchedTriples):
        raise ValidationError(f"{path} holds a triple system, not a matched collection")
    return obj


def _budget(args) -> oracle.OracleBudget:
    return oracle.OracleBudget(max_nodes=args.max_nodes, max_seconds=args.max_seconds)


def _random_system(params: GroupParams, density: float, rng) -> TripleSystem:
    return TripleSystem(params, *(PointSet(params, rng.random(params.N) < density) for _ in range(3)))


# --- subcommands -----------------------------------------------------------


def cmd_exponents(ctx, a):
    rows, out = [], {}
    for p in a.p:
        t = exponents.solve_exponent(p, a.tol)
        sched = exponents.build_prune_schedule(p)
        entry = {
            "c_p": t.c_p, "C_p": t.C_p, "x_star": t.x_star, "h_star": t.h_star,
            "a": t.a, "b": t.b, "a_p_log2": -sched.a_exp,
        }
        if p in (2, 3):
            cf = exponents.closed_form(p)
            entry["closed_form_c_p"] = cf.c_p
            entry["closed_form_gap"] = abs(cf.c_p - t.c_p)
        if a.eps is not None:
            entry["delta_lower_bound"] = exponents.delta_lower_bound(p, a.eps)
        out[str(p)] = entry
        rows.append([p, t.c_p, t.C_p, t.x_star, t.h_star, -sched.a_exp])
    ctx.csv(["p", "c_p", "C_p", "x_star", "h_star", "a_p_log2"], rows)
    if len(a.p) == 1:
        out.update(out.pop(str(a.p[0])))
    summary = "; ".join(f"p={r[0]} c_p={r[1]:.6f} C_p={r[2]:.6f}" for r in rows)
    return {"p": a.p, "tol": a.tol, "eps": a.eps}, out, summary


def cmd_count(ctx, a):
    sys_ = _load_system(a.instance)
    out = {}
    if a.method in ("naive", "both"):
        out["count_naive"] = count_naive(sys_)
    if a.method in ("transform", "both"):
        out["count_transform"] = count_transform(sys_)
    if a.method == "both" and out["count_naive"] != out["count_transform"]:
        raise InvariantError(f"naive {out['count_naive']} != transform {out['count_transform']}")
    T = next(iter(out.values()))
    out["count"] = T
    out["delta"] = Fraction(T, sys_.params.N ** 2)
    return {"instance": a.instance, "method": a.method}, out, f"triangles={T}"


def cmd_degrees(ctx, a):
    sys_ = _load_system(a.instance)
    st = degree_profile(sys_, a.method)
    rows = []
    for r, s in zip(ROLES, sys_.sets):
        deg = st.degrees(r)
        rows += [[r, int(u), int(deg[u])] for u in s.members]
    ctx.csv(["role", "point", "degree"], rows)
    out = {"count": st.total, "delta": st.delta, "max_degree": st.max_degree, "rho": st.rho}
    return {"instance": a.instance, "method": a.method}, out, f"triangles={st.total} max_degree={st.max_degree}"


def cmd_construct(ctx, a):
    params = GroupParams(a.p, a.n)
    rng = np.random.default_rng(a.seed)
    if a.kind == "random":
        obj = _random_system(params, a.density, rng)
    elif a.kind == "full":
        obj = TripleSystem(params, *(PointSet.full(params) for _ in range(3)))
    elif a.kind == "random-matched":
        obj = constructions.random_matched(params, a.m, rng)
    elif a.kind == "oracle-matched":
        res = oracle.max_matched_exact(a.p, a.n, _budget(a))
        obj = res.collection
    else:
        raise ValidationError(f"unknown kind {a.kind}")
    path = write_instance(a.output or ctx.out / f"{a.kind}-p{a.p}-n{a.n}.txt", obj)
    ctx.files.append(path)
    out = {"file": str(path), "kind": a.kind}
    if isinstance(obj, MatchedTriples):
        out["m"] = obj.m
        out["matching"] = verify_matching(obj)
    else:
        out["sizes"] = [s.size for s in obj.sets]
    params_out = {"kind": a.kind, "p": a.p, "n": a.n, "density": a.density, "m": a.m}
    return params_out, out, f"wrote {path}"


def cmd_lift(ctx, a):
    mt = _load_matched(a.matched)
    lifted = constructions.lift_plus_two(mt)
    inv = constructions.lift_invariants(lifted)
    before = count_naive(mt.system())
    inv["count_before"] = before
    inv["count_preserved"] = before == inv["triangles"]
    if a.output:
        ctx.files.append(write_instance(a.output, lifted))
    ok = inv["disjoint"] and inv["pairwise_independent"] and inv["one_triangle_per_plane"] and inv["count_preserved"]
    if not ok:
        raise InvariantError(f"lifted collection violates an invariant: {inv}")
    return {"matched": a.matched}, inv, f"lifted n={lifted.params.n} triangles={inv['triangles']}"


def cmd_tensor(ctx, a):
    obj = _load(a.instance)
    out = {}
    if isinstance(obj, MatchedTriples):
        power = constructions.tensor_power_matched(obj, a.k)
        out["m"] = power.m
        out["matching"] = verify_matching(power)
        if a.output:
            ctx.files.append(write_instance(a.output, power))
        obj = obj.system()
    audit = procedures.amplification_audit(obj, a.k)
    ctx.csv(["k", "count"], audit)
    out["counts"] = [c for _, c in audit]
    return {"instance": a.instance, "k": a.k}, out, f"counts={out['counts']}"


def cmd_blowup(ctx, a):
    mt = _load_matched(a.matched)
    b = constructions.product_blowup(mt, a.l)
    out = {
        "n": b.params.n, "m": mt.m,
        "formula_count": b.triangle_count, "formula_deletion": b.deletion_number,
        "epsilon": b.epsilon, "delta": b.delta, "materialized": b.system is not None,
    }
    if b.system is not None:
        out["count"] = b.counted()
        if out["count"] != b.triangle_count:
            raise InvariantError("blow-up count differs from m p^(2l)")
        if a.oracle:
            res = oracle.min_deletion_exact(b.system, _budget(a))
            out["min_deletion"] = res.value
            out["oracle_status"] = res.status.value
        if a.output:
            ctx.files.append(write_instance(a.output, b.system))
    return {"matched": a.matched, "l": a.l}, out, f"count={b.triangle_count} deletion={b.deletion_number}"


def cmd_greedy(ctx, a):
    sys_ = _load_system(a.instance)
    mt = procedures.greedy_disjoint(sys_)
    if a.output:
        ctx.files.append(write_instance(a.output, mt))
    rest = count_naive(sys_.without(procedures.matched_deletions(mt)))
    ctx.csv(["x", "y", "z"], [tuple(t) for t in mt.triples])
    return {"instance": a.instance}, {"size": mt.m, "remaining_after_deletion": rest}, f"greedy size={mt.m}"


def cmd_prune(ctx, a):
    sys_ = _load_system(a.instance)
    trace = procedures.prune_high_degree(sys_, a.eps)
    ctx.csv(["step", "role", "point", "degree", "threshold", "delta_after"],
            [[i, s.role, s.point, s.degree, s.threshold, s.delta_after] for i, s in enumerate(trace.steps)])
    out = {
        "removed": trace.removed,
        "removal_bound": procedures.pruning_removal_bound(sys_, a.eps),
        "final_count": count_naive(trace.final_system),
        "final_threshold": trace.final_threshold,
    }
    return {"instance": a.instance, "eps": a.eps}, out, f"removed={trace.removed}"


def cmd_subspace_sim(ctx, a):
    sys_ = _load_system(a.instance)
    d = a.d
    if d is None:
        d = procedures.choose_dimension(sys_.params.p, degree_profile(sys_).rho)
    r = procedures.subspace_experiment(sys_, d, a.trials, a.seed, threads=a.threads)
    out = dict(r.__dict__)
    return ({"instance": a.instance, "d": d, "trials": a.trials}, out,
            f"d={d} mean_good={r.mean_good_t:.6g} good_fraction={r.good_fraction_given_survival:.6g}")


def cmd_oracle_mindel(ctx, a):
    sys_ = _load_system(a.instance)
    res = oracle.min_deletion_exact(sys_, _budget(a))
    ctx.csv(["role", "point"], list(res.deletions))
    out = {"status": res.status.value, "min_deletion": res.value, "lower": res.lower,
           "upper": res.upper, "nodes": res.nodes}
    return {"instance": a.instance}, out, f"min_deletion={res.value} status={res.status.value}"


def cmd_oracle_maxmatch(ctx, a):
    res = oracle.max_matched_exact(a.p, a.n, _budget(a), use_cap=not a.no_cap)
    if a.output:
        ctx.files.append(write_instance(a.output, res.collection))
    out = {"status": res.status.value, "m": res.m, "cap": res.cap, "nodes": res.nodes,
           "matching": res.collection.cross_free_verified,
           "triples": [list(t) for t in res.collection.triples]}
    return {"p": a.p, "n": a.n, "use_cap": not a.no_cap}, out, f"m={res.m} status={res.status.value}"


def cmd_audit(ctx, a):
    rng = np.random.default_rng(a.seed)
    budget = _budget(a)
    rows, violations, skipped = [], 0, 0
    for i in range(a.instances):
        p = a.p[i % len(a.p)]
        params = GroupParams(p, a.n if a.n is not None else int(rng.integers(1, _max_n(p) + 1)))
        sys_ = _random_system(params, float(rng.uniform(0.1, 0.9)), rng)
        if a.kind == "removal-bound":
            r = oracle.removal_bound_audit(sys_, budget)
            if r.status == "skipped":
                skipped += 1
            elif not r.holds:
                violations += 1
            rows.append([i, p, params.n, r.triangles, r.min_deletion, r.rhs, r.holds])
        elif a.kind == "sandwich":
            s = len(procedures.greedy_disjoint(sys_))
            res = oracle.min_deletion_exact(sys_, budget)
            ok = res.exact and s <= res.value <= 3 * s
            skipped += not res.exact
            violations += res.exact and not ok
            rows.append([i, p, params.n, s, res.value, ok])
        else:
            counts = procedures.amplification_audit(sys_, a.kmax)
            rows.append([i, p, params.n] + [c for _, c in counts])
    header = {
        "removal-bound": ["instance", "p", "n", "triangles", "min_deletion", "rhs", "holds"],
        "sandwich": ["instance", "p", "n", "greedy", "min_deletion", "holds"],
        "amplification": ["instance", "p", "n"] + [f"count_k{k}" for k in range(1, a.kmax + 1)],
    }[a.kind]
    ctx.csv(header, rows)
    out = {"instances": a.instances, "violations": violations, "skipped": skipped}
    return ({"kind": a.kind, "p": a.p, "n": a.n, "instances": a.instances}, out,
            f"{a.kind}: {a.instances} instances, {violations} violations, {skipped} skipped")


def _max_n(p: int) -> int:
    """Largest n with p^n <= 32."""
    n = 0
    while p ** (n + 1) <= 32:
        n += 1
    return n


def cmd_frontier(ctx, a):
    if a.matched:
        base = _load_matched(a.matched)
    else:
        res = oracle.max_matched_exact(a.p, a.base_n, _budget(a))
        base = res.collection
    pts = constructions.family_curve([base], a.kmax)
    C = exponents.solve_exponent(base.params.p).C_p
    ctx.csv(["nk", "m_k", "epsilon", "delta", "exponent"], [[f.n, f.m, f.epsilon, f.delta, f.exponent] for f in pts])
    expos = [f.exponent for f in pts]
    out = {"base_m": base.m, "base_n": base.params.n, "C_p": C, "exponents": expos,
           "constant": len(set(expos)) <= 1, "below_C_p": all(e <= C + 1e-6 for e in expos)}
    return {"p": base.params.p, "base_n": base.params.n, "kmax": a.kmax}, out, f"m={base.m} exponent={expos[0] if expos else None}"


# --- parser ----------------------------------------------------------------


def _common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--name", default=None, help="basename for emitted files")
    sp.add_argument("--config", default=None, help="key=value file; flags win")
    sp.add_argument("--threads", type=int, default=1)


def _budget_args(sp, nodes=10**7):
    sp.add_argument("--max-nodes", type=int, default=nodes)
    sp.add_argument("--max-seconds", type=float, default=600.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="removal-lab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        _common(sp)
        sp.set_defaults(func=fn)
        return sp

    sp = add("exponents", cmd_exponents, "c_p, C_p and the pruning schedule")
    sp.add_argument("--p", type=int, nargs="+", required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--eps", type=float, default=None)

    sp = add("count", cmd_count, "count triangles of an instance")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--method", choices=["naive", "transform", "both"], default="both")

    sp = add("degrees", cmd_degrees, "per-point triangle degrees")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--method", choices=["auto", "naive", "transform"], default="auto")

    sp = add("construct", cmd_construct, "generate an instance file")
    sp.add_argument("--kind", choices=["random", "full", "random-matched", "oracle-matched"], required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--density", type=float, default=0.5)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--output", default=None)
    _budget_args(sp)

    sp = add("lift", cmd_lift, "embed a matched collection into F_p^(n+2)")
    sp.add_argument("--matched", required=True)
    sp.add_argument("--output", default=None)

    sp = add("tensor", cmd_tensor, "tensor powers and count multiplicativity")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--output", default=None)

    sp = add("blowup", cmd_blowup, "X x F_p^l product construction")
    sp.add_argument("--matched", required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--oracle", action="store_true", help="also solve the minimum deletion exactly")
    sp.add_argument("--output", default=None)
    _budget_args(sp)

    sp = add("greedy", cmd_greedy, "greedy disjoint triangles")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--output", default=None)

    sp = add("prune", cmd_prune, "high-degree pruning loop")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--eps", type=float, required=True)

    sp = add("subspace-sim", cmd_subspace_sim, "random subspace restriction experiment")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--trials", type=int, default=1000)

    sp = add("oracle-mindel", cmd_oracle_mindel, "exact minimum deletion number")
    sp.add_argument("--instance", required=True)
    _budget_args(sp)

    sp = add("oracle-maxmatch", cmd_oracle_maxmatch, "exact maximum multicolored sum-free collection")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--no-cap", action="store_true", help="do not stop at the theoretical cap")
    sp.add_argument("--output", default=None)
    _budget_args(sp, nodes=10**8)

    sp = add("audit", cmd_audit, "batch audits on seeded random instances")
    sp.add_argument("--kind", choices=["removal-bound", "sandwich", "amplification"], required=True)
    sp.add_argument("--p", type=int, nargs="+", default=[2, 3])
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--instances", type=int, default=100)
    sp.add_argument("--kmax", type=int, default=2)
    _budget_args(sp)

    sp = add("frontier", cmd_frontier, "epsilon-delta curve of tensor-powered blow-ups")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--base-n", type=int, default=2)
    sp.add_argument("--kmax", type=int, default=3)
    sp.add_argument("--matched", default=None)
    _budget_args(sp, nodes=10**8)

    return parser, sub


def read_config(path) -> dict:
    out = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected key=value, got {line!r}", no)
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _config_defaults(sp, cfg: dict) -> dict:
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in cfg.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if action.nargs in ("+", "*"):
            defaults[key] = [action.type(v) for v in raw.replace(",", " ").split()]
        elif isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes")
        else:
            defaults[key] = action.type(raw) if action.type else raw
    return defaults


def parse_args(argv):
    """Parse flags, filling anything not given on the command line from ``--config``."""
    parser, sub = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    command = next((tok for tok in argv if tok in sub.choices), None)
    if known.config and command:
        sp = sub.choices[command]
        defaults = _config_defaults(sp, read_config(known.config))
        sp.set_defaults(**defaults)
        for action in sp._actions:
            if action.dest in defaults:
                action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    ctx = Context(args)
    try:
        params, outputs, summary = args.func(ctx, args)
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantError as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    ctx.out.mkdir(parents=True, exist_ok=True)
    rec = ctx.record(params, outputs)
    path = ctx.out / f"{args.name or args.command}.json"
    path.write_text(rec.to_json())
    print(f"{args.command}: {summary} -> {path}")
    status = outputs.get("status") if isinstance(outputs, dict) else None
    return EXIT_CAPACITY if status == oracle.Status.BUDGET_EXHAUSTED.value else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
