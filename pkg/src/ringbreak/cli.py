"""Experiment runner CLI.

One binary, six experiment subcommands plus `rerun`. Every run emits a JSON
report embedding the resolved experiment config; `rerun --from report.json`
re-executes that config and must reproduce the report byte for byte. Flags
beat config-file values, which beat built-in defaults. Output paths and
worker count are not part of the experiment config. The master seed falls
back to the RINGBREAK_SEED environment variable, then to 1.

Exit codes: 0 success, 1 a checked bound or validation failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Optional

from .coinflip import bias_attack, measure_bias, verify_no_nontrivial_bias
from .compiler import (
    UnsupportedSubcase,
    always_abort_adversary,
    coin_abort_adversary,
    compare_real_ideal,
    enumerate_decisions,
    never_abort_adversary,
    wrap_dominated,
)
from .core import (
    BOT,
    ConfigError,
    JointInput,
    SpecViolation,
    derive_seed,
    outcome_repr,
    validate_spec,
)
from .dominance import (
    FunctionTable,
    and_table,
    classify,
    constant_table,
    dominance_profile,
    or_table,
    pair_and_or_table,
    threshold_table,
    verify_weak_implies_strong,
    xor_table,
)
from .netsim import estimate_consistency, run_with_adversary
from .reports import make_report, write_csv, write_report
from .ring import attack_n_party, attack_ring_size, embedding_family
from .stats import proportion_sigma, wilson_interval
from .zoo import ZOO, make_spec

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def _seed_fallback(value: Optional[int]) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("RINGBREAK_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"RINGBREAK_SEED={env!r} is not an integer")
    return 1


def _builtin_table(selector: str) -> FunctionTable:
    parts = selector.split(":")
    name, params = parts[0], parts[1:]
    try:
        if name == "or":
            return or_table(int(params[0]))
        if name == "and":
            return and_table(int(params[0]))
        if name == "xor":
            return xor_table(int(params[0]))
        if name == "thresh":
            return threshold_table(int(params[1]), int(params[0]))
        if name == "const":
            return constant_table(int(params[1]), int(params[0]))
        if name == "pairs":
            return pair_and_or_table()
    except (IndexError, ValueError):
        raise ConfigError(f"malformed builtin table selector {selector!r}")
    raise ConfigError(f"unknown builtin table {name!r} "
                      "(have or:N, and:N, xor:N, thresh:K:N, const:C:N, pairs)")


def _load_table(cfg: dict) -> FunctionTable:
    """Resolve the table; normalizes cfg so the embedded config is self-contained."""
    if cfg.get("table_data"):
        return FunctionTable.from_json(cfg["table_data"])
    if cfg.get("table"):
        try:
            with open(cfg["table"]) as fh:
                raw = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read table file: {e}")
        table = FunctionTable.from_json(raw)
    elif cfg.get("builtin"):
        table = _builtin_table(cfg["builtin"])
    else:
        raise ConfigError("need --table FILE or --builtin SELECTOR")
    cfg["table_data"] = json.loads(table.to_json())
    cfg["table"] = None
    return table


# ---------------------------------------------------------------- attack

def _attack_chunk(task: tuple) -> dict:
    params, start, count = task
    spec = make_spec(params["protocol"], params["n"])
    corrupt = tuple(params["corrupt"])
    agg: dict = {"success": 0, "ran": 0, "aborts": 0, "y_star": {},
                 "outcomes": {}, "per_party": {}}
    for i in range(start, start + count):
        tseed = derive_seed(params["seed"], "attack-trial", i)
        atk = attack_n_party(spec, params["t"], corrupt, tseed,
                             variant=params["variant"],
                             q_expected=params["q_expected"], z=params["z"])
        if atk.phase1.aborted:
            agg["aborts"] += 1
            continue
        joint = JointInput.sample(spec, derive_seed(tseed, "inputs"))
        res = run_with_adversary(spec, atk.adversary, joint, derive_seed(tseed, "online"))
        y = atk.y_star
        yh = y.hex()
        agg["y_star"][yh] = agg["y_star"].get(yh, 0) + 1
        agg["ran"] += 1
        outs = res.honest_outcomes()
        if all(o == y for o in outs):
            agg["success"] += 1
        for pid, out in zip(res.honest(), outs):
            rep = outcome_repr(out)
            agg["outcomes"][rep] = agg["outcomes"].get(rep, 0) + 1
            per = agg["per_party"].setdefault(str(pid), {})
            per[rep] = per.get(rep, 0) + 1
    return agg


def _merge_counts(dst: dict, src: dict) -> None:
    for k, v in src.items():
        if isinstance(v, dict):
            inner = dst.setdefault(k, {})
            for kk, vv in v.items():
                if isinstance(vv, dict):
                    deep = inner.setdefault(kk, {})
                    for k3, v3 in vv.items():
                        deep[k3] = deep.get(k3, 0) + v3
                else:
                    inner[kk] = inner.get(kk, 0) + vv
        else:
            dst[k] = dst.get(k, 0) + v


def _pmap(fn, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def _require_protocol(cfg: dict) -> str:
    if not cfg.get("protocol"):
        raise ConfigError("need --protocol (a zoo selector like echo_xor:2)")
    return cfg["protocol"]


def cmd_attack(cfg: dict, jobs: int = 1):
    spec = make_spec(_require_protocol(cfg), cfg["n"])
    n, t = cfg["n"], cfg["t"]
    if t is None:
        raise ConfigError("attack needs --t")
    s = 1 if 2 * t >= n else n - 2 * t
    corrupt = cfg["corrupt"] if cfg["corrupt"] is not None else list(range(n - s, n))
    cfg["corrupt"] = list(corrupt)
    trials = cfg["trials"]
    if trials < 1:
        raise ConfigError("need at least one trial")
    params = {"protocol": cfg["protocol"], "n": n, "t": t, "corrupt": list(corrupt),
              "variant": cfg["variant"], "q_expected": cfg["q_expected"], "z": cfg["z"],
              "seed": cfg["seed"]}

    chunk = max(1, math.ceil(trials / max(1, jobs * 4)))
    tasks = [(params, lo, min(chunk, trials - lo)) for lo in range(0, trials, chunk)]
    agg: dict = {}
    for part in _pmap(_attack_chunk, tasks, jobs):
        _merge_counts(agg, part)
    success, ran, aborts = agg.get("success", 0), agg.get("ran", 0), agg.get("aborts", 0)

    probe = attack_n_party(spec, t, tuple(corrupt), derive_seed(cfg["seed"], "attack-trial", 0),
                           variant=cfg["variant"], q_expected=cfg["q_expected"], z=cfg["z"])
    m, q, pstar = probe.phase1.m, probe.fused_spec.q, probe.phase1.pstar

    delta_trials = cfg["delta_trials"]
    if delta_trials is None:
        delta_trials = max(100, trials // (2 * m))
    consistency = estimate_consistency(
        probe.fused_spec, embedding_family(probe.fused_spec, m),
        delta_trials, derive_seed(cfg["seed"], "delta"))
    delta_hat = consistency.delta_hat

    rate = success / ran if ran else 0.0
    lo, hi = wilson_interval(success, ran) if ran else (0.0, 1.0)
    sigma3 = 3 * proportion_sigma(success, ran) if ran else 1.0
    bound = 1.0 - (1.5 * m + 1.0) * delta_hat - sigma3
    holds = rate >= bound
    code = EXIT_OK if holds else EXIT_FAIL

    body: dict = {
        "protocol": spec.name,
        "n": n, "t": t, "s": s, "m": m, "q": q, "pstar": pstar,
        "corrupted": list(corrupt),
        "trials": trials,
        "ran": ran,
        "success": success,
        "success_rate": rate,
        "success_ci": [lo, hi],
        "delta_hat": delta_hat,
        "delta_ci": [consistency.ci_low, consistency.ci_high],
        "delta_trials_per_adversary": delta_trials,
        "bound": bound,
        "bound_holds": holds,
        "inconclusive": bound <= 0.0,
        "y_star": max(agg.get("y_star", {"": 0}), key=lambda k: (agg["y_star"].get(k, 0), k))
                  if agg.get("y_star") else None,
        "y_star_histogram": dict(sorted(agg.get("y_star", {}).items())),
        "outcome_histogram": dict(sorted(agg.get("outcomes", {}).items())),
        "per_party_outputs": {k: dict(sorted(v.items()))
                              for k, v in sorted(agg.get("per_party", {}).items())},
    }
    if cfg["variant"] == "expected":
        abort_rate = aborts / trials
        asigma3 = 3 * proportion_sigma(aborts, trials)
        abort_bound = 2.0 ** (-cfg["z"]) + asigma3
        body.update({"aborts": aborts, "abort_rate": abort_rate,
                     "abort_bound": abort_bound, "abort_ok": abort_rate <= abort_bound})
        if not body["abort_ok"]:
            code = EXIT_FAIL
    csv_rows = ("outcome,count", [(k, v) for k, v in sorted(agg.get("outcomes", {}).items())])
    return body, code, csv_rows


# ------------------------------------------------------------- dominance

def cmd_dominance(cfg: dict, jobs: int = 1):
    table = _load_table(cfg)
    profile = dominance_profile(table, budget=cfg["budget"])
    body: dict = {
        "table_name": table.name,
        "n": table.n,
        "domains": list(table.domains),
        "profile": profile.rows(),
        "minimal_strong_k": profile.minimal_strong_k,
    }
    code = EXIT_OK
    if cfg["t"] is not None:
        verdict = classify(table, table.n, cfg["t"])
        body["classification"] = {
            "verdict": verdict.verdict, "n": verdict.n, "t": verdict.t, "k": verdict.k,
            "dominated": verdict.dominated, "y_star": verdict.y_star,
            "reason": verdict.reason,
        }
    if cfg["collapse_m"] is not None:
        v = verify_weak_implies_strong(table, cfg["collapse_m"])
        body["collapse"] = {
            "m": v.m, "weakly_dominated": v.weakly_dominated,
            "strongly_dominated": v.strongly_dominated, "holds": v.holds,
            "y_star": v.y_star,
        }
        if not v.holds:
            code = EXIT_FAIL
    csv_rows = ("k,weak,strong,y_star",
                [(r["k"], int(r["weak"]), int(r["strong"]), r["y_star"])
                 for r in profile.rows()])
    return body, code, csv_rows


# ------------------------------------------------------------- coinflip

def cmd_coinflip(cfg: dict, jobs: int = 1):
    spec = make_spec(cfg["protocol"], cfg["n"])
    n = cfg["n"]
    want = math.ceil(n / 3)
    corrupt = cfg["corrupt"] if cfg["corrupt"] is not None else list(range(n - want, n))
    cfg["corrupt"] = list(corrupt)
    mode = cfg["mode"]
    code = EXIT_OK
    if mode == "honest":
        rep = measure_bias(spec, None, cfg["trials"], cfg["seed"])
        body = {"mode": mode, "bias": rep.to_json()}
        counts = rep.counts
    elif mode == "attack":
        if cfg["trials"] < 1000:
            raise ConfigError("need at least 1000 trials")
        atk = bias_attack(spec, tuple(corrupt), cfg["kappa"],
                          derive_seed(cfg["seed"], "bias-search"))
        body = {"mode": mode, "kappa": cfg["kappa"], "aborted": atk.aborted,
                "attempts": atk.attempts,
                "y_star": atk.y_star.hex() if atk.y_star is not None else None}
        counts = {}
        if not atk.aborted:
            try:
                rep = measure_bias(spec, atk.adversary, cfg["trials"],
                                   derive_seed(cfg["seed"], "bias-forced"),
                                   forced_value=atk.y_star)
            except ConfigError:
                # adversary broke agreement in every trial; report that
                # instead of failing the whole run
                body["forced"] = None
            else:
                body["forced"] = rep.to_json()
                counts = rep.counts
    elif mode == "verify":
        v = verify_no_nontrivial_bias(spec, cfg["kappa"], cfg["trials"], cfg["seed"],
                                      corrupted=tuple(corrupt),
                                      delta_trials=cfg["delta_trials"])
        body = {"mode": mode, "verdict": v.to_json()}
        counts = v.forced.counts if v.forced is not None else {}
        if v.holds is False:
            code = EXIT_FAIL
    else:
        raise ConfigError(f"unknown coinflip mode {mode!r}")
    csv_rows = ("bucket,count", sorted(counts.items()))
    return body, code, csv_rows


# -------------------------------------------------------------- compile

def _parse_hybrid_adv(selector: str, corrupt: list[int], inputs: list[int]):
    forward = {i: inputs[i] for i in corrupt}
    if selector == "never":
        return never_abort_adversary(corrupt, forward)
    if selector == "abort":
        return always_abort_adversary(corrupt)
    if selector.startswith("coin:"):
        try:
            p = Fraction(selector.split(":", 1)[1])
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad abort probability in {selector!r}")
        return coin_abort_adversary(corrupt, p, forward)
    raise ConfigError(f"unknown adversary {selector!r} (have never, abort, coin:P)")


def cmd_compile(cfg: dict, jobs: int = 1):
    table = _load_table(cfg)
    n, t = table.n, cfg["t"]
    if t is None:
        raise ConfigError("compile needs --t")
    wrapped = wrap_dominated(table, n, t)
    inputs = cfg["inputs"] if cfg["inputs"] is not None else [0] * n
    cfg["inputs"] = list(inputs)
    if len(inputs) != n:
        raise ConfigError(f"need {n} inputs, got {len(inputs)}")
    corrupt = cfg["corrupt"] if cfg["corrupt"] is not None else list(range(n - t, n))
    cfg["corrupt"] = list(corrupt)
    if len(corrupt) > wrapped.t2:
        raise ConfigError(f"coalition of {len(corrupt)} exceeds t2={wrapped.t2}")
    adv = _parse_hybrid_adv(cfg["adv"], corrupt, inputs)

    # exhaustive sweep: no honest party ever outputs BOT, and every legal
    # abort lands on y*
    from itertools import combinations
    no_bot = True
    abort_forces = True
    for size in range(1, wrapped.t2 + 1):
        for coalition in combinations(range(n), size):
            for decision in enumerate_decisions(wrapped, coalition):
                rec = wrapped.run_decision(inputs, coalition, decision)
                if any(o is BOT for o in rec.honest_outputs):
                    no_bot = False
                if decision.abort and any(o != wrapped.y_star for o in rec.honest_outputs):
                    abort_forces = False

    comparison = compare_real_ideal(table, n, t, adv, inputs, exhaustive=True)
    body: dict = {
        "table_name": table.name,
        "n": n, "t": t, "s": wrapped.s, "t1": wrapped.t1, "t2": wrapped.t2,
        "y_star": wrapped.y_star,
        "adv": cfg["adv"],
        "corrupted": list(corrupt),
        "no_bot": no_bot,
        "abort_forces_y_star": abort_forces,
        "distance_exhaustive": comparison.distance,
        "exact_zero": comparison.exact_zero,
        "real_dist": comparison.real_dist,
        "ideal_dist": comparison.ideal_dist,
    }
    if cfg["mc_trials"]:
        mc = compare_real_ideal(table, n, t, adv, inputs, exhaustive=False,
                                trials=cfg["mc_trials"], seed=cfg["seed"])
        body["distance_mc"] = mc.distance
        body["mc_trials"] = cfg["mc_trials"]
    ok = no_bot and abort_forces and comparison.exact_zero
    return body, EXIT_OK if ok else EXIT_FAIL, None


# ---------------------------------------------------- consistency / validate

def cmd_consistency(cfg: dict, jobs: int = 1):
    spec = make_spec(_require_protocol(cfg), cfg["n"])
    if spec.n != 3:
        raise ConfigError("the embedding family probes 3-party protocols; use --n 3")
    m = cfg["m"] if cfg["m"] is not None else attack_ring_size(spec.q, "strict")
    cfg["m"] = m
    rep = estimate_consistency(spec, embedding_family(spec, m), cfg["trials"], cfg["seed"])
    body = {
        "protocol": spec.name,
        "m": m,
        "trials_per_adversary": cfg["trials"],
        "pooled_trials": rep.pooled_trials,
        "pooled_failures": rep.pooled_failures,
        "delta_hat": rep.delta_hat,
        "delta_ci": [rep.ci_low, rep.ci_high],
        "per_adversary": [
            {"adversary": a.label, "trials": a.trials, "failures": a.failures,
             "delta_hat": a.delta_hat, "ci": [a.ci_low, a.ci_high]}
            for a in rep.per_adversary
        ],
    }
    csv_rows = ("adversary,trials,failures,delta_hat",
                [(a.label, a.trials, a.failures, a.delta_hat) for a in rep.per_adversary])
    return body, EXIT_OK, csv_rows


def cmd_validate(cfg: dict, jobs: int = 1):
    spec = make_spec(_require_protocol(cfg), cfg["n"])
    rep = validate_spec(spec, cfg["trials"], cfg["seed"])
    body = {
        "protocol": spec.name,
        "n": spec.n,
        "declared_rounds": {"kind": spec.round_bound.kind, "q": spec.round_bound.q},
        "trials": cfg["trials"],
        "violations": rep.violations,
        "ok": rep.ok,
        "transcript_hash": rep.transcript_hash,
    }
    return body, EXIT_OK if rep.ok else EXIT_FAIL, None


HANDLERS = {
    "attack": cmd_attack,
    "dominance": cmd_dominance,
    "coinflip": cmd_coinflip,
    "compile": cmd_compile,
    "consistency": cmd_consistency,
    "validate": cmd_validate,
}

SCHEMAS: dict[str, dict[str, Any]] = {
    "attack": {"protocol": None, "n": 3, "t": None, "corrupt": None, "trials": 1000,
               "variant": "strict", "z": 16, "q_expected": None, "delta_trials": None,
               "seed": None},
    "dominance": {"table": None, "builtin": None, "table_data": None, "t": None,
                  "collapse_m": None, "budget": 2 ** 24},
    "coinflip": {"protocol": "fair_coin", "n": 3, "mode": "verify", "kappa": 10,
                 "trials": 10000, "corrupt": None, "delta_trials": None, "seed": None},
    "compile": {"table": None, "builtin": None, "table_data": None, "t": None,
                "adv": "never", "inputs": None, "corrupt": None, "mc_trials": 0,
                "seed": None},
    "consistency": {"protocol": None, "n": 3, "m": None, "trials": 500, "seed": None},
    "validate": {"protocol": None, "n": 3, "trials": 25, "seed": None},
}

SEEDED = {"attack", "coinflip", "compile", "consistency", "validate"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringbreak",
        description="Attack laboratory for broadcast-free multiparty protocols.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags take precedence")
        p.add_argument("--report", help="write the JSON report here (default stdout)")
        p.add_argument("--csv", help="write a CSV summary here")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for trial loops (default 1)")

    p = sub.add_parser("attack", help="run the ring attack and check the success bound")
    p.add_argument("--protocol", help=f"zoo selector, one of: {', '.join(sorted(ZOO))}")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--corrupt", type=_parse_int_list, help="corrupted ids, e.g. 7,8")
    p.add_argument("--trials", type=int)
    p.add_argument("--variant", choices=["strict", "expected"])
    p.add_argument("--z", type=int, help="offline iterations for the expected variant")
    p.add_argument("--q-expected", dest="q_expected", type=int)
    p.add_argument("--delta-trials", dest="delta_trials", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("dominance", help="dominance profile and computability verdict")
    p.add_argument("--table", help="JSON table file")
    p.add_argument("--builtin", help="builtin table selector, e.g. or:3, thresh:2:4, pairs")
    p.add_argument("--t", type=int, help="also classify at this corruption threshold")
    p.add_argument("--collapse-m", dest="collapse_m", type=int,
                   help="also check weak=>strong at this m")
    p.add_argument("--budget", type=int)
    common(p)

    p = sub.add_parser("coinflip", help="bias measurement and the forcing attack")
    p.add_argument("--protocol")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=["honest", "attack", "verify"])
    p.add_argument("--kappa", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--corrupt", type=_parse_int_list)
    p.add_argument("--delta-trials", dest="delta_trials", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("compile", help="wrapper correctness and real-vs-ideal comparison")
    p.add_argument("--table")
    p.add_argument("--builtin")
    p.add_argument("--t", type=int)
    p.add_argument("--adv", help="never | abort | coin:P")
    p.add_argument("--inputs", type=_parse_int_list)
    p.add_argument("--corrupt", type=_parse_int_list)
    p.add_argument("--mc-trials", dest="mc_trials", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("consistency", help="estimate delta under the embedding family")
    p.add_argument("--protocol")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int, help="trials per family member")
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("validate", help="check a zoo protocol against its declared contract")
    p.add_argument("--protocol")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("rerun", help="re-execute a report's embedded config")
    p.add_argument("--from", dest="from_path", required=True, help="existing report JSON")
    common(p)

    return parser


def run_config(kind: str, cfg: dict, jobs: int = 1) -> tuple[dict, int, Any]:
    """Execute one experiment config; returns (report, exit_code, csv payload)."""
    if kind not in HANDLERS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    merged = dict(SCHEMAS[kind])
    merged.update({k: v for k, v in cfg.items() if k in SCHEMAS[kind]})
    unknown = set(cfg) - set(SCHEMAS[kind])
    if unknown:
        raise ConfigError(f"unknown config keys for {kind}: {sorted(unknown)}")
    if kind in SEEDED:
        merged["seed"] = _seed_fallback(merged.get("seed"))
    body, code, csv_payload = HANDLERS[kind](merged, jobs=jobs)
    return make_report(kind, merged, body), code, csv_payload


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cmd == "rerun":
            with open(args.from_path) as fh:
                old = json.load(fh)
            if "kind" not in old or "config" not in old:
                raise ConfigError("not a ringbreak report: missing kind/config")
            report, code, csv_payload = run_config(old["kind"], old["config"], jobs=args.jobs)
        else:
            file_cfg = {}
            if args.config:
                try:
                    with open(args.config) as fh:
                        file_cfg = json.load(fh)
                except (OSError, json.JSONDecodeError) as e:
                    raise ConfigError(f"cannot read config file: {e}")
                if not isinstance(file_cfg, dict):
                    raise ConfigError("config file must hold a JSON object")
                stray = set(file_cfg) - set(SCHEMAS[args.cmd])
                if stray:
                    raise ConfigError(
                        f"unknown config keys for {args.cmd}: {sorted(stray)}")
            cfg = {}
            for key in SCHEMAS[args.cmd]:
                flag = getattr(args, key, None)
                if flag is not None:
                    cfg[key] = flag
                elif key in file_cfg:
                    cfg[key] = file_cfg[key]
            report, code, csv_payload = run_config(args.cmd, cfg, jobs=args.jobs)
        data = write_report(report, args.report)
        if not args.report:
            sys.stdout.write(data.decode())
        if args.csv and csv_payload:
            header, rows = csv_payload
            write_csv(args.csv, header.split(","), rows)
        return code
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SpecViolation as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
