"""bridgelab command line: check, demo, experiment, list, params.

Exit codes: 0 when the check passes or the predicted outcome is
reproduced (including attacks and witnesses), 1 when it is not, 2 for
usage errors and unknown ids.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import config, registry
from .bridges import check_bridge_correct, check_complete, compose, halfkey_bridges, is_witness
from .circuits import XOR, BooleanCircuit, enumerate_circuits, random_circuit
from .errors import BridgeLabError, UnknownEntry
from .gentry import (BootstrapScheme, check_fche, check_fche_exhaustive, check_fresh_chain,
                     fche_transform, garbage_witness, squaring_witness)
from .harness import halfkey_attacker, run_bridge_indcpa, run_distinguisher, run_indcpa
from .homomorphic import level_bound, required_log_q
from .serialize import dumps


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    preset: Optional[str]
    seed: Optional[int]
    trials: Optional[int]
    output: Optional[str]
    format: str


def _seed(args, required):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BRIDGELAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"BRIDGELAB_SEED must be an integer, got {env!r}")
    if required:
        raise UsageError("experiments need --seed or BRIDGELAB_SEED")
    return 0


def run_config(args, seed_required=False):
    preset = getattr(args, "preset", None)
    if preset is not None and preset != "trivial":
        config.preset(preset)  # reject unknown presets before any work
    return RunConfig(preset, _seed(args, seed_required), getattr(args, "trials", None),
                     args.output, args.format)


# ---------------------------------------------------------------------------
# output

def _text(obj, prefix=""):
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            key = f"{prefix}{k}"
            if isinstance(v, dict) and v and not _flat(v) or \
                    isinstance(v, list) and any(isinstance(x, dict) for x in v):
                lines.extend(_text(v, key + "."))
            else:
                lines.append(f"{key}: {dumps(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            lines.extend(_text(v, f"{prefix}{i}."))
    else:
        lines.append(f"{prefix.rstrip('.')}: {dumps(obj)}")
    return lines


def _flat(v):
    items = v.values() if isinstance(v, dict) else v
    return all(not isinstance(x, (dict, list)) for x in items)


def emit(report, cfg):
    data = json.loads(dumps(report))
    if cfg.format == "json":
        out = dumps(data, indent=2) + "\n"
    else:
        out = "\n".join(_text(data)) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


# ---------------------------------------------------------------------------
# check

def cmd_check(args, cfg):
    b = registry.bridge(args.bridge, cfg.preset)
    if args.kind == "correct":
        trials = cfg.trials or 10_000
        rate = check_bridge_correct(b, trials, cfg.seed)
        report = {"bridge": b.name, "kind": "correct", "trials": trials,
                  "failures": int(rate * trials), "failure_rate": float(rate),
                  "passed": rate == 0, "seed": cfg.seed, "flags": b.describe()}
        return report, rate == 0
    mode = args.mode or ("exhaustive" if b.source.ciphertext_space.enumerable else "sampled")
    report = check_complete(b, mode, budget=cfg.trials or 1000, seed=cfg.seed, keys=args.keys)
    report["seed"] = cfg.seed
    report["flags"] = b.describe()
    known = registry.known_witnesses(args.bridge, cfg.preset)
    if known:
        report["known_witnesses"] = [{"sk": sk, "ciphertext": raw, "is_witness": is_witness(b, sk, raw)}
                                     for sk, raw in known]
    return report, report["complete"]


# ---------------------------------------------------------------------------
# demos

def demo_halfkey_attack(cfg, args):
    preset = cfg.preset or "lwe-toy"
    base = config.base_scheme(preset)
    f, g = halfkey_bridges(base)
    gf = compose(f, g)
    trials = cfg.trials or 1000
    adv = halfkey_attacker(base)
    parts = {}
    for b in (f, g):
        parts[b.name] = {
            "correct_failure_rate": float(check_bridge_correct(b, trials, cfg.seed)),
            "complete": check_complete(b, "exhaustive", seed=cfg.seed, keys=1)["complete"],
        }
    games = {b.name: run_bridge_indcpa(b, adv, trials, cfg.seed) for b in (gf, f, g)}
    ok = (games[gf.name].advantage == 1
          and all(games[b.name].effective_advantage <= games[b.name].ci for b in (f, g))
          and all(p["correct_failure_rate"] == 0 and p["complete"] for p in parts.values()))
    return {"demo": "halfkey-attack", "base": base.name, "bridges": parts,
            "games": games, "reproduced": ok}, ok


def demo_gentry_complete(cfg, args):
    inner, outer = args.inner or "lwe-n1q4", args.outer or "trivial"
    ident = f"gentry:{inner}:{outer}"
    results = []
    for variant, trivial_bits in (("fold", False), ("encrypt-bits", False), ("encrypt-bits", True)):
        for iota in ("id", "not"):
            b = registry.gentry_from_id(ident, variant, iota, trivial_bits)
            mode = "exhaustive" if b.source.ciphertext_space.enumerable else "sampled"
            rep = check_complete(b, mode, budget=cfg.trials or 200, seed=cfg.seed)
            results.append({"variant": variant, "trivial_bits": trivial_bits, "iota": iota,
                            "noise_bound": b.flags.get("noise_bound"), "mode": mode,
                            "checked": rep["checked"], "complete": rep["complete"],
                            "witness": rep["witness"]})
    ok = all(r["complete"] for r in results)
    return {"demo": "gentry-complete", "inner": inner, "outer": outer,
            "results": results, "reproduced": ok}, ok


def _random_circuits(max_arity, max_gates):
    def sample(rng):
        arity = int(rng.integers(1, max_arity + 1))
        return random_circuit(rng, arity, int(rng.integers(1, max_gates + 1)))
    return sample


def demo_fche(cfg, args):
    backend = args.backend or "trivial"
    h = config.hom_scheme(backend)
    s = fche_transform(h)
    report = {"demo": "fche", "backend": h.name, "flags": s.flags,
              "recrypt_bound": s.recrypt_bound}
    if backend == "trivial":
        circuits = [c for arity in (1, 2, 3) for c in enumerate_circuits(arity, 3)]
        rep = check_fche_exhaustive(s, circuits, seed=cfg.seed)
        report.update(mode="exhaustive", circuits=len(circuits), transform=rep)
        ok = rep["holds"]
    else:
        rep = check_fche(s, _random_circuits(3, 6), cfg.trials or 500, cfg.seed)
        raw = squaring_witness(h, cfg.seed)
        report.update(mode="sampled", transform=rep,
                      raw_witness={k: raw[k] for k in ("found", "steps", "circuit",
                                                       "expected", "got")})
        ok = rep["holds"] and raw["found"]
    report["reproduced"] = ok
    return report, ok


def demo_bootstrap_not_fche(cfg, args):
    h = config.hom_scheme(args.backend or "gsw-fche")
    s = BootstrapScheme(h)
    c1 = BooleanCircuit(4, ((XOR, 0, 1), (XOR, 2, 3)), (4, 5))
    c2 = BooleanCircuit(2, ((XOR, 0, 1),), (2,))
    chain = check_fresh_chain(s, c1, c2, cfg.seed)
    wit = garbage_witness(s, c2, cfg.seed)
    ok = chain["holds"] and wit["found"]
    report = {"demo": "bootstrap-not-fche", "backend": h.name, "flags": s.flags,
              "fresh_chain": chain,
              "witness": {"found": wit["found"], "tries": wit["tries"], "circuit": wit["circuit"],
                          "ciphertexts": [c.value for c in wit["inputs"] or []],
                          "expected": wit.get("expected"), "got": wit.get("got")},
              "reproduced": ok}
    return report, ok


DEMOS = {"halfkey-attack": demo_halfkey_attack, "gentry-complete": demo_gentry_complete,
         "fche": demo_fche, "bootstrap-not-fche": demo_bootstrap_not_fche}


def cmd_demo(args, cfg):
    return DEMOS[args.name](cfg, args)


# ---------------------------------------------------------------------------
# experiments

def cmd_experiment(args, cfg):
    trials = cfg.trials or 1000
    if args.game == "indcpa":
        if not args.scheme:
            raise UsageError("indcpa needs --scheme")
        s = registry.scheme(args.scheme)
        s = getattr(s, "base", s)
        adv = registry.adversary(args.adversary, args.scheme)
        rep = run_indcpa(s, adv, trials, cfg.seed, delta=args.delta)
    elif args.game == "bridge-indcpa":
        if not args.bridge:
            raise UsageError("bridge-indcpa needs --bridge")
        b = registry.bridge(args.bridge, cfg.preset)
        entry = registry.BRIDGES.get(args.bridge)
        adv = registry.adversary(args.adversary, cfg.preset or (entry and entry.default_preset))
        rep = run_bridge_indcpa(b, adv, trials, cfg.seed, delta=args.delta)
    else:
        if not (args.a and args.b and args.d):
            raise UsageError("distinguish needs --a, --b and --d")
        sa, sb, d = registry.sampler(args.a), registry.sampler(args.b), registry.distinguisher(args.d)
        rep = run_distinguisher(sa, sb, d, trials, cfg.seed, args.delta,
                                names={"a": args.a, "b": args.b, "d": args.d})
    return rep, True


# ---------------------------------------------------------------------------
# list / params

def cmd_list(args, cfg):
    return registry.listing(), True


def cmd_params(args, cfg):
    names = [cfg.preset] if cfg.preset else sorted(config.PRESETS)
    out = {}
    for name in names:
        p = dict(config.preset(name))
        if p["family"] == "gsw":
            gp = config.gsw_params(name)
            p.update(q=gp.q, N=gp.N, fresh_noise=gp.fresh_noise, wide=gp.wide,
                     level_bound=level_bound(gp.N, gp.fresh_noise, gp.levels),
                     required_log_q=required_log_q(gp.n, gp.beta, gp.levels))
        out[name] = p
    return {"presets": out}, True


# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, help="defaults to $BRIDGELAB_SEED")
    common.add_argument("--preset", help="parameter preset (see `params`)")
    common.add_argument("--trials", type=int)

    p = argparse.ArgumentParser(prog="bridgelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="bridge correctness or completeness")
    c.add_argument("kind", choices=("correct", "complete"))
    c.add_argument("bridge")
    c.add_argument("--mode", choices=("exhaustive", "sampled"))
    c.add_argument("--keys", type=int, help="limit the number of source keys")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("demo", parents=[common], help="run an integration scenario")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--inner")
    d.add_argument("--outer")
    d.add_argument("--backend")
    d.set_defaults(func=cmd_demo)

    e = sub.add_parser("experiment", parents=[common], help="security games")
    e.add_argument("game", choices=("indcpa", "bridge-indcpa", "distinguish"))
    e.add_argument("--scheme")
    e.add_argument("--bridge")
    e.add_argument("--adversary", default="random")
    e.add_argument("--a")
    e.add_argument("--b")
    e.add_argument("--d")
    e.add_argument("--delta", type=float, default=0.01)
    e.set_defaults(func=cmd_experiment)

    lst = sub.add_parser("list", parents=[common], help="registered ids")
    lst.set_defaults(func=cmd_list)
    pr = sub.add_parser("params", parents=[common], help="print presets")
    pr.set_defaults(func=cmd_params)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg = run_config(args, seed_required=args.command == "experiment")
        report, ok = args.func(args, cfg)
        emit(report, cfg)
    except (UsageError, UnknownEntry) as exc:
        print(f"bridgelab: {exc}", file=sys.stderr)
        return 2
    except BridgeLabError as exc:
        print(f"bridgelab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
