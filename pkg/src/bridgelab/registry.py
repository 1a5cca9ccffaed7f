"""String-addressable bridges, schemes, adversaries, samplers and distinguishers.

Every factory takes the preset name chosen on the command line (or None
for its default) and builds a fresh object, so lookups are cheap and the
CLI can reject unknown ids before doing any work.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import config
from .bridges import (compose, double_additive_bridge, gm_identity_bridge, halfkey_bridges,
                      identity_bridge, lwe_additive_bridge, modswitch_bridge,
                      revealing_bridges, sabotaged_bridge)
from .circuits import AND, XOR, BooleanCircuit, identity_circuit
from .concrete import GmParams, LweCiphertext
from .errors import UnknownEntry
from .gentry import (GentryBridgeSpec, and_tree_bridge, circuit_bridge, gentry_bridge,
                     real_bridge_key_sampler, zero_substituted_bridge_key)
from .harness import (DISTINGUISHERS, abstainer, halfkey_attacker, omniscient,
                      plaintext_reader, random_guesser)
from .rng import random_bits


@dataclass(frozen=True)
class Entry:
    build: Callable
    default_preset: Optional[str]
    help: str
    # (sk, ciphertext) pairs known to violate completeness, verified in reports
    known_witnesses: dict = None


def _lwe(preset):
    return config.lwe_params(preset)


def _modswitch(preset):
    p = config.preset(preset)
    return modswitch_bridge(p["q"], p["Q"], p["n"], p["noise_bound"])


def _gm(preset):
    p = config.preset(preset)
    return GmParams(p["p"], p["q_prime"])


def _halfkey(preset, which):
    f, g = halfkey_bridges(config.base_scheme(preset))
    return {"f": f, "g": g, "gf": compose(f, g)}[which]


def _revealing(preset, which):
    f, g = halfkey_bridges(config.base_scheme(preset))
    fp, gp, _ = revealing_bridges(f, g)
    return {"f": fp, "g": gp, "gf": compose(fp, gp)}[which]


def _additive_then_modswitch(preset):
    p = config.preset(preset)
    params = config.lwe_params(preset, "threshold")
    return compose(lwe_additive_bridge(params),
                   modswitch_bridge(p["q"], p["Q"], p["n"], p["noise_bound"]))


CIRCUITS = {
    "xor": BooleanCircuit(2, ((XOR, 0, 1),), (2,)),
    "and": BooleanCircuit(2, ((AND, 0, 1),), (2,)),
    "id": identity_circuit(1),
    "maj": BooleanCircuit(3, ((AND, 0, 1), (AND, 0, 2), (AND, 1, 2), (XOR, 3, 4), (XOR, 6, 5)),
                          (7,)),
}


def _circuit(preset, name):
    return circuit_bridge(config.hom_scheme(preset), CIRCUITS[name], f"circuit-{name}")


BRIDGES = {
    "identity": Entry(lambda p: identity_bridge(config.base_scheme(p), "identity"), "lwe-toy",
                      "identity bridge on any scheme preset"),
    "lwe-additive": Entry(lambda p: lwe_additive_bridge(_lwe(p)), "lwe-add",
                          "E^(2) -> E by adding LWE ciphertexts; iota is XOR",
                          {"lwe-toy": [((0, 0), (LweCiphertext((0, 0), 3), LweCiphertext((0, 0), 3)))]}),
    "modswitch": Entry(_modswitch, "lwe-modswitch", "LWE mod q -> LWE mod Q, interval decryption"),
    "additive-modswitch": Entry(_additive_then_modswitch, "lwe-compat",
                                "modswitch after lwe-additive (any after complete)"),
    "gm-identity": Entry(lambda p: gm_identity_bridge(_gm(p)), "gm-toy",
                         "identity bridge on Goldwasser-Micali"),
    "sabotaged": Entry(lambda p: sabotaged_bridge(_lwe(p)), "lwe-add",
                       "identity that flips half the plaintexts (negative control)"),
    "double-additive": Entry(lambda p: double_additive_bridge(_lwe(p)), "lwe-toy",
                             "E^(4) -> E^(2) -> E, two additive layers"),
    "halfkey-f": Entry(lambda p: _halfkey(p, "f"), "lwe-toy", "appends the first key half"),
    "halfkey-g": Entry(lambda p: _halfkey(p, "g"), "lwe-toy", "appends the second key half"),
    "halfkey-composed": Entry(lambda p: _halfkey(p, "gf"), "lwe-toy",
                              "g after f; the bridge key holds both halves"),
    "revealing-f": Entry(lambda p: _revealing(p, "f"), "lwe-toy", "halfkey-f into E2+m"),
    "revealing-g": Entry(lambda p: _revealing(p, "g"), "lwe-toy", "halfkey-g out of E2+m"),
    "revealing-composed": Entry(lambda p: _revealing(p, "gf"), "lwe-toy",
                                "revealing-g after revealing-f"),
    "and-tree": Entry(lambda p: and_tree_bridge(config.hom_scheme(p), 3), "gsw-small",
                      "three composed AND layers on raw GSW (overflows the noise budget)"),
}
for _name in CIRCUITS:
    BRIDGES[f"circuit-{_name}"] = Entry(lambda p, _n=_name: _circuit(p, _n), "trivial",
                                        f"circuit bridge for {_name}")


def gentry_from_id(ident, variant="fold", iota="id", trivial_bits=False):
    """gentry:<inner>:<outer>[:<variant>]."""
    parts = ident.split(":")
    if len(parts) not in (3, 4) or parts[0] != "gentry":
        raise UnknownEntry(f"malformed gentry id {ident!r}")
    if len(parts) == 4:
        variant = parts[3]
    if variant not in ("fold", "encrypt-bits"):
        raise UnknownEntry(f"unknown gentry variant {variant!r}")
    inner = config.base_scheme(parts[1])
    outer = config.hom_scheme(parts[2])
    fn = (lambda m: m) if iota == "id" else (lambda m: 1 - m)
    spec = GentryBridgeSpec(inner, outer, fn, variant=variant, trivial_bits=trivial_bits)
    return gentry_bridge(spec, name=ident)


def bridge(ident, preset=None):
    if ident.startswith("gentry:"):
        return gentry_from_id(ident)
    if ident not in BRIDGES:
        raise UnknownEntry(f"unknown bridge {ident!r}")
    entry = BRIDGES[ident]
    return entry.build(preset or entry.default_preset)


def known_witnesses(ident, preset=None):
    entry = BRIDGES.get(ident)
    if entry is None or not entry.known_witnesses:
        return []
    return entry.known_witnesses.get(preset or entry.default_preset, [])


def scheme(name):
    if name == "concat-mock":
        from .homomorphic import concat_mock
        return concat_mock()
    return config.scheme(name)


# adversaries get the scheme preset so the reassembly attack knows the base
ADVERSARIES = {
    "random": lambda preset: random_guesser(),
    "abstain": lambda preset: abstainer(),
    "omniscient": lambda preset: omniscient(),
    "plaintext-reader": lambda preset: plaintext_reader(),
    "reassembly": lambda preset: halfkey_attacker(config.base_scheme(preset or "lwe-toy")),
}


def adversary(name, preset=None):
    if name not in ADVERSARIES:
        raise UnknownEntry(f"unknown adversary {name!r}")
    return ADVERSARIES[name](preset)


def _gentry_pair():
    """lwe-additive on the n=1, q=4 toy, followed by a fold Gentry bridge into gsw-lite."""
    f = lwe_additive_bridge(config.lwe_params("lwe-n1q4"))
    g = gentry_from_id("gentry:lwe-n1q4:gsw-lite")
    return compose(f, g)


def _bits_sampler(width, zero):
    def sample(rng):
        return tuple([0] * width) if zero else tuple(random_bits(rng, width))
    return sample


SAMPLERS = {
    "gentry-real": lambda: real_bridge_key_sampler(_gentry_pair()),
    "gentry-zero": lambda: zero_substituted_bridge_key(_gentry_pair()),
    "uniform-bits": lambda: _bits_sampler(16, False),
    "zero-bits": lambda: _bits_sampler(16, True),
}


def sampler(name):
    if name not in SAMPLERS:
        raise UnknownEntry(f"unknown sampler {name!r}")
    return SAMPLERS[name]()


def distinguisher(name):
    if name not in DISTINGUISHERS:
        raise UnknownEntry(f"unknown distinguisher {name!r}")
    return DISTINGUISHERS[name]


DEMOS = {
    "halfkey-attack": "reassembly attack on the composite of two secure half-key bridges",
    "gentry-complete": "exhaustive completeness of every Gentry-type bridge variant",
    "fche": "fully composable transform checked on arbitrary ciphertexts",
    "bootstrap-not-fche": "bootstrap after eval chains correctly but fails on garbage inputs",
}


def listing():
    return {
        "bridges": {k: v.help for k, v in sorted(BRIDGES.items())},
        "bridge_patterns": {"gentry:<inner>:<outer>[:fold|encrypt-bits]":
                            "Gentry-type bridge, independent keys"},
        "schemes": sorted([*config.PRESETS, "trivial", "concat-mock"]),
        "adversaries": sorted(ADVERSARIES),
        "samplers": sorted(SAMPLERS),
        "distinguishers": sorted(DISTINGUISHERS),
        "demos": DEMOS,
    }
