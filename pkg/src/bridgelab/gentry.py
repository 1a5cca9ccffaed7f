"""Gentry-type bridges, circuit bridges, the fully composable transform,
the bootstrap-after-eval wrapper and the zero-substituted key sampler.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .bridges import Bridge, KeyBundle, compose, concat_bridges, make_bridge
from .circuits import (BooleanCircuit, compile_decryption_circuit, compose_circuits,
                       decryption_circuit_at, eval_boolean, minimize, partial_apply,
                       synthesize, table_from_function, AND)
from .core import KeyPair, fiber_power
from .errors import (CircuitOutOfClass, NonEnumerableSpace, SchemeMismatch, WrongKeyMode)
from .homomorphic import eval as h_eval, eval_multi
from .rng import derive_rng


@dataclass(frozen=True, eq=False)
class GentryKey:
    """Bridge key of a Gentry-type bridge: the outer public key, its
    evaluation key and bitwise encryptions of the inner secret key."""
    pk: Any
    evk: Any
    enc_bits: tuple

    def __json__(self):
        return [self.pk, self.evk, list(self.enc_bits)]


@dataclass(frozen=True, eq=False)
class GentryBridgeSpec:
    inner: Any
    outer: Any
    iota: Callable = lambda m: m
    key_mode: str = "independent"
    variant: str = "fold"
    trivial_bits: bool = False
    dec_circuit: Optional[BooleanCircuit] = None


def _all_functions_bound(h, arity):
    """Largest certified noise over every function of `arity` key bits."""
    worst = 0
    for table in range(1 << (1 << arity)):
        worst = max(worst, h.certify(synthesize([table], arity))["bound"])
    return worst


def gentry_bridge(spec, name=None):
    """E -> H by evaluating iota o Dec_E homomorphically on encrypted key bits."""
    inner, h = spec.inner, spec.outer
    if spec.key_mode not in ("independent", "shared"):
        raise ValueError(f"unknown key mode {spec.key_mode!r}")
    if spec.key_mode == "shared" and inner.name != h.base.name:
        raise SchemeMismatch("shared keys need the inner scheme to be the outer base scheme")
    kc = inner.key_codec
    if kc is None:
        raise NonEnumerableSpace(f"{inner.name} has no key bit representation")
    e = kc.width
    iota = spec.iota
    dec_circuit = spec.dec_circuit
    enumerable = inner.ciphertext_space.enumerable and inner.ciphertext_codec is not None
    if dec_circuit is None and enumerable and e + inner.ciphertext_codec.width <= 16:
        dec_circuit = compile_decryption_circuit(inner, iota)
    if spec.variant == "encrypt-bits":
        if dec_circuit is None:
            raise NonEnumerableSpace("the encrypt-bits variant needs the full decryption circuit")
        n_bits = inner.ciphertext_codec.width
        c_noise = 0 if spec.trivial_bits else h.fresh_noise
        report = h.certify(dec_circuit, [h.fresh_noise] * e + [c_noise] * n_bits)
    elif spec.variant == "fold":
        if dec_circuit is not None:
            report = {"bound": max(h.certify(minimize(partial_apply(
                dec_circuit, inner.ciphertext_codec.encode(c))))["bound"]
                for c in inner.ciphertext_space)}
        elif e <= 3:
            report = {"bound": _all_functions_bound(h, e)}
        else:
            report = {"bound": None}
    else:
        raise ValueError(f"unknown variant {spec.variant!r}")

    def stage2(lam, kb, rng):
        if spec.key_mode == "shared":
            return kb["sk1"], kb["pk1"], {"evk2": kb.get("evk1", ())}
        kp = h.keygen(lam, rng)
        return kp.sk, kp.pk, {"evk2": kp.evk}

    def stage3(lam, kb, rng):
        bits = kc.encode(kb["sk1"])
        enc = tuple(h.encrypt(kb["pk2"], b, rng) for b in bits)
        return GentryKey(kb["pk2"], kb.get("evk2", ()), enc)

    def folded(raw):
        if dec_circuit is not None:
            return minimize(partial_apply(dec_circuit, inner.ciphertext_codec.encode(raw)))
        return decryption_circuit_at(inner, raw, iota)

    def convert_fn(bk, raw, rng):
        if spec.variant == "fold":
            out = h_eval(h, bk.evk, folded(raw), list(bk.enc_bits), rng)
        else:
            c_bits = inner.ciphertext_codec.encode(raw)
            if spec.trivial_bits:
                enc_c = [h.base.wrap(h.trivial(b)) for b in c_bits]
                noise = [h.fresh_noise] * e + [0] * len(c_bits)
            else:
                enc_c = [h.encrypt(bk.pk, b, rng) for b in c_bits]
                noise = None
            out = h_eval(h, bk.evk, dec_circuit, list(bk.enc_bits) + enc_c, rng,
                         input_noise=noise)
        return h.base.unwrap(out)

    flags = {"gentry": True, "variant": spec.variant, "noise_bound": report.get("bound")}
    if spec.key_mode == "shared":
        flags["circular_security_assumed"] = True
    b = make_bridge(name or f"gentry[{inner.name}->{h.name}]", inner, h.base, iota, convert_fn,
                    stage2=stage2, stage3=stage3,
                    key_mode=spec.key_mode,
                    keygen_family=f"gentry:{inner.name}:{h.name}:{spec.key_mode}",
                    complete_certified=True, flags=flags)
    return b


def is_gentry(b):
    return bool(b.flags.get("gentry")) and not b.parts


# ---------------------------------------------------------------------------
# circuit bridges

def circuit_bridge(h, circuit, name=None):
    """H^(r) -> H: f_C(bk, c) = Eval(evk, C, c) with bk = evk."""
    if len(circuit.outputs) != 1:
        raise ValueError("circuit bridges take single-output circuits")
    h.certify(circuit, h.fresh_noise)
    r = circuit.arity
    source = fiber_power(h.base, r)

    def stage3(lam, kb, rng):
        return kb.get("evk1", ())

    def convert_fn(bk, raw, rng):
        ins = [h.base.wrap(x) for x in raw]
        return h.base.unwrap(h_eval(h, bk, circuit, ins, rng))

    return make_bridge(name or f"circuit[{r}:{circuit.size}]", source, h.base,
                       lambda ms: eval_boolean(circuit, ms)[0], convert_fn, stage3=stage3,
                       keygen_family=f"circuit:{h.name}",
                       complete_certified=bool(h.params.get("fully_composable")))


def and_tree_bridge(h, depth):
    """H^(2^depth) -> H as a chain of composed layers of pairwise-AND circuit bridges.

    Each layer is certified on its own at fresh noise, but the composite
    feeds evaluated ciphertexts into the next layer, so once the stacked
    depth exceeds the budget some fresh inputs convert wrongly.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    layers = []
    for level in range(depth, 0, -1):
        r = 1 << level
        if r == 2:
            layers.append(circuit_bridge(h, BooleanCircuit(2, ((AND, 0, 1),), (2,)), "and"))
            continue
        parts = [circuit_bridge(h, BooleanCircuit(r, ((AND, 2 * i, 2 * i + 1),), (r,)),
                                f"and[{2 * i},{2 * i + 1}]") for i in range(r // 2)]
        layers.append(concat_bridges(parts, name=f"and-layer{r}"))
    out = layers[0]
    for nxt in layers[1:]:
        out = compose(out, nxt)
    return out


# ---------------------------------------------------------------------------
# evaluation frontends checked against the fully composable equation

class RawEval:
    """Eval of a homomorphic scheme exactly as shipped."""
    flags = {}

    def __init__(self, h):
        self.h = h
        self.base = h.base
        self.name = f"raw[{h.name}]"

    def keygen(self, lam, rng):
        return self.h.keygen(lam, rng)

    def eval_multi(self, evk, circuit, inputs, rng=None):
        return eval_multi(self.h, evk, circuit, inputs, rng)


@dataclass(frozen=True, eq=False)
class FcheKey:
    evk: Any
    key_bits: tuple

    def __json__(self):
        return [self.evk, list(self.key_bits)]


class FcheScheme:
    """H' with evk' = (evk, encryptions of the own key bits).

    Eval'(C, c_1..c_l) evaluates the key-bit function
    sk -> C(Dec(sk, c_1), ..., Dec(sk, c_l)) on the encrypted key bits.
    In "resynth" mode that function is synthesized from its truth table,
    so the output noise does not depend on C or on the inputs; "compose"
    mode wires C onto the per-input decryption circuits instead.
    """

    def __init__(self, h, mode="resynth"):
        if mode not in ("resynth", "compose"):
            raise ValueError(f"unknown mode {mode!r}")
        kc = h.base.key_codec
        if kc is None:
            raise NonEnumerableSpace(f"{h.name} has no key bit representation")
        self.h = h
        self.base = h.base
        self.mode = mode
        self.e = kc.width
        self.name = f"fche[{h.name}]"
        self.flags = {"circular_security_assumed": True, "mode": mode}
        self.recrypt_bound = _all_functions_bound(h, self.e) if self.e <= 3 else None

    def keygen(self, lam, rng):
        kp = self.h.keygen(lam, rng)
        bits = self.base.key_codec.encode(kp.sk)
        enc = tuple(self.h.encrypt(kp.pk, b, rng) for b in bits)
        return KeyPair(sk=kp.sk, pk=kp.pk, evk=FcheKey(kp.evk, enc))

    def encrypt(self, pk, m, rng):
        return self.base.encrypt(pk, m, rng)

    def decrypt(self, sk, c):
        return self.base.decrypt(sk, c)

    def key_function(self, circuit, raws):
        kc, dec = self.base.key_codec, self.base.decrypt_fn
        width = len(circuit.outputs)

        def fn(bits):
            sk = kc.decode(bits)
            if sk is None:
                return (0,) * width
            return eval_boolean(circuit, [dec(sk, r) for r in raws])

        return synthesize(table_from_function(fn, self.e, width), self.e)

    def recrypt_circuit(self, circuit, raws):
        if self.mode == "resynth":
            return self.key_function(circuit, raws)
        inners = [decryption_circuit_at(self.base, r) for r in raws]
        if not inners:
            return self.key_function(circuit, raws)
        return compose_circuits(circuit, inners)

    def eval_multi(self, evk, circuit, inputs, rng=None):
        raws = [self.base.unwrap(c) for c in inputs]
        g = self.recrypt_circuit(circuit, raws)
        return eval_multi(self.h, evk.evk, g, list(evk.key_bits), rng)

    def eval(self, evk, circuit, inputs, rng=None):
        return self.eval_multi(evk, circuit, inputs, rng)[0]

    def recrypt(self, evk, c, rng=None):
        from .circuits import identity_circuit
        return self.eval(evk, identity_circuit(1), [c], rng)


def fche_transform(h, mode="resynth"):
    return FcheScheme(h, mode)


def fche_compose_eval(s, evk, c1, c2, inputs, rng=None):
    """Eval'(C2, Eval'(C1, inputs))."""
    mid = s.eval_multi(evk, c1, inputs, rng)
    return s.eval_multi(evk, c2, list(mid), rng)


class BootstrapScheme:
    """Eval''(C, c) = Bootstrap(Eval(C, c)), with Bootstrap a recryption.

    Inputs to Eval are certified at the recryption noise level, so chains
    of evaluations on honestly produced ciphertexts always decrypt.
    """

    def __init__(self, h):
        self.h = h
        self.base = h.base
        self.fche = FcheScheme(h, "resynth")
        self.name = f"bootstrap[{h.name}]"
        self.flags = {"circular_security_assumed": True}
        self.input_noise = max(h.fresh_noise, self.fche.recrypt_bound or 0)

    def keygen(self, lam, rng):
        return self.fche.keygen(lam, rng)

    def encrypt(self, pk, m, rng):
        return self.base.encrypt(pk, m, rng)

    def decrypt(self, sk, c):
        return self.base.decrypt(sk, c)

    def bootstrap(self, evk, c, rng=None):
        return self.fche.recrypt(evk, c, rng)

    def eval_multi(self, evk, circuit, inputs, rng=None):
        raw = eval_multi(self.h, evk.evk, circuit, inputs, rng, input_noise=self.input_noise)
        return tuple(self.bootstrap(evk, c, rng) for c in raw)

    def eval(self, evk, circuit, inputs, rng=None):
        return self.eval_multi(evk, circuit, inputs, rng)[0]


# ---------------------------------------------------------------------------
# checking the fully composable equation

def _fche_case(s, kp, circuit, inputs, rng):
    outs = s.eval_multi(kp.evk, circuit, inputs, rng)
    plain = [s.base.decrypt(kp.sk, c) for c in inputs]
    want = eval_boolean(circuit, plain)
    got = tuple(s.base.decrypt(kp.sk, c) for c in outs)
    return got == want, want, got


def check_fche(s, circuit_sampler, trials, seed=0, lam=1, batch_size=50, input_sampler=None):
    """Dec(Eval(C, c)) = C(Dec(c)) on sampled circuits and arbitrary inputs.

    Inputs default to uniform elements of the ciphertext space, which are
    almost never fresh encryptions.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    space = s.base.ciphertext_space
    kp = None
    for i in range(trials):
        if i % batch_size == 0:
            kp = s.keygen(lam, derive_rng(seed, "fche-keygen", i // batch_size))
        rng = derive_rng(seed, "fche", i)
        circuit = circuit_sampler(rng)
        if input_sampler is not None:
            inputs = input_sampler(kp, circuit.arity, rng)
        else:
            inputs = [s.base.wrap(space.sample(rng)) for _ in range(circuit.arity)]
        ok, want, got = _fche_case(s, kp, circuit, inputs, rng)
        if not ok:
            return {"holds": False, "checked": i + 1,
                    "witness": {"trial": i, "circuit": circuit, "inputs": [c.value for c in inputs],
                                "expected": want, "got": got}}
    return {"holds": True, "checked": trials, "witness": None}


def check_fche_exhaustive(s, circuits, lam=1, seed=0):
    """Every circuit on every tuple of ciphertexts, for every key."""
    base = s.base
    if not base.ciphertext_space.enumerable:
        raise NonEnumerableSpace(f"{base.name} ciphertexts can only be sampled")
    if base.key_space is not None and base.key_space.enumerable and base.keypair_from_sk:
        sks = list(base.key_space)
    else:
        sks = [None]
    checked = 0
    cts = list(base.ciphertext_space)
    for ki, sk in enumerate(sks):
        rng = derive_rng(seed, "fche-exhaustive", ki)
        kp = s.keygen(lam, rng)
        if sk is not None:
            pk = base.keypair_from_sk(sk).pk
            kp = _with_key(s, sk, pk, rng)
        for circuit in circuits:
            for tup in itertools.product(cts, repeat=circuit.arity):
                checked += 1
                ok, want, got = _fche_case(s, kp, circuit, [base.wrap(x) for x in tup], rng)
                if not ok:
                    return {"holds": False, "checked": checked,
                            "witness": {"circuit": circuit, "inputs": list(tup),
                                        "expected": want, "got": got}}
    return {"holds": True, "checked": checked, "witness": None}


def _with_key(s, sk, pk, rng):
    """Key pair of s built around a given base key pair."""
    if isinstance(s, (FcheScheme, BootstrapScheme)):
        inner = s if isinstance(s, FcheScheme) else s.fche
        bits = inner.base.key_codec.encode(sk)
        enc = tuple(inner.h.encrypt(pk, b, rng) for b in bits)
        return KeyPair(sk=sk, pk=pk, evk=FcheKey((), enc))
    return KeyPair(sk=sk, pk=pk, evk=())


def squaring_witness(h, seed=0, lam=1, max_steps=200):
    """Square a fresh Enc(1) until one more squaring decrypts wrongly.

    Returns the input ciphertext c and circuit AND(x, x) with
    Dec(Eval(AND, c, c)) != Dec(c), witnessing that raw Eval is not fully
    composable.
    """
    sq = BooleanCircuit(1, ((AND, 0, 0),), (1,))
    kp = h.keygen(lam, derive_rng(seed, "square-keygen"))
    rng = derive_rng(seed, "square")
    c = h.encrypt(kp.pk, 1, rng)
    for step in range(max_steps):
        nxt = h_eval(h, kp.evk, sq, [c], rng)
        if h.decrypt(kp.sk, nxt) != h.decrypt(kp.sk, c):
            return {"found": True, "steps": step, "circuit": sq, "input": c,
                    "expected": h.decrypt(kp.sk, c), "got": h.decrypt(kp.sk, nxt),
                    "keys": kp}
        c = nxt
    return {"found": False, "steps": max_steps, "circuit": sq, "input": None, "keys": kp}


def check_fresh_chain(s, c1, c2, seed=0, lam=1):
    """Eval(C2, Eval(C1, Enc(m))) against C2(C1(m)) for every input m.

    Inputs are fresh encryptions, so this only exercises honest provenance.
    """
    kp = s.keygen(lam, derive_rng(seed, "chain-keygen"))
    bad = []
    for idx, m in enumerate(itertools.product((0, 1), repeat=c1.arity)):
        rng = derive_rng(seed, "chain", idx)
        ins = [s.encrypt(kp.pk, b, rng) for b in m]
        outs = fche_compose_eval(s, kp.evk, c1, c2, ins, rng)
        want = eval_boolean(c2, eval_boolean(c1, m))
        got = tuple(s.decrypt(kp.sk, c) for c in outs)
        if got != want:
            bad.append({"input": m, "expected": want, "got": got})
    return {"holds": not bad, "checked": 1 << c1.arity, "failures": bad}


def garbage_witness(s, circuit, seed=0, lam=1, max_tries=1000):
    """Search uniform ciphertexts for a violation of the composable equation."""
    kp = s.keygen(lam, derive_rng(seed, "garbage-keygen"))
    space = s.base.ciphertext_space
    for i in range(max_tries):
        rng = derive_rng(seed, "garbage", i)
        inputs = [s.base.wrap(space.sample(rng)) for _ in range(circuit.arity)]
        ok, want, got = _fche_case(s, kp, circuit, inputs, rng)
        if not ok:
            return {"found": True, "tries": i + 1, "circuit": circuit,
                    "inputs": inputs, "expected": want, "got": got, "keys": kp}
    return {"found": False, "tries": max_tries, "circuit": circuit, "inputs": None, "keys": kp}


# ---------------------------------------------------------------------------
# zero-substituted key distribution

@dataclass(frozen=True, eq=False)
class FiberSampler:
    """A base distribution and, for each base value, a sampler of its fiber."""
    name: str
    base: Callable
    fiber: Callable
    fiber_with_secret: Optional[Callable] = None

    def sample(self, rng):
        return self.fiber(self.base(rng), rng)

    def __call__(self, rng):
        return self.sample(rng)


def _gentry_part(composed):
    if len(composed.parts) != 2:
        raise WrongKeyMode(f"{composed.name} is not a composite bridge")
    f, g = composed.parts
    if not is_gentry(g):
        raise WrongKeyMode(f"{g.name} is not a Gentry-type bridge")
    if g.key_mode != "independent":
        raise WrongKeyMode(f"{g.name} shares keys; no substitute without circularity")
    return f, g


def real_bridge_key_sampler(composed, lam=1):
    """(pk1, pk2, bk_f, pk_H, bk_g bits) from the composite key generation."""
    _gentry_part(composed)

    def sample(rng):
        kb = composed.keygen(lam, rng)
        bk_f, pk2, bk_g = kb.bk
        return (kb.pk1, pk2, bk_f, bk_g.pk, bk_g.enc_bits)

    return sample


def zero_substituted_bridge_key(composed, lam=1):
    """Same layout with the key-bit encryptions replaced by Enc(pk_H, 0)."""
    f, g = _gentry_part(composed)
    h = g.target
    e = f.target.key_bits

    def base(rng):
        kf = f.keygen(lam, rng)
        return (kf.pk1, kf.pk2, kf.bk)

    def fiber_with_secret(x, rng):
        # only the outer key generation of g is needed; the inner key is unused
        partial = {"sk1": None, "pk1": None}
        sk_h, pk_h = g.stage2(lam, partial, rng)[:2]
        zeros = tuple(h.encrypt(pk_h, 0, rng) for _ in range(e))
        return (*x, pk_h, zeros), sk_h

    def fiber(x, rng):
        return fiber_with_secret(x, rng)[0]

    return FiberSampler(f"zero[{composed.name}]", base, fiber, fiber_with_secret)
