"""Bridges between schemes, their completeness, composition, and the
example bridges (additive LWE, modulus switching, half-key, revealing).
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .concrete import (LweCiphertext, LweParams, lwe_add, lwe_scale, make_gm_scheme,
                       make_lwe_scheme)
from .core import (BITS, BitCodec, FiniteSet, KeyPair, SchemeDescriptor, check_lambda,
                   concat_codecs, fiber_power, int_bits)
from .errors import (DivisibilityViolation, InvalidParameters, KeyBundleMismatch,
                     NonEnumerableSpace, OddKeyLength, SchemeMismatch)
from .rng import derive_rng


@dataclass(frozen=True, eq=False)
class KeyBundle:
    sk1: Any
    pk1: Any
    sk2: Any
    pk2: Any
    bk: Any
    provenance: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _same_keys(lam, kb, rng):
    return kb["sk1"], kb["pk1"]


def _empty_bk(lam, kb, rng):
    return ()


@dataclass(frozen=True, eq=False)
class Bridge:
    """(iota, staged key generation, conversion) from source to target.

    ``stage2(lam, partial, rng)`` returns (sk2, pk2[, extra]) and
    ``stage3(lam, partial, rng)`` returns bk, where ``partial`` is a dict
    holding the keys produced so far. ``convert_fn`` acts on raw values.
    """
    name: str
    source: SchemeDescriptor
    target: SchemeDescriptor
    iota: Callable
    convert_fn: Callable
    stage2: Callable = _same_keys
    stage3: Callable = _empty_bk
    key_mode: str = "shared"
    keygen_family: str = ""
    complete_certified: bool = False
    correctness_unverified: bool = False
    parts: tuple = ()
    flags: dict = field(default_factory=dict)
    extend_fn: Optional[Callable] = None

    def keygen_from(self, lam, sk1, pk1, rng, evk1=()):
        """Stages 2 and 3 only, from an existing source key pair."""
        if self.extend_fn is not None:
            return self.extend_fn(lam, sk1, pk1, rng)
        partial = {"sk1": sk1, "pk1": pk1, "evk1": evk1}
        res = self.stage2(lam, partial, rng)
        partial["sk2"], partial["pk2"] = res[0], res[1]
        if len(res) > 2:
            partial.update(res[2])
        bk = self.stage3(lam, partial, rng)
        extra = {k: v for k, v in partial.items()
                 if k not in ("sk1", "pk1", "sk2", "pk2", "evk1")}
        return KeyBundle(sk1, pk1, partial["sk2"], partial["pk2"], bk,
                         provenance={"sk1": "KeyGen1", "pk1": "KeyGen1",
                                     "sk2": f"KeyGen2:{self.key_mode}",
                                     "pk2": f"KeyGen2:{self.key_mode}", "bk": "KeyGen3"},
                         extra=extra)

    def keygen(self, lam, rng):
        check_lambda(lam)
        kp = self.source.keygen(lam, rng)
        if self.extend_fn is not None:
            return self.extend_fn(lam, kp.sk, kp.pk, rng)
        return self.keygen_from(lam, kp.sk, kp.pk, rng, kp.evk if kp.evk is not None else ())

    def convert(self, bk, c, rng):
        return self.target.wrap(self.convert_fn(bk, self.source.unwrap(c), rng))

    def iota_table(self):
        space = self.source.plaintext_space
        if not space.enumerable:
            raise NonEnumerableSpace(f"plaintext space of {self.name} is not enumerable")
        return {m: self.iota(m) for m in space}

    def describe(self):
        return {"name": self.name, "source": self.source.name, "target": self.target.name,
                "key_mode": self.key_mode, "complete_certified": self.complete_certified,
                "correctness_unverified": self.correctness_unverified, **self.flags}


def _table_iota(bridge_iota, space):
    """Freeze iota into a lookup table when the plaintext space allows."""
    if space.enumerable and space.size is not None and space.size <= 1 << 12:
        table = {m: bridge_iota(m) for m in space}
        return table.__getitem__
    return bridge_iota


def make_bridge(name, source, target, iota, convert_fn, **kw):
    kw.setdefault("keygen_family", f"shared:{source.name}")
    return Bridge(name, source, target, _table_iota(iota, source.plaintext_space),
                  convert_fn, **kw)


# ---------------------------------------------------------------------------
# checks

def check_bridge_correct(b, trials, seed, lam=1, batch_size=100):
    """Failure rate of Dec2(sk2, f(bk, Enc1(pk1, m))) = iota(m) on fresh m."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    failures = 0
    kb = None
    for i in range(trials):
        if i % batch_size == 0:
            kb = b.keygen(lam, derive_rng(seed, "bridge-keygen", i // batch_size))
        rng = derive_rng(seed, "bridge-trial", i)
        m = b.source.plaintext_space.sample(rng)
        c2 = b.convert(kb.bk, b.source.encrypt(kb.pk1, m, rng), rng)
        if b.target.decrypt(kb.sk2, c2) != b.iota(m):
            failures += 1
    return Fraction(failures, trials)


def _key_stream(b, lam, seed, keys):
    """Source key pairs: lexicographic when enumerable, else sampled."""
    src = b.source
    if keys != "sampled" and src.key_space is not None and src.key_space.enumerable \
            and src.keypair_from_sk is not None:
        it = src.enumerate_keypairs()
        if isinstance(keys, int):
            it = itertools.islice(it, keys)
        for i, kp in enumerate(it):
            yield kp, derive_rng(seed, "complete-stage", i)
        return
    count = keys if isinstance(keys, int) else 1
    for i in range(count):
        rng = derive_rng(seed, "complete-keygen", i)
        yield src.keygen(lam, rng), rng


def check_complete(b, mode="exhaustive", budget=1000, seed=0, lam=1, keys=None):
    """Test Dec2(sk2, f(bk, c)) = iota(Dec1(sk1, c)) for every c (or `budget` samples).

    Exhaustive mode walks keys, then ciphertexts, in lexicographic order and
    stops at the first failure, so the witness is reproducible.
    """
    src = b.source
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and not src.ciphertext_space.enumerable:
        raise NonEnumerableSpace(f"{src.name} ciphertexts can only be sampled")
    checked = 0
    n_keys = 0
    for kp, rng in _key_stream(b, lam, seed, keys):
        n_keys += 1
        kb = b.keygen_from(lam, kp.sk, kp.pk, rng)
        if mode == "exhaustive":
            cts = iter(src.ciphertext_space)
        else:
            per_key = budget if keys in (None, "sampled") else max(1, budget // max(1, keys))
            crng = derive_rng(seed, "complete-sample", n_keys)
            cts = (src.ciphertext_space.sample(crng) for _ in range(per_key))
        for raw in cts:
            checked += 1
            got = b.target.decrypt_fn(kb.sk2, b.convert_fn(kb.bk, raw, rng))
            want = b.iota(src.decrypt_fn(kb.sk1, raw))
            if got != want:
                return {"bridge": b.name, "mode": mode, "checked": checked, "complete": False,
                        "witness": {"sk": kb.sk1, "ciphertext": raw, "expected": want,
                                    "got": got},
                        "keys": n_keys}
    return {"bridge": b.name, "mode": mode, "checked": checked, "complete": True,
            "witness": None, "keys": n_keys}


def is_witness(b, sk1, raw, lam=1, seed=0):
    """Whether (sk1, raw) violates the completeness equation of b."""
    pk1 = b.source.keypair_from_sk(sk1).pk
    rng = derive_rng(seed, "witness")
    kb = b.keygen_from(lam, sk1, pk1, rng)
    got = b.target.decrypt_fn(kb.sk2, b.convert_fn(kb.bk, raw, rng))
    return got != b.iota(b.source.decrypt_fn(sk1, raw))


def search_correctness_counterexample(b, max_candidates, seed, lam=1, batch_size=100):
    """Fresh encryptions until one converts to the wrong plaintext."""
    kb = None
    for i in range(max_candidates):
        if i % batch_size == 0:
            kb = b.keygen(lam, derive_rng(seed, "search-keygen", i // batch_size))
        rng = derive_rng(seed, "search", i)
        m = b.source.plaintext_space.sample(rng)
        c1 = b.source.encrypt(kb.pk1, m, rng)
        got = b.target.decrypt(kb.sk2, b.convert(kb.bk, c1, rng))
        if got != b.iota(m):
            return {"found": True, "candidate": i, "message": m, "sk": kb.sk1,
                    "ciphertext": c1.value, "expected": b.iota(m), "got": got}
    return {"found": False, "candidate": max_candidates, "message": None, "sk": None,
            "ciphertext": None, "expected": None, "got": None}


# ---------------------------------------------------------------------------
# composition

def compose(f, g):
    """g after f: bk = (bk_f, pk2, bk_g), with only stages 2-3 of g's keygen."""
    if f.target.name != g.source.name:
        raise SchemeMismatch(f"{f.name} lands in {f.target.name}, {g.name} starts at {g.source.name}")

    def extend(lam, sk1, pk1, rng):
        kf = f.keygen_from(lam, sk1, pk1, rng)
        kg = g.keygen_from(lam, kf.sk2, kf.pk2, rng)
        prov = {"sk1": kf.provenance.get("sk1", "KeyGen1"), "pk1": kf.provenance.get("pk1", "KeyGen1"),
                "sk2": f"{g.name}:{kg.provenance.get('sk2')}",
                "pk2": f"{g.name}:{kg.provenance.get('pk2')}",
                "bk": f"({f.name}:bk, {f.name}:pk2, {g.name}:bk)"}
        return KeyBundle(sk1, pk1, kg.sk2, kg.pk2, (kf.bk, kf.pk2, kg.bk), prov,
                         {"inner": (kf, kg)})

    def convert_fn(bk, raw, rng):
        return g.convert_fn(bk[2], f.convert_fn(bk[0], raw, rng), rng)

    flags = {}
    for part in (f, g):
        flags.update(part.flags)
    return Bridge(
        name=f"{g.name}.{f.name}",
        source=f.source,
        target=g.target,
        iota=lambda m: g.iota(f.iota(m)),
        convert_fn=convert_fn,
        key_mode=f"{f.key_mode}+{g.key_mode}",
        keygen_family=f"composite:{f.keygen_family}|{g.keygen_family}",
        complete_certified=f.complete_certified and g.complete_certified,
        correctness_unverified=not g.complete_certified,
        parts=(f, g),
        flags=flags,
        extend_fn=extend,
    )


def verified(b, trials, seed, lam=1):
    """Clear the unverified flag once a correctness run has no failures."""
    rate = check_bridge_correct(b, trials, seed, lam)
    if rate == 0:
        return dataclasses.replace(b, correctness_unverified=False), rate
    return b, rate


# ---------------------------------------------------------------------------
# concrete bridges

def identity_bridge(scheme, name=None):
    return make_bridge(name or f"identity[{scheme.name}]", scheme, scheme, lambda m: m,
                       lambda bk, raw, rng: raw, complete_certified=True)


def lwe_sum_bridge(params, arity=2, indices=(0, 1), name=None):
    """E^(arity) -> E summing the ciphertexts at `indices`."""
    base = make_lwe_scheme(params)
    source = fiber_power(base, arity)

    def convert_fn(bk, raw, rng):
        out = raw[indices[0]]
        for i in indices[1:]:
            out = lwe_add(params, out, raw[i])
        return out

    def iota(ms):
        v = 0
        for i in indices:
            v ^= ms[i]
        return v

    return make_bridge(name or f"lwe-sum{list(indices)}", source, base, iota, convert_fn)


def lwe_additive_bridge(params):
    """E^(2) -> E, (a1, b1), (a2, b2) -> (a1 + a2, b1 + b2); iota is XOR."""
    return lwe_sum_bridge(params, 2, (0, 1), name="lwe-additive")


def modswitch_bridge(q, Q, n, noise_bound=0):
    """LWE mod q -> LWE mod Q with interval decryption; scales by Q/q."""
    if Q % q:
        raise DivisibilityViolation(f"{q} does not divide {Q}")
    if q % 4 != 2 or Q % 4 != 2:
        raise InvalidParameters("modulus switching needs q, Q = 2 mod 4")
    factor = Q // q
    src = make_lwe_scheme(LweParams(n, q, noise_bound, "threshold"))
    tgt = make_lwe_scheme(LweParams(n, Q, noise_bound * factor, "threshold", allow_wide_noise=True))

    def stage2(lam, kb, rng):
        sk2 = tuple(kb["sk1"])
        return sk2, tgt.keypair_from_sk(sk2).pk

    return make_bridge(f"modswitch({q}->{Q})", src, tgt, lambda m: m,
                       lambda bk, raw, rng: lwe_scale(raw, factor, Q),
                       stage2=stage2, key_mode="derived", complete_certified=True)


def gm_identity_bridge(gm_params):
    return identity_bridge(make_gm_scheme(gm_params), name="gm-identity")


def sabotaged_bridge(params):
    """Identity on E that adds q/2 to b half of the time."""
    base = make_lwe_scheme(params)

    def convert_fn(bk, raw, rng):
        if rng.integers(2):
            return LweCiphertext(raw.a, (raw.b + params.half) % params.q)
        return raw

    return make_bridge("sabotaged", base, base, lambda m: m, convert_fn)


# half-key bridges

@dataclass(frozen=True)
class HalfKey:
    part: int
    bits: tuple
    total: int

    def __json__(self):
        return list(self.bits)


def bitstrings(width):
    return FiniteSet(f"{{0,1}}^{width}", 1 << width,
                     lambda: (tuple(int_bits(x, width)) for x in range(1 << width)),
                     lambda rng: tuple(int(b) for b in rng.integers(0, 2, size=width)),
                     lambda v: isinstance(v, tuple) and len(v) == width and set(v) <= {0, 1})


def appendix_scheme(base, width, suffix="+r"):
    """Ciphertexts carry `width` random trailing bits that decryption ignores."""
    enc, dec = base.encrypt_fn, base.decrypt_fn

    def encrypt_fn(pk, m, rng):
        return (enc(pk, m, rng), tuple(int(b) for b in rng.integers(0, 2, size=width)))

    ct_codec = None
    if base.ciphertext_codec is not None:
        ct_codec = concat_codecs([base.ciphertext_codec,
                                  BitCodec(width, lambda v: tuple(v), lambda bits: tuple(bits))])
    return dataclasses.replace(
        base,
        name=f"{base.name}{suffix}",
        ciphertext_space=FiniteSet.product([base.ciphertext_space, bitstrings(width)]),
        encrypt_fn=encrypt_fn,
        decrypt_fn=lambda sk, c: dec(sk, c[0]),
        ciphertext_codec=ct_codec,
        params={**base.params, "appendix": width, "base": base.name},
    )


def halfkey_bridges(base):
    """f: E -> E2 and g: E2 -> E3, each appending one half of the key bits."""
    e = base.key_bits
    if e is None:
        raise InvalidParameters(f"{base.name} has no key bit representation")
    if e % 2:
        raise OddKeyLength(f"key of {base.name} has {e} bits")
    half = e // 2
    e2 = appendix_scheme(base, half)
    e3 = appendix_scheme(e2, half)

    def stage3_for(part):
        def stage3(lam, kb, rng):
            bits = base.key_codec.encode(kb["sk1"])
            return HalfKey(part, tuple(bits[part * half:(part + 1) * half]), e)
        return stage3

    def append(bk, raw, rng):
        return (raw, bk.bits)

    family = f"halfkey:{base.name}"
    f = make_bridge("halfkey-f", base, e2, lambda m: m, append, stage3=stage3_for(0),
                    complete_certified=True, keygen_family=family)
    g = make_bridge("halfkey-g", e2, e3, lambda m: m, append, stage3=stage3_for(1),
                    complete_certified=True, keygen_family=family)
    return f, g


def find_halfkeys(obj, found=None):
    """All HalfKey values inside a nested public structure."""
    found = {} if found is None else found
    if isinstance(obj, HalfKey):
        found[obj.part] = obj
    elif isinstance(obj, (tuple, list)):
        for x in obj:
            find_halfkeys(x, found)
    elif isinstance(obj, KeyBundle):
        find_halfkeys((obj.pk1, obj.pk2, obj.bk), found)
    return found


# revealing variant

def revealing_scheme(base):
    """Enc'(m) = (Enc(m), m): decryption reads the first part."""
    enc, dec = base.encrypt_fn, base.decrypt_fn
    return dataclasses.replace(
        base,
        name=f"{base.name}+m",
        ciphertext_space=FiniteSet.product([base.ciphertext_space, BITS]),
        encrypt_fn=lambda pk, m, rng: (enc(pk, m, rng), m),
        decrypt_fn=lambda sk, c: dec(sk, c[0]),
        ciphertext_codec=None,
        params={**base.params, "reveals_plaintext": True},
    )


def revealing_bridges(f, g):
    """f' appends a random bit, g' drops it; E2' reveals plaintexts."""
    e2p = revealing_scheme(f.target)

    def f_convert(bk, raw, rng):
        return (f.convert_fn(bk, raw, rng), int(rng.integers(2)))

    def g_convert(bk, raw, rng):
        return g.convert_fn(bk, raw[0], rng)

    fp = dataclasses.replace(f, name=f"{f.name}'", target=e2p, convert_fn=f_convert,
                             complete_certified=False)
    gp = dataclasses.replace(g, name=f"{g.name}'", source=e2p, convert_fn=g_convert,
                             complete_certified=g.complete_certified)
    return fp, gp, e2p


# concatenation

def concat_bridges(bs, name=None):
    """Apply every bridge to the same source tuple; target is the s-fold power."""
    bs = list(bs)
    if not bs:
        raise ValueError("need at least one bridge")
    first = bs[0]
    for b in bs[1:]:
        if b.source.name != first.source.name or b.target.name != first.target.name:
            raise SchemeMismatch("concatenated bridges must share source and target")
        if b.keygen_family != first.keygen_family:
            raise KeyBundleMismatch(f"{b.name} and {first.name} generate different key bundles")
    target = fiber_power(first.target, len(bs))

    def convert_fn(bk, raw, rng):
        return tuple(b.convert_fn(bk, raw, rng) for b in bs)

    return dataclasses.replace(
        first,
        name=name or "concat[" + ",".join(b.name for b in bs) + "]",
        target=target,
        iota=lambda m: tuple(b.iota(m) for b in bs),
        convert_fn=convert_fn,
        complete_certified=all(b.complete_certified for b in bs),
        parts=tuple(bs),
    )


def double_additive_bridge(params):
    """E^(4) -> E^(2) -> E: pairwise sums, then one more sum."""
    pair = concat_bridges([lwe_sum_bridge(params, 4, (0, 1)), lwe_sum_bridge(params, 4, (2, 3))],
                          name="pairwise-add")
    return dataclasses.replace(compose(pair, lwe_additive_bridge(params)), name="double-additive")
