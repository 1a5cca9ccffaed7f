"""Public-key encryption schemes as plain values, plus the generic
constructions that apply to any scheme: fiber powers, augmentation with
public auxiliary data, and the graph scheme of a bridge.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional

from .errors import EmptySpace, NonEnumerableSpace, SpaceMismatch
from .rng import derive_rng


def check_lambda(lam):
    if not isinstance(lam, int) or lam < 1:
        raise ValueError(f"security parameter must be a positive integer, got {lam!r}")
    return lam


# ---------------------------------------------------------------------------
# finite sets

@dataclass(frozen=True, eq=False)
class FiniteSet:
    """A plaintext or ciphertext space.

    Enumerable sets iterate in a fixed lexicographic order; samplable-only
    sets just draw uniform elements. Products of enumerable sets are
    themselves enumerable.
    """
    name: str
    size: Optional[int]
    iterate: Optional[Callable[[], Iterable]]
    sample_fn: Callable[[Any], Any]
    contains: Callable[[Any], bool]
    factors: tuple = ()

    @property
    def mode(self):
        if self.factors:
            return "product" if self.enumerable else "samplable"
        return "enumerable" if self.iterate is not None else "samplable"

    @property
    def enumerable(self):
        return self.iterate is not None

    def __iter__(self):
        if self.iterate is None:
            raise NonEnumerableSpace(f"{self.name} can only be sampled")
        return iter(self.iterate())

    def __contains__(self, value):
        return self.contains(value)

    def sample(self, rng):
        return self.sample_fn(rng)

    @classmethod
    def of(cls, name, elements):
        elements = tuple(elements)
        members = set(elements)

        def sample(rng):
            if not elements:
                raise EmptySpace(name)
            return elements[int(rng.integers(len(elements)))]

        return cls(name, len(elements), lambda: elements, sample, members.__contains__)

    @classmethod
    def samplable(cls, name, sampler, contains=lambda _: True, size=None):
        return cls(name, size, None, sampler, contains)

    @classmethod
    def product(cls, sets):
        sets = tuple(sets)
        name = " x ".join(s.name for s in sets)
        size = None
        if all(s.size is not None for s in sets):
            size = 1
            for s in sets:
                size *= s.size
        iterate = None
        if all(s.enumerable for s in sets):
            iterate = lambda: itertools.product(*(s.iterate() for s in sets))

        def contains(value):
            return (isinstance(value, tuple) and len(value) == len(sets)
                    and all(v in s for v, s in zip(value, sets)))

        return cls(name, size, iterate,
                   lambda rng: tuple(s.sample(rng) for s in sets), contains, sets)


BITS = FiniteSet.of("{0,1}", (0, 1))


@dataclass(frozen=True)
class BitCodec:
    """Fixed-width little-endian bit representation.

    ``decode`` returns None for bit strings that encode no element.
    """
    width: int
    encode: Callable[[Any], tuple]
    decode: Callable[[tuple], Any]


def int_bits(value, width):
    return tuple((value >> i) & 1 for i in range(width))


def bits_int(bits):
    return sum(b << i for i, b in enumerate(bits))


def residue_vector_codec(q, length):
    """Codec for vectors in Z_q^length, each coordinate on ceil(log2 q) bits."""
    w = max(1, (q - 1).bit_length())

    def encode(vec):
        return tuple(b for x in vec for b in int_bits(x, w))

    def decode(bits):
        vec = tuple(bits_int(bits[i * w:(i + 1) * w]) for i in range(length))
        return vec if all(x < q for x in vec) else None

    return BitCodec(w * length, encode, decode)


def concat_codecs(codecs):
    codecs = tuple(codecs)
    width = sum(c.width for c in codecs)

    def encode(values):
        return tuple(b for c, v in zip(codecs, values) for b in c.encode(v))

    def decode(bits):
        out, pos = [], 0
        for c in codecs:
            v = c.decode(tuple(bits[pos:pos + c.width]))
            if v is None:
                return None
            out.append(v)
            pos += c.width
        return tuple(out)

    return BitCodec(width, encode, decode)


# ---------------------------------------------------------------------------
# keys and ciphertexts

@dataclass(frozen=True, eq=False)
class Ciphertext:
    scheme: str
    value: Any

    def __json__(self):
        return self.value

    def __repr__(self):
        return f"Ciphertext({self.scheme!r}, {self.value!r})"


@dataclass(frozen=True, eq=False)
class KeyPair:
    sk: Any
    pk: Any
    evk: Any = None


class SecretKeyOracle:
    """Encryption capability of a symmetric scheme.

    Symmetric schemes publish this in place of a public key so that the
    IND-CPA harness can hand the adversary an encryption oracle without
    handing over the key itself.
    """
    __slots__ = ("scheme", "_sk")

    def __init__(self, scheme, sk):
        self.scheme = scheme
        self._sk = sk

    def __repr__(self):
        return f"SecretKeyOracle({self.scheme!r})"

    def __json__(self):
        return []


@dataclass(frozen=True, eq=False)
class SchemeDescriptor:
    name: str
    plaintext_space: FiniteSet
    ciphertext_space: FiniteSet
    keygen_fn: Callable
    encrypt_fn: Callable
    decrypt_fn: Callable
    aux_public: tuple = ()
    key_codec: Optional[BitCodec] = None
    ciphertext_codec: Optional[BitCodec] = None
    key_space: Optional[FiniteSet] = None
    keypair_from_sk: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    @property
    def key_bits(self):
        return self.key_codec.width if self.key_codec else None

    def keygen(self, lam, rng):
        check_lambda(lam)
        return self.keygen_fn(lam, rng)

    def wrap(self, raw):
        return Ciphertext(self.name, raw)

    def unwrap(self, c):
        if not isinstance(c, Ciphertext):
            raise SpaceMismatch(f"{self.name} expects a tagged ciphertext, got {type(c).__name__}")
        if c.scheme != self.name:
            raise SpaceMismatch(f"ciphertext of {c.scheme} passed to {self.name}")
        return c.value

    def encrypt(self, pk, m, rng):
        if m not in self.plaintext_space:
            raise ValueError(f"{m!r} is not a plaintext of {self.name}")
        return Ciphertext(self.name, self.encrypt_fn(pk, m, rng))

    def decrypt(self, sk, c):
        return self.decrypt_fn(sk, self.unwrap(c))

    def enumerate_keypairs(self):
        if self.key_space is None or self.keypair_from_sk is None or not self.key_space.enumerable:
            raise NonEnumerableSpace(f"key space of {self.name} is not enumerable")
        for sk in self.key_space:
            yield self.keypair_from_sk(sk)


def check_correctness(scheme, lam, trials, seed, batch_size=100):
    """Fraction of fresh encryptions that fail to decrypt.

    One key pair per batch of ``batch_size`` trials; messages are uniform.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if scheme.plaintext_space.size == 0:
        raise EmptySpace(f"{scheme.name} has an empty plaintext space")
    failures = 0
    keys = None
    for i in range(trials):
        if i % batch_size == 0:
            keys = scheme.keygen(lam, derive_rng(seed, "keygen", i // batch_size))
        rng = derive_rng(seed, "trial", i)
        m = scheme.plaintext_space.sample(rng)
        if scheme.decrypt(keys.sk, scheme.encrypt(keys.pk, m, rng)) != m:
            failures += 1
    return Fraction(failures, trials)


def fiber_power(scheme, k):
    """k-tuples of plaintexts encrypted componentwise under one key pair."""
    if k < 1:
        raise ValueError("fiber power needs k >= 1")
    enc, dec = scheme.encrypt_fn, scheme.decrypt_fn

    def encrypt_fn(pk, ms, rng):
        return tuple(enc(pk, m, rng) for m in ms)

    def decrypt_fn(sk, cs):
        return tuple(dec(sk, c) for c in cs)

    ct_codec = None
    if scheme.ciphertext_codec is not None:
        ct_codec = concat_codecs([scheme.ciphertext_codec] * k)
    return dataclasses.replace(
        scheme,
        name=f"{scheme.name}^({k})",
        plaintext_space=FiniteSet.product([scheme.plaintext_space] * k),
        ciphertext_space=FiniteSet.product([scheme.ciphertext_space] * k),
        encrypt_fn=encrypt_fn,
        decrypt_fn=decrypt_fn,
        ciphertext_codec=ct_codec,
        params={**scheme.params, "fiber": k, "base": scheme.name},
    )


def augment(scheme, aux):
    """The same scheme with extra public information attached."""
    if not aux:
        return scheme
    return dataclasses.replace(scheme, aux_public=scheme.aux_public + tuple(aux))


def graph_scheme(bridge, shared_randomness=False):
    """Scheme packaging a bridge: Enc(m) = (Enc1(m), f(bk, Enc1(m))).

    By default the two inner encryptions are independent samples; pass
    ``shared_randomness=True`` to convert the very ciphertext that forms
    the first component.
    """
    source, target = bridge.source, bridge.target

    def keygen_fn(lam, rng):
        kb = bridge.keygen(lam, rng)
        return KeyPair(sk=(kb.sk1, kb.sk2), pk=(kb.pk1, kb.pk2, kb.bk))

    def encrypt_fn(pk, m, rng):
        pk1, _, bk = pk
        first = source.encrypt(pk1, m, rng)
        second = first if shared_randomness else source.encrypt(pk1, m, rng)
        converted = bridge.convert(bk, second, rng)
        return (first.value, target.unwrap(converted))

    def decrypt_fn(sk, value):
        return source.decrypt_fn(sk[0], value[0])

    return SchemeDescriptor(
        name=f"G[{bridge.name}]",
        plaintext_space=source.plaintext_space,
        ciphertext_space=FiniteSet.product([source.ciphertext_space, target.ciphertext_space]),
        keygen_fn=keygen_fn,
        encrypt_fn=encrypt_fn,
        decrypt_fn=decrypt_fn,
        params={"bridge": bridge.name, "shared_randomness": shared_randomness},
    )
