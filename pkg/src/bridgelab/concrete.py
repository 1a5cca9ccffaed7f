"""Toy concrete schemes: the symmetric bit-LWE scheme, its modulus family
with interval decryption, and Goldwasser-Micali.

All parameter sets here are insecure on purpose; they are sized so that
spaces can be enumerated exhaustively.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

from sympy import isprime
from sympy.functions.combinatorial.numbers import jacobi_symbol

from .core import (BITS, BitCodec, FiniteSet, KeyPair, SchemeDescriptor,
                   SecretKeyOracle, residue_vector_codec)
from .errors import InvalidParameters

# ---------------------------------------------------------------------------
# LWE


@dataclass(frozen=True)
class LweParams:
    n: int
    q: int
    noise_bound: int
    decryption: str = "round"
    allow_wide_noise: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameters("n must be positive")
        if self.q < 2 or self.q % 2:
            raise InvalidParameters("q must be an even modulus >= 2")
        if self.noise_bound < 0:
            raise InvalidParameters("noise bound must be non-negative")
        if not self.allow_wide_noise and 8 * self.noise_bound >= self.q:
            raise InvalidParameters(f"noise bound {self.noise_bound} is not < q/8 = {self.q / 8}")
        if self.decryption not in ("round", "threshold"):
            raise InvalidParameters(f"unknown decryption rule {self.decryption!r}")

    @property
    def half(self):
        return self.q // 2


@dataclass(frozen=True)
class LweCiphertext:
    a: tuple
    b: int


def centered(x, q):
    """Representative of x mod q in (-q/2, q/2]."""
    r = x % q
    return r - q if 2 * r > q else r


def round_half_away(num, den):
    """num/den rounded to the nearest integer, ties away from zero."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    mag = (2 * abs(num) + den) // (2 * den)
    return mag if num >= 0 else -mag


def round_half_even(num, den):
    fl, rem = divmod(num, den)
    if 2 * rem > den or (2 * rem == den and fl % 2):
        return fl + 1
    return fl


def dot(a, s, q):
    return sum(x * y for x, y in zip(a, s)) % q


def lwe_encrypt(params, sk, m, rng, a=None, e=None):
    if m not in (0, 1):
        raise ValueError(f"LWE plaintexts are bits, got {m!r}")
    q = params.q
    if a is None:
        a = tuple(int(x) for x in rng.integers(0, q, size=params.n))
    if e is None:
        e = int(rng.integers(-params.noise_bound, params.noise_bound + 1))
    b = (dot(a, sk, q) + m * params.half + e) % q
    return LweCiphertext(tuple(a), b)


def lwe_phase(params, sk, c):
    return centered(c.b - dot(c.a, sk, params.q), params.q)


def lwe_decrypt(params, sk, c, rounding=round_half_away):
    """round(2(b - a.sk)/q) mod 2 on the centered representative."""
    return rounding(2 * lwe_phase(params, sk, c), params.q) % 2


def lwe_threshold_decrypt(params, s, c):
    """0 iff b - <a,s> lies in the open interval (-q/4, q/4)."""
    return 0 if 4 * abs(lwe_phase(params, s, c)) < params.q else 1


def lwe_add(params, c1, c2):
    q = params.q
    return LweCiphertext(tuple((x + y) % q for x, y in zip(c1.a, c2.a)), (c1.b + c2.b) % q)


def lwe_scale(c, factor, modulus):
    return LweCiphertext(tuple(x * factor % modulus for x in c.a), c.b * factor % modulus)


def lwe_ciphertext_space(n, q):
    def iterate():
        for a in itertools.product(range(q), repeat=n):
            for b in range(q):
                yield LweCiphertext(a, b)

    def sample(rng):
        return LweCiphertext(tuple(int(x) for x in rng.integers(0, q, size=n)), int(rng.integers(q)))

    def contains(c):
        return (isinstance(c, LweCiphertext) and len(c.a) == n
                and all(0 <= x < q for x in c.a) and 0 <= c.b < q)

    return FiniteSet(f"Z_{q}^{n + 1}", q ** (n + 1), iterate, sample, contains)


def lwe_ciphertext_codec(n, q):
    inner = residue_vector_codec(q, n + 1)

    def decode(bits):
        vec = inner.decode(bits)
        return None if vec is None else LweCiphertext(vec[:n], vec[n])

    return BitCodec(inner.width, lambda c: inner.encode(tuple(c.a) + (c.b,)), decode)


def lwe_name(params):
    tag = ",thr" if params.decryption == "threshold" else ""
    return f"lwe(n={params.n},q={params.q},B={params.noise_bound}{tag})"


def make_lwe_scheme(params):
    """The symmetric bit-LWE scheme; pk is an encryption oracle over sk."""
    name = lwe_name(params)
    n, q = params.n, params.q
    decrypt = lwe_threshold_decrypt if params.decryption == "threshold" else lwe_decrypt

    def keypair_from_sk(sk):
        sk = tuple(sk)
        return KeyPair(sk=sk, pk=SecretKeyOracle(name, sk))

    def keygen_fn(lam, rng):
        return keypair_from_sk(int(x) for x in rng.integers(0, q, size=n))

    key_space = FiniteSet(f"Z_{q}^{n}", q ** n,
                          lambda: itertools.product(range(q), repeat=n),
                          lambda rng: tuple(int(x) for x in rng.integers(0, q, size=n)),
                          lambda s: len(s) == n and all(0 <= x < q for x in s))
    return SchemeDescriptor(
        name=name,
        plaintext_space=BITS,
        ciphertext_space=lwe_ciphertext_space(n, q),
        keygen_fn=keygen_fn,
        encrypt_fn=lambda pk, m, rng: lwe_encrypt(params, pk._sk, m, rng),
        decrypt_fn=lambda sk, c: decrypt(params, sk, c),
        key_codec=residue_vector_codec(q, n),
        ciphertext_codec=lwe_ciphertext_codec(n, q),
        key_space=key_space,
        keypair_from_sk=keypair_from_sk,
        params={"family": "lwe", "lwe": params},
    )


def decryption_disagreements(params, sk, rounding=round_half_away):
    """Ciphertexts on which rounding and interval decryption differ."""
    return [c for c in lwe_ciphertext_space(params.n, params.q)
            if lwe_decrypt(params, sk, c, rounding) != lwe_threshold_decrypt(params, sk, c)]


# ---------------------------------------------------------------------------
# Goldwasser-Micali


def find_pseudosquare(p, q_prime):
    """Smallest z > 1 with Jacobi(z, N) = +1 that is a non-residue mod p."""
    n = p * q_prime
    for z in range(2, n):
        if gcd(z, n) == 1 and jacobi_symbol(z, n) == 1 and pow(z, (p - 1) // 2, p) == p - 1:
            return z
    raise InvalidParameters(f"no pseudo-square modulo {n}")


@dataclass(frozen=True)
class GmParams:
    p: int
    q_prime: int

    def __post_init__(self):
        p, q = self.p, self.q_prime
        if p == q or p % 2 == 0 or q % 2 == 0 or not (isprime(p) and isprime(q)):
            raise InvalidParameters("GM needs two distinct odd primes")

    @property
    def N(self):
        return self.p * self.q_prime

    @property
    def z(self):
        return find_pseudosquare(self.p, self.q_prime)


def gm_encrypt(params, m, rng, r=None, z=None):
    if m not in (0, 1):
        raise ValueError(f"GM plaintexts are bits, got {m!r}")
    n = params.N
    z = params.z if z is None else z
    while r is None or gcd(r, n) != 1:
        r = int(rng.integers(1, n))
    return pow(z, m, n) * r * r % n


def gm_decrypt(params, c):
    """0 iff c is a quadratic residue modulo p (Euler's criterion)."""
    p = params.p
    return 0 if pow(c, (p - 1) // 2, p) == 1 else 1


def jacobi_one(n):
    return [x for x in range(1, n) if gcd(x, n) == 1 and jacobi_symbol(x, n) == 1]


def gm_image(params):
    """Exhaustive image of gm_encrypt for each plaintext, over every r in Z_N^*."""
    n, z = params.N, params.z
    squares = {r * r % n for r in range(1, n) if gcd(r, n) == 1}
    return {0: squares, 1: {z * s % n for s in squares}}


def make_gm_scheme(params):
    n, z = params.N, params.z
    name = f"gm(N={n})"
    units = jacobi_one(n)
    member = set(units)
    keypair = KeyPair(sk=(params.p, params.q_prime), pk=(n, z))
    ct_width = (n - 1).bit_length()

    def decode_ct(bits):
        x = sum(b << i for i, b in enumerate(bits))
        return x if x in member else None

    return SchemeDescriptor(
        name=name,
        plaintext_space=BITS,
        ciphertext_space=FiniteSet.of(f"J1({n})", units),
        keygen_fn=lambda lam, rng: keypair,
        encrypt_fn=lambda pk, m, rng: gm_encrypt(params, m, rng, z=pk[1]),
        decrypt_fn=lambda sk, c: gm_decrypt(params, c),
        ciphertext_codec=BitCodec(ct_width, lambda c: tuple((c >> i) & 1 for i in range(ct_width)),
                                  decode_ct),
        key_space=FiniteSet.of("gm-keys", [keypair.sk]),
        keypair_from_sk=lambda sk: keypair,
        params={"family": "gm", "gm": params},
    )
