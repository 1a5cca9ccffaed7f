"""Homomorphic schemes: the evaluation contract and two backends.

TrivialFHE encrypts a bit as itself. GSW-lite is a leveled GSW bit scheme
with gadget base 2, a binary secret and exact worst-case noise tracking:
every evaluation is certified before it runs, so correctness on fresh
inputs is deterministic rather than probabilistic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .circuits import arithmetize, depth, eval_boolean, evaluate_ring, integer_ring, Ring
from .core import (BITS, BitCodec, Ciphertext, FiniteSet, KeyPair, SchemeDescriptor,
                   bits_int, int_bits)
from .errors import ArityMismatch, CircuitOutOfClass, InvalidParameters
from .serialize import to_jsonable


@dataclass(frozen=True, eq=False)
class HomSchemeDescriptor:
    """A base scheme plus Eval.

    ``ring(evk)`` gives the ring on raw ciphertext values, ``lift`` and
    ``lower`` convert between raw values and ring elements, and
    ``certify(circuit, input_noise)`` either returns a noise report or
    raises CircuitOutOfClass.
    """
    base: SchemeDescriptor
    plaintext_ring: Ring
    ring: Callable
    lift: Callable
    lower: Callable
    certify: Callable
    trivial: Callable
    evaluable_class: dict
    compact_bound: int
    ciphertext_bits: Callable
    fresh_noise: int = 0
    params: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.base.name

    def keygen(self, lam, rng):
        return self.base.keygen(lam, rng)

    def encrypt(self, pk, m, rng):
        return self.base.encrypt(pk, m, rng)

    def decrypt(self, sk, c):
        return self.base.decrypt(sk, c)


def eval_multi(h, evk, circuit, inputs, rng=None, input_noise=None, certify=True):
    """Evaluate every output of circuit; returns a tuple of ciphertexts."""
    if len(inputs) != circuit.arity:
        raise ArityMismatch(f"circuit takes {circuit.arity} inputs, got {len(inputs)}")
    raws = [h.base.unwrap(c) for c in inputs]
    if "eval_override" in h.params:
        return tuple(h.base.wrap(v) for v in h.params["eval_override"](circuit, raws))
    if certify:
        h.certify(circuit, h.fresh_noise if input_noise is None else input_noise)
    ring = h.ring(evk)
    noise = _per_input(h.fresh_noise if input_noise is None else input_noise, len(raws))
    values = [h.lift(r, e) for r, e in zip(raws, noise)]
    out = evaluate_ring(arithmetize(circuit), ring, values)
    return tuple(h.base.wrap(h.lower(v)) for v in out)


def eval(h, evk, circuit, inputs, rng=None, input_noise=None, certify=True):  # noqa: A001
    if len(circuit.outputs) != 1:
        raise ArityMismatch("eval takes a single-output circuit; use eval_multi")
    return eval_multi(h, evk, circuit, inputs, rng, input_noise, certify)[0]


def _per_input(noise, count):
    if isinstance(noise, (list, tuple)):
        if len(noise) != count:
            raise ArityMismatch("one noise bound per input expected")
        return list(noise)
    return [noise] * count


def compactness_check(h, circuits, seed=0, lam=1):
    """True iff every Eval output fits in h.compact_bound bits."""
    from .rng import derive_rng
    keys = h.keygen(lam, derive_rng(seed, "compact-keygen"))
    for i, c in enumerate(circuits):
        rng = derive_rng(seed, "compact", i)
        ins = [h.encrypt(keys.pk, int(rng.integers(2)), rng) for _ in range(c.arity)]
        for out in eval_multi(h, keys.evk, c, ins, rng):
            if h.ciphertext_bits(h.base.unwrap(out)) > h.compact_bound:
                return False
    return True


# ---------------------------------------------------------------------------
# TrivialFHE


def trivial_fhe():
    """Ring Z_2, Enc(m) = m, a one-bit key that decryption ignores."""
    def keypair_from_sk(sk):
        return KeyPair(sk=sk, pk=(), evk=())

    base = SchemeDescriptor(
        name="trivial",
        plaintext_space=BITS,
        ciphertext_space=BITS,
        keygen_fn=lambda lam, rng: keypair_from_sk(int(rng.integers(2))),
        encrypt_fn=lambda pk, m, rng: m,
        decrypt_fn=lambda sk, c: c,
        key_codec=BitCodec(1, lambda sk: (sk,), lambda bits: bits[0]),
        ciphertext_codec=BitCodec(1, lambda c: (c,), lambda bits: bits[0]),
        key_space=BITS,
        keypair_from_sk=keypair_from_sk,
        params={"family": "trivial"},
    )
    z2 = integer_ring(2)
    return HomSchemeDescriptor(
        base=base,
        plaintext_ring=z2,
        ring=lambda evk: z2,
        lift=lambda raw, noise: raw,
        lower=lambda v: v,
        certify=lambda circuit, noise=0: {"ok": True, "bound": 0, "limit": None},
        trivial=lambda v: v & 1,
        evaluable_class={"kind": "all"},
        compact_bound=1,
        ciphertext_bits=lambda raw: 1,
        params={"family": "trivial", "fully_composable": True},
    )


# ---------------------------------------------------------------------------
# a deliberately non-compact backend


def concat_mock():
    """Eval returns (circuit, inputs); decryption replays the circuit."""
    def decrypt_fn(sk, c):
        if isinstance(c, int):
            return c
        circuit, ins, j = c
        return eval_boolean(circuit, [decrypt_fn(sk, x) for x in ins])[j]

    base = SchemeDescriptor(
        name="concat-mock",
        plaintext_space=BITS,
        ciphertext_space=FiniteSet.samplable("concat-mock-ct", lambda rng: int(rng.integers(2))),
        keygen_fn=lambda lam, rng: KeyPair(sk=0, pk=(), evk=()),
        encrypt_fn=lambda pk, m, rng: m,
        decrypt_fn=decrypt_fn,
        params={"family": "mock"},
    )

    def size(raw):
        return 8 * len(json.dumps(to_jsonable(raw)))

    def eval_hook(circuit, raws):
        return tuple((circuit, tuple(raws), j) for j in range(len(circuit.outputs)))

    return HomSchemeDescriptor(
        base=base,
        plaintext_ring=integer_ring(2),
        ring=lambda evk: integer_ring(2),
        lift=lambda raw, noise: raw,
        lower=lambda v: v,
        certify=lambda circuit, noise=0: {"ok": True, "bound": 0, "limit": None},
        trivial=lambda v: v & 1,
        evaluable_class={"kind": "all"},
        compact_bound=64,
        ciphertext_bits=size,
        params={"family": "mock", "eval_override": eval_hook},
    )


# ---------------------------------------------------------------------------
# GSW-lite


@dataclass(frozen=True)
class GswParams:
    n: int
    log_q: int
    beta: int = 1
    levels: int = 1

    def __post_init__(self):
        if self.n < 1 or self.log_q < 3 or self.beta < 0 or self.levels < 0:
            raise InvalidParameters("GSW needs n >= 1, log q >= 3, beta >= 0, levels >= 0")
        if 8 * self.fresh_noise >= self.q:
            raise InvalidParameters(f"fresh noise {self.fresh_noise} is not below q/8")
        if 8 * level_bound(self.N, self.fresh_noise, self.levels) >= self.q:
            raise InvalidParameters(
                f"{self.levels} levels do not fit q = 2^{self.log_q}; "
                f"required q = 2^{required_log_q(self.n, self.beta, self.levels)}")

    @property
    def q(self):
        return 1 << self.log_q

    @property
    def N(self):
        return (self.n + 1) * self.log_q

    @property
    def fresh_noise(self):
        """|e R| <= N beta for a binary N x N matrix R."""
        return self.N * self.beta

    @property
    def wide(self):
        return self.log_q > 64


def level_growth(N):
    """Worst-case noise factor of one lifted XOR level, the costlier gate.

    With s = x + y, the node 2s - s*s has noise at most (N + 4)(E1 + E2).
    """
    return 2 * N + 8


def level_bound(N, fresh, levels):
    return level_growth(N) ** levels * fresh


def required_log_q(n, beta, levels):
    """Smallest k with (2N+8)^levels * N beta < 2^k / 8, N = (n+1)k."""
    k = 3
    while 8 * level_bound((n + 1) * k, (n + 1) * k * beta, levels) >= 1 << k:
        k += 1
    return k


def noise_budget_check(params, circuit):
    """Depth-based budget test: (2N+8)^depth * B < q/8 with B the fresh bound."""
    d = depth(circuit)
    bound = level_bound(params.N, params.fresh_noise, d)
    k = required_log_q(params.n, params.beta, d)
    return {"ok": 8 * bound < params.q, "depth": d, "bound": bound,
            "limit": params.q // 8, "required_q": 1 << k, "required_log_q": k}


def _dtype(params):
    return object if params.wide else np.uint64


def _reduce(params, mat):
    if params.wide:
        return mat % params.q
    if params.log_q == 64:
        return mat
    return mat & np.uint64(params.q - 1)


def uniform_mod(params, rng, shape):
    k = params.log_q
    if not params.wide:
        m = rng.integers(0, 1 << 64, size=shape, dtype=np.uint64)
        return _reduce(params, m)
    words = (k + 63) // 64
    out = np.zeros(shape, dtype=object)
    for w in range(words):
        part = rng.integers(0, 1 << 64, size=shape, dtype=np.uint64).astype(object)
        out = out + part * (1 << (64 * w))
    return out % params.q


def gadget(params):
    n1, k = params.n + 1, params.log_q
    g = np.zeros((n1, n1 * k), dtype=_dtype(params))
    for i in range(n1):
        for j in range(k):
            g[i, i * k + j] = 1 << j
    return g


def gadget_inverse(params, mat):
    """Binary N x N matrix D with gadget @ D = mat."""
    k = params.log_q
    n1, cols = mat.shape
    if params.wide:
        shifts = np.array([j for j in range(k)], dtype=object)[None, :, None]
        bits = (mat[:, None, :] >> shifts) & 1
    else:
        shifts = np.arange(k, dtype=np.uint64)[None, :, None]
        bits = (mat[:, None, :] >> shifts) & np.uint64(1)
    return bits.reshape(n1 * k, cols)


def _matmul(params, a, b):
    return _reduce(params, a @ b)


@dataclass(frozen=True, eq=False)
class GswKey:
    s: tuple
    t: Any


@dataclass(frozen=True, eq=False)
class GswPublicKey:
    A: Any

    def __json__(self):
        return self.A


@dataclass(frozen=True, eq=False)
class GswValue:
    """A ciphertext matrix with its certified noise and plaintext bounds."""
    mat: Any
    noise: int
    msg: int


def gsw_key_from_bits(params, s):
    t = np.array([(-x) % params.q for x in s] + [1], dtype=_dtype(params))
    return GswKey(tuple(int(x) for x in s), t)


def gsw_keygen(params, rng):
    s = tuple(int(x) for x in rng.integers(0, 2, size=params.n))
    key = gsw_key_from_bits(params, s)
    B = uniform_mod(params, rng, (params.n, params.N))
    e = rng.integers(-params.beta, params.beta + 1, size=params.N)
    e = np.array([int(x) % params.q for x in e], dtype=_dtype(params))
    s_vec = np.array(s, dtype=_dtype(params))
    b = _reduce(params, s_vec @ B + e)
    A = np.vstack([B, b[None, :]])
    return KeyPair(sk=key, pk=GswPublicKey(A), evk=())


def gsw_encrypt(params, pk, m, rng, G=None):
    if m not in (0, 1):
        raise ValueError(f"GSW-lite encrypts bits, got {m!r}")
    G = gadget(params) if G is None else G
    R = rng.integers(0, 2, size=(params.N, params.N)).astype(_dtype(params))
    C = _matmul(params, pk.A, R)
    if m:
        C = _reduce(params, C + G)
    return C


def gsw_phase_row(params, sk, C):
    return _reduce(params, sk.t @ C)


def _centered(x, q):
    x = int(x) % q
    return x - q if 2 * x > q else x


def gsw_decrypt(params, sk, C):
    """0 iff the phase at the top gadget column is inside (-q/4, q/4)."""
    col = params.n * params.log_q + params.log_q - 1
    phase = _centered(int(np.dot(sk.t, C[:, col])), params.q)
    return 0 if 4 * abs(phase) < params.q else 1


def gsw_noise(params, sk, C, m):
    """Max |t C - m t G| over all columns, centered mod q."""
    row = sk.t @ C
    tg = sk.t @ gadget(params)
    return max(abs(_centered(int(r) - int(m) * int(g), params.q)) for r, g in zip(row, tg))


def gsw_ring(params, G):
    N = params.N
    zero = GswValue(np.zeros_like(G), 0, 0)
    one = GswValue(G, 0, 1)

    def add(x, y):
        return GswValue(_reduce(params, x.mat + y.mat), x.noise + y.noise, x.msg + y.msg)

    def sub(x, y):
        return GswValue(_reduce(params, x.mat - y.mat), x.noise + y.noise, x.msg + y.msg)

    def mul(x, y):
        # noise of C1 G^-1(C2) is at most N E1 + M1 E2: the quieter operand goes first
        if N * x.noise + x.msg * y.noise > N * y.noise + y.msg * x.noise:
            x, y = y, x
        mat = _matmul(params, x.mat, gadget_inverse(params, y.mat))
        return GswValue(mat, N * x.noise + x.msg * y.noise, x.msg * y.msg)

    return Ring(f"GSW(q=2^{params.log_q})", zero, one, add, sub, mul,
                bit=lambda v: GswValue(v.mat, v.noise, 1))


def noise_ring(N):
    """The bound arithmetic of gsw_ring alone, on (noise, msg) pairs."""
    def mul(x, y):
        return min((N * x[0] + x[1] * y[0], x[1] * y[1]), (N * y[0] + y[1] * x[0], x[1] * y[1]))

    return Ring("noise", (0, 0), (0, 1),
                add=lambda x, y: (x[0] + y[0], x[1] + y[1]),
                sub=lambda x, y: (x[0] + y[0], x[1] + y[1]),
                mul=mul,
                bit=lambda v: (v[0], 1))


def certified_noise(N, circuit, input_noise):
    noise = _per_input(input_noise, circuit.arity)
    out = evaluate_ring(arithmetize(circuit), noise_ring(N), [(e, 1) for e in noise])
    return max((v[0] for v in out), default=0)


def gsw_name(params):
    return f"gsw(n={params.n},q=2^{params.log_q},beta={params.beta})"


def make_gsw(params):
    name = gsw_name(params)
    G = gadget(params)
    n, k = params.n, params.log_q
    width = (n + 1) * params.N * k

    def certify(circuit, input_noise=None):
        bound = certified_noise(params.N, circuit,
                                params.fresh_noise if input_noise is None else input_noise)
        report = {"ok": 4 * bound < params.q, "bound": bound, "limit": params.q // 4,
                  "depth": depth(circuit)}
        if not report["ok"]:
            raise CircuitOutOfClass(
                f"worst-case noise {bound} reaches q/4 = {params.q // 4} on {name}")
        return report

    def encode_ct(C):
        return tuple(b for x in C.reshape(-1) for b in int_bits(int(x), k))

    def decode_ct(bits):
        vals = [bits_int(bits[i * k:(i + 1) * k]) for i in range(len(bits) // k)]
        return np.array(vals, dtype=_dtype(params)).reshape(n + 1, params.N)

    base = SchemeDescriptor(
        name=name,
        plaintext_space=BITS,
        ciphertext_space=FiniteSet.samplable(
            f"Z_2^{k}^({n + 1}x{params.N})",
            lambda rng: uniform_mod(params, rng, (n + 1, params.N)),
            lambda C: getattr(C, "shape", None) == (n + 1, params.N)),
        keygen_fn=lambda lam, rng: gsw_keygen(params, rng),
        encrypt_fn=lambda pk, m, rng: gsw_encrypt(params, pk, m, rng, G),
        decrypt_fn=lambda sk, C: gsw_decrypt(params, sk, C),
        key_codec=BitCodec(n, lambda sk: tuple(sk.s), lambda bits: gsw_key_from_bits(params, bits)),
        ciphertext_codec=BitCodec(width, encode_ct, decode_ct),
        key_space=FiniteSet.samplable("{0,1}^%d" % n, lambda rng: tuple(
            int(x) for x in rng.integers(0, 2, size=n))),
        params={"family": "gsw", "gsw": params},
    )

    def trivial(v):
        return _reduce(params, G * int(v))

    return HomSchemeDescriptor(
        base=base,
        plaintext_ring=integer_ring(params.q),
        ring=lambda evk: gsw_ring(params, G),
        lift=lambda raw, noise: GswValue(raw, noise, 1),
        lower=lambda v: v.mat,
        certify=certify,
        trivial=trivial,
        evaluable_class={"kind": "noise-certified", "levels": params.levels,
                         "limit": "q/4", "input_noise": params.fresh_noise},
        compact_bound=width,
        ciphertext_bits=lambda raw: raw.size * k,
        fresh_noise=params.fresh_noise,
        params={"family": "gsw", "gsw": params, "fully_composable": False},
    )
