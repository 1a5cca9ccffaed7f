"""Boolean circuits over XOR/AND, their arithmetization into a ring, and
logic synthesis of decryption functions from truth tables.

Wires are numbered inputs first (0..arity-1), then one wire per gate in
order. Gates are tuples ``(op, a, b)``; constants use ``(op, -1, -1)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import ArityMismatch, BridgeLabError, NonEnumerableSpace

XOR, AND, CONST0, CONST1 = "XOR", "AND", "CONST0", "CONST1"
OPS = (XOR, AND, CONST0, CONST1)


class CircuitFormatError(BridgeLabError, ValueError):
    pass


@dataclass(frozen=True)
class BooleanCircuit:
    arity: int
    gates: tuple
    outputs: tuple

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("negative arity")
        if not self.outputs:
            raise ValueError("a circuit needs at least one output")
        for i, (op, a, b) in enumerate(self.gates):
            wire = self.arity + i
            if op not in OPS:
                raise ValueError(f"unknown gate {op!r}")
            if op in (XOR, AND) and not (0 <= a < wire and 0 <= b < wire):
                raise ValueError(f"gate {wire} reads a wire that is not yet defined")
        n_wires = self.arity + len(self.gates)
        if any(not 0 <= o < n_wires for o in self.outputs):
            raise ValueError("output index out of range")

    @property
    def n_wires(self):
        return self.arity + len(self.gates)

    @property
    def size(self):
        return sum(1 for op, _, _ in self.gates if op in (XOR, AND))

    def __json__(self):
        return to_json(self)


def identity_circuit(arity=1):
    return BooleanCircuit(arity, (), tuple(range(arity)))


def gate_circuit(op):
    return BooleanCircuit(2, ((op, 0, 1),), (2,))


def eval_boolean(c, bits):
    if len(bits) != c.arity:
        raise ArityMismatch(f"circuit takes {c.arity} inputs, got {len(bits)}")
    w = [int(b) & 1 for b in bits]
    for op, a, b in c.gates:
        if op == XOR:
            w.append(w[a] ^ w[b])
        elif op == AND:
            w.append(w[a] & w[b])
        else:
            w.append(1 if op == CONST1 else 0)
    return tuple(w[o] for o in c.outputs)


def depth(c):
    """Longest chain of XOR/AND gates from any input to any output."""
    d = [0] * c.n_wires
    for i, (op, a, b) in enumerate(c.gates):
        if op in (XOR, AND):
            d[c.arity + i] = 1 + max(d[a], d[b])
    return max(d[o] for o in c.outputs)


# ---------------------------------------------------------------------------
# truth tables, bitsliced: bit x of a wire's table is its value on input x,
# where input i is bit i of x.

def _input_patterns(arity):
    full = (1 << (1 << arity)) - 1
    pats = []
    for i in range(arity):
        block = ((1 << (1 << i)) - 1) << (1 << i)
        period = 1 << (i + 1)
        pat = 0
        for start in range(0, 1 << arity, period):
            pat |= block << start
        pats.append(pat & full)
    return pats, full


def truth_tables(c, max_arity=20):
    if c.arity > max_arity:
        raise NonEnumerableSpace(f"arity {c.arity} is too large for a truth table")
    pats, full = _input_patterns(c.arity)
    w = list(pats)
    for op, a, b in c.gates:
        if op == XOR:
            w.append(w[a] ^ w[b])
        elif op == AND:
            w.append(w[a] & w[b])
        else:
            w.append(full if op == CONST1 else 0)
    return tuple(w[o] for o in c.outputs)


def equivalent(c1, c2):
    return c1.arity == c2.arity and truth_tables(c1) == truth_tables(c2)


# ---------------------------------------------------------------------------
# construction with constant folding and structural hashing

class CircuitBuilder:
    def __init__(self, arity):
        self.arity = arity
        self.gates = []
        self._memo = {}
        self._const = {}

    def const(self, v):
        v = int(v) & 1
        if v not in self._const:
            self._const[v] = self._emit((CONST1 if v else CONST0, -1, -1))
        return self._const[v]

    def _emit(self, gate):
        self.gates.append(gate)
        return self.arity + len(self.gates) - 1

    def _value(self, w):
        if w >= self.arity:
            op = self.gates[w - self.arity][0]
            if op == CONST0:
                return 0
            if op == CONST1:
                return 1
        return None

    def xor(self, a, b):
        va, vb = self._value(a), self._value(b)
        if va is not None and vb is not None:
            return self.const(va ^ vb)
        if va == 0:
            return b
        if vb == 0:
            return a
        if a == b:
            return self.const(0)
        key = (XOR, min(a, b), max(a, b))
        if key not in self._memo:
            self._memo[key] = self._emit(key)
        return self._memo[key]

    def and_(self, a, b):
        va, vb = self._value(a), self._value(b)
        if va == 0 or vb == 0:
            return self.const(0)
        if va == 1:
            return b
        if vb == 1:
            return a
        if a == b:
            return a
        key = (AND, min(a, b), max(a, b))
        if key not in self._memo:
            self._memo[key] = self._emit(key)
        return self._memo[key]

    def not_(self, a):
        return self.xor(a, self.const(1))

    def or_(self, a, b):
        return self.xor(self.xor(a, b), self.and_(a, b))

    def xor_all(self, wires):
        wires = list(wires)
        if not wires:
            return self.const(0)
        while len(wires) > 1:
            nxt = [self.xor(wires[i], wires[i + 1]) for i in range(0, len(wires) - 1, 2)]
            if len(wires) % 2:
                nxt.append(wires[-1])
            wires = nxt
        return wires[0]

    def and_all(self, wires):
        wires = list(wires)
        if not wires:
            return self.const(1)
        if len(wires) == 1:
            return wires[0]
        mid = len(wires) // 2
        return self.and_(self.and_all(wires[:mid]), self.and_all(wires[mid:]))

    def build(self, outputs):
        return prune(BooleanCircuit(self.arity, tuple(self.gates), tuple(outputs)))


def prune(c):
    """Drop gates that no output depends on."""
    live = [False] * c.n_wires
    for o in c.outputs:
        live[o] = True
    for i in range(len(c.gates) - 1, -1, -1):
        w = c.arity + i
        op, a, b = c.gates[i]
        if live[w] and op in (XOR, AND):
            live[a] = live[b] = True
    remap = list(range(c.arity))
    gates = []
    for i, (op, a, b) in enumerate(c.gates):
        if live[c.arity + i]:
            if op in (XOR, AND):
                a, b = remap[a], remap[b]
            gates.append((op, a, b))
            remap.append(c.arity + len(gates) - 1)
        else:
            remap.append(None)
    return BooleanCircuit(c.arity, tuple(gates), tuple(remap[o] for o in c.outputs))


def _rebuild(c, builder, wires):
    for op, a, b in c.gates:
        if op == XOR:
            wires.append(builder.xor(wires[a], wires[b]))
        elif op == AND:
            wires.append(builder.and_(wires[a], wires[b]))
        else:
            wires.append(builder.const(1 if op == CONST1 else 0))
    return wires


def simplify(c):
    """Constant folding plus structural hashing; semantics unchanged."""
    builder = CircuitBuilder(c.arity)
    wires = _rebuild(c, builder, list(range(c.arity)))
    return builder.build(wires[o] for o in c.outputs)


def partial_apply(c, suffix_bits):
    """Fix the trailing inputs to constants and fold."""
    k = len(suffix_bits)
    if k > c.arity:
        raise ArityMismatch(f"{k} fixed bits exceed arity {c.arity}")
    arity = c.arity - k
    builder = CircuitBuilder(arity)
    wires = list(range(arity)) + [builder.const(b) for b in suffix_bits]
    _rebuild(c, builder, wires)
    return builder.build(wires[o] for o in c.outputs)


def compose_circuits(outer, inners):
    """outer(inner_1(x), ..., inner_l(x)) for inners sharing one input vector."""
    inners = list(inners)
    if not inners:
        if outer.arity:
            raise ArityMismatch("outer circuit has inputs but no inner circuits were given")
        return outer
    arity = inners[0].arity
    if any(d.arity != arity for d in inners):
        raise ArityMismatch("inner circuits must share their arity")
    builder = CircuitBuilder(arity)
    feed = []
    for d in inners:
        wires = _rebuild(d, builder, list(range(arity)))
        feed.extend(wires[o] for o in d.outputs)
    if len(feed) != outer.arity:
        raise ArityMismatch(f"outer circuit takes {outer.arity} inputs, inners give {len(feed)}")
    wires = _rebuild(outer, builder, feed)
    return builder.build(wires[o] for o in outer.outputs)


def chain_circuits(first, second):
    """second(first(x)) for a multi-output first stage."""
    if len(first.outputs) != second.arity:
        raise ArityMismatch(f"{len(first.outputs)} outputs feed {second.arity} inputs")
    return compose_circuits(second, [first])


# ---------------------------------------------------------------------------
# synthesis

def anf(table, arity):
    """Algebraic normal form coefficients of a truth table (Moebius transform)."""
    a = np.array([(table >> x) & 1 for x in range(1 << arity)], dtype=np.uint8)
    for i in range(arity):
        step = 1 << i
        a = a.reshape(-1, 2, step)
        a[:, 1, :] ^= a[:, 0, :]
        a = a.reshape(-1)
    return a


def synthesize(tables, arity):
    """Reed-Muller synthesis: each output is an XOR of AND-monomials.

    Monomials are balanced AND trees over sorted variables and are shared
    across outputs by structural hashing.
    """
    builder = CircuitBuilder(arity)
    outputs = []
    for table in tables:
        coeffs = anf(table, arity)
        terms = []
        for mono in np.flatnonzero(coeffs):
            mono = int(mono)
            vars_ = [i for i in range(arity) if (mono >> i) & 1]
            terms.append(builder.and_all(vars_))
        outputs.append(builder.xor_all(terms))
    return builder.build(outputs)


def table_from_function(fn, arity, width=1):
    """Bitsliced truth tables of fn: tuple of bits -> int or tuple of bits."""
    tables = [0] * width
    for x in range(1 << arity):
        out = fn(tuple((x >> i) & 1 for i in range(arity)))
        if isinstance(out, int):
            out = (out,)
        for j, bit in enumerate(out):
            if bit:
                tables[j] |= 1 << x
    return tables


def synthesize_function(fn, arity, width=1):
    return synthesize(table_from_function(fn, arity, width), arity)


def minimize(c):
    return synthesize(truth_tables(c), c.arity)


def _iota_bits(value, width):
    if isinstance(value, tuple):
        return value
    return tuple((int(value) >> i) & 1 for i in range(width))


def compile_decryption_circuit(scheme, iota=lambda m: m, out_width=1, max_inputs=16):
    """Circuit on (sk bits, ciphertext bits) computing iota(Dec(sk, c)).

    Bit strings that encode no key or ciphertext are don't-cares, fixed
    to zero.
    """
    kc, cc = scheme.key_codec, scheme.ciphertext_codec
    if kc is None or cc is None or not scheme.ciphertext_space.enumerable:
        raise NonEnumerableSpace(f"{scheme.name} has no fixed-width enumerable representation")
    e, nb = kc.width, cc.width
    if e + nb > max_inputs:
        raise NonEnumerableSpace(f"{e + nb} input wires exceed the synthesis limit {max_inputs}")

    def fn(bits):
        sk, c = kc.decode(bits[:e]), cc.decode(bits[e:])
        if sk is None or c is None:
            return (0,) * out_width
        return _iota_bits(iota(scheme.decrypt_fn(sk, c)), out_width)

    return synthesize_function(fn, e + nb, out_width)


def decryption_circuit_at(scheme, raw_c, iota=lambda m: m, out_width=1):
    """Circuit on sk bits alone computing iota(Dec(sk, c)) for one fixed c."""
    kc = scheme.key_codec
    if kc is None:
        raise NonEnumerableSpace(f"{scheme.name} has no key bit representation")

    def fn(bits):
        sk = kc.decode(bits)
        if sk is None:
            return (0,) * out_width
        return _iota_bits(iota(scheme.decrypt_fn(sk, raw_c)), out_width)

    return synthesize_function(fn, kc.width, out_width)


# ---------------------------------------------------------------------------
# arithmetization

OPLUS, OTIMES = "OPLUS", "OTIMES"


@dataclass(frozen=True)
class RingCircuit:
    """A boolean circuit with XOR lifted to x(+)y = 2(x+y) - (x+y)^2 and AND
    to x(x)y = x*y; every output carries an equality test against one."""
    source: BooleanCircuit
    nodes: tuple
    outputs: tuple

    @property
    def arity(self):
        return self.source.arity


def arithmetize(c):
    lift = {XOR: OPLUS, AND: OTIMES, CONST0: CONST0, CONST1: CONST1}
    return RingCircuit(c, tuple((lift[op], a, b) for op, a, b in c.gates), c.outputs)


@dataclass(frozen=True)
class Ring:
    """Operations of a commutative ring with one, possibly on ciphertexts.

    ``bit`` is applied to the result of each lifted gate; rings that track
    bounds use it to record that the value is in {0, 1}. ``equals_one`` is
    the runtime equality test, absent for ciphertext rings.
    """
    name: str
    zero: Any
    one: Any
    add: Callable
    sub: Callable
    mul: Callable
    bit: Callable = lambda x: x
    equals_one: Callable = None

    def oplus(self, x, y):
        s = self.add(x, y)
        return self.sub(self.add(s, s), self.mul(s, s))

    def otimes(self, x, y):
        return self.mul(x, y)


def integer_ring(modulus):
    name = f"Z_{modulus}" if modulus else "Z"
    red = (lambda v: v % modulus) if modulus else (lambda v: v)
    return Ring(name, 0, 1,
                add=lambda x, y: red(x + y),
                sub=lambda x, y: red(x - y),
                mul=lambda x, y: red(x * y),
                equals_one=lambda x: red(x) == red(1))


def evaluate_ring(rc, ring, inputs, equality="structural"):
    """Evaluate a ring circuit; outputs pass through [x = 1].

    The structural test is the identity, valid because lifted gates map
    {0, 1} to {0, 1}. The runtime test compares against the ring's one.
    """
    if len(inputs) != rc.arity:
        raise ArityMismatch(f"circuit takes {rc.arity} inputs, got {len(inputs)}")
    w = list(inputs)
    for op, a, b in rc.nodes:
        if op == OPLUS:
            w.append(ring.bit(ring.oplus(w[a], w[b])))
        elif op == OTIMES:
            w.append(ring.bit(ring.otimes(w[a], w[b])))
        else:
            w.append(ring.one if op == CONST1 else ring.zero)
    out = [w[o] for o in rc.outputs]
    if equality == "runtime":
        if ring.equals_one is None:
            raise ValueError(f"ring {ring.name} has no runtime equality test")
        out = [ring.one if ring.equals_one(v) else ring.zero for v in out]
    return tuple(out)


# ---------------------------------------------------------------------------
# random and enumerated circuits

def random_circuit(rng, arity, n_gates, n_outputs=1, constants=False):
    ops = OPS if constants else (XOR, AND)
    gates = []
    for i in range(n_gates):
        wires = arity + i
        op = ops[int(rng.integers(len(ops)))]
        if op in (XOR, AND):
            if wires == 0:
                op = CONST0
                gates.append((op, -1, -1))
                continue
            gates.append((op, int(rng.integers(wires)), int(rng.integers(wires))))
        else:
            gates.append((op, -1, -1))
    total = arity + n_gates
    if total == 0:
        gates.append((CONST0, -1, -1))
        total = 1
    outs = [total - 1] + [int(rng.integers(total)) for _ in range(n_outputs - 1)]
    return BooleanCircuit(arity, tuple(gates), tuple(outs))


def enumerate_circuits(arity, max_gates, constants=True):
    """Every circuit with at most max_gates gates whose output is its last wire.

    Operand pairs are unordered (a <= b) since both gate types commute.
    """
    def extend(gates, remaining):
        wires = arity + len(gates)
        if wires:
            yield BooleanCircuit(arity, tuple(gates), (wires - 1,))
        if remaining == 0:
            return
        choices = []
        for op in (XOR, AND):
            choices.extend((op, a, b) for a in range(wires) for b in range(a, wires))
        if constants:
            choices.extend([(CONST0, -1, -1), (CONST1, -1, -1)])
        for g in choices:
            yield from extend(gates + [g], remaining - 1)

    yield from extend([], max_gates)


# ---------------------------------------------------------------------------
# serialization

def _wire_name(c, w):
    return f"x{w}" if w < c.arity else f"g{w}"


def to_text(c):
    lines = ["inputs " + " ".join(f"x{i}" for i in range(c.arity))]
    for i, (op, a, b) in enumerate(c.gates):
        w = c.arity + i
        if op in (XOR, AND):
            lines.append(f"g{w} = {op} {_wire_name(c, a)} {_wire_name(c, b)}")
        else:
            lines.append(f"g{w} = {op}")
    lines.append("outputs " + " ".join(_wire_name(c, o) for o in c.outputs))
    return "\n".join(lines) + "\n"


def from_text(text):
    """Parse the line format; NOT and OR are desugared to XOR/AND."""
    names, gates = {}, []
    arity, outputs = None, None

    def emit(gate):
        gates.append(gate)
        return arity + len(gates) - 1

    def ref(tok):
        if tok not in names:
            raise CircuitFormatError(f"undefined wire {tok!r}")
        return names[tok]

    one = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "inputs":
            if arity is not None:
                raise CircuitFormatError("repeated inputs line")
            for i, tok in enumerate(parts[1:]):
                names[tok] = i
            arity = len(parts) - 1
        elif parts[0] == "outputs":
            outputs = tuple(ref(t) for t in parts[1:])
        elif len(parts) >= 3 and parts[1] == "=":
            if arity is None:
                raise CircuitFormatError("gate before inputs line")
            name, op, args = parts[0], parts[2].upper(), parts[3:]
            if op in (XOR, AND) and len(args) == 2:
                names[name] = emit((op, ref(args[0]), ref(args[1])))
            elif op in (CONST0, CONST1) and not args:
                names[name] = emit((op, -1, -1))
            elif op == "NOT" and len(args) == 1:
                if one is None:
                    one = emit((CONST1, -1, -1))
                names[name] = emit((XOR, ref(args[0]), one))
            elif op == "OR" and len(args) == 2:
                a, b = ref(args[0]), ref(args[1])
                x = emit((XOR, a, b))
                y = emit((AND, a, b))
                names[name] = emit((XOR, x, y))
            else:
                raise CircuitFormatError(f"bad gate line: {raw!r}")
        else:
            raise CircuitFormatError(f"bad line: {raw!r}")
    if arity is None or outputs is None:
        raise CircuitFormatError("missing inputs or outputs line")
    try:
        return BooleanCircuit(arity, tuple(gates), outputs)
    except ValueError as exc:
        raise CircuitFormatError(str(exc)) from exc


def to_json(c):
    return {"arity": c.arity, "gates": [list(g) for g in c.gates], "outputs": list(c.outputs)}


def from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        return BooleanCircuit(int(obj["arity"]), tuple(tuple(g) for g in obj["gates"]),
                              tuple(obj["outputs"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(str(exc)) from exc


# a few named circuits used by demos and the registry

def full_adder():
    """Inputs (a, b, cin); outputs (sum, carry)."""
    return BooleanCircuit(3, (
        (XOR, 0, 1),      # 3: a^b
        (XOR, 3, 2),      # 4: sum
        (AND, 0, 1),      # 5: ab
        (AND, 3, 2),      # 6: (a^b)cin
        (XOR, 5, 6),      # 7: carry
    ), (4, 7))


def duplicate(arity=1):
    return BooleanCircuit(arity, (), tuple(range(arity)) * 2)


def xor_chain(arity, length):
    """length XOR gates folding the inputs cyclically into an accumulator."""
    gates, acc = [], 0
    for i in range(length):
        gates.append((XOR, acc, (i + 1) % arity))
        acc = arity + i
    return BooleanCircuit(arity, tuple(gates), (acc,))
