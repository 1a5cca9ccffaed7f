"""IND-CPA games, bridge games, distinguisher games and the adversaries
used by the demos.

Per-trial randomness comes from separate derived streams for key
generation, the challenge coin, the adversary and encryption, so two game
frontends fed the same seed see the same keys, coins and adversary coins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .bridges import find_halfkeys
from .core import augment, graph_scheme
from .errors import InvalidMessagePair, MissingKeyHalf, ShapeMismatch
from .rng import derive_rng
from .serialize import shape_of, to_jsonable


def hoeffding(trials, delta):
    """Half-width for a mean of `trials` [0,1] samples at confidence 1 - delta."""
    return math.sqrt(math.log(2 / delta) / (2 * trials))


@dataclass
class GameReport:
    game: str
    participants: dict
    trials: int
    wins: int
    advantage: Fraction
    ci: float
    delta: float
    seed: int
    flags: dict = field(default_factory=dict)
    abstentions: int = 0
    effective_advantage: Optional[Fraction] = None
    trace: Optional[list] = None

    @property
    def advantage_ci(self):
        """Half-width on the advantage |2p - 1|, twice the win-rate width."""
        return 2 * self.ci

    def __json__(self):
        out = {"game": self.game, "participants": self.participants, "trials": self.trials,
               "wins": self.wins, "advantage": float(self.advantage), "ci": self.ci,
               "delta": self.delta, "seed": self.seed, "flags": self.flags,
               "abstentions": self.abstentions}
        if self.effective_advantage is not None:
            out["effective_advantage"] = float(self.effective_advantage)
        return out


# ---------------------------------------------------------------------------
# adversaries

@dataclass(frozen=True)
class View:
    """What the adversary sees: the scheme, its public key and public aux."""
    scheme: Any
    pk: Any
    aux: tuple = ()
    sk: Any = None  # only handed to white-box adversaries


@dataclass(frozen=True)
class Adversary:
    """choose(view, rng) -> (m0, m1, state); guess(state, challenge, rng) -> bit or None.

    A None guess is an abstention and is scored as a uniform random guess.
    """
    name: str
    choose: Callable
    guess: Callable
    white_box: bool = False


def random_guesser():
    def choose(view, rng):
        return 0, 1, None

    def guess(state, c, rng):
        return int(rng.integers(2))

    return Adversary("random", choose, guess)


def abstainer():
    return Adversary("abstain", lambda view, rng: (0, 1, None), lambda state, c, rng: None)


def omniscient():
    """White-box fixture holding the secret key."""
    def choose(view, rng):
        return 0, 1, view

    def guess(view, c, rng):
        return view.scheme.decrypt(view.sk, c)

    return Adversary("omniscient", choose, guess, white_box=True)


def plaintext_reader():
    """Reads a plaintext bit sitting in the clear at the end of the ciphertext."""
    def choose(view, rng):
        return 0, 1, None

    def guess(state, c, rng):
        raw = c.value
        if isinstance(raw, tuple) and raw:
            raw = raw[-1]
        return raw if isinstance(raw, int) and raw in (0, 1) else None

    return Adversary("plaintext-reader", choose, guess)


def reassemble_key(base, public):
    """Secret key of `base` rebuilt from both HalfKey values in `public`."""
    halves = find_halfkeys(public)
    if 0 not in halves or 1 not in halves:
        raise MissingKeyHalf(f"found halves {sorted(halves)}")
    bits = halves[0].bits + halves[1].bits
    return base.key_codec.decode(bits)


def halfkey_attacker(base):
    """Rebuilds sk from the bridge key and decrypts the challenge exactly."""
    def choose(view, rng):
        try:
            sk = reassemble_key(base, (view.pk, view.aux))
        except MissingKeyHalf:
            sk = None
        return 0, 1, (view.scheme, sk)

    def guess(state, c, rng):
        scheme, sk = state
        if sk is None:
            return None
        if scheme.params.get("bridge") is not None:
            return scheme.decrypt_fn((sk, None), c.value)
        return scheme.decrypt(sk, c)

    return Adversary("reassembly", choose, guess)


# ---------------------------------------------------------------------------
# games

def _score(trials, wins, decided_wins, abstentions, delta):
    adv = abs(Fraction(2 * wins, trials) - 1)
    eff = abs(Fraction(2 * decided_wins + abstentions, trials) - 1)
    return adv, eff, hoeffding(trials, delta)


def _check_pair(scheme, m0, m1):
    space = scheme.plaintext_space
    if m0 == m1:
        raise InvalidMessagePair("m0 and m1 must differ")
    if m0 not in space or m1 not in space:
        raise InvalidMessagePair(f"messages must lie in {space.name}")


def _play(trials, seed, setup, adv, delta, game, participants, flags, keep_trace):
    wins = decided = abstentions = 0
    trace = [] if keep_trace else None
    for i in range(trials):
        scheme, pk, aux, sk = setup(i, derive_rng(seed, "keygen", i))
        view = View(scheme, pk, tuple(aux), sk if adv.white_box else None)
        arng = derive_rng(seed, "adversary", i)
        m0, m1, state = adv.choose(view, arng)
        _check_pair(scheme, m0, m1)
        b = int(derive_rng(seed, "coin", i).integers(2))
        c = scheme.encrypt(pk, m1 if b else m0, derive_rng(seed, "encrypt", i))
        guess = adv.guess(state, c, arng)
        if guess is None:
            abstentions += 1
            guess = int(arng.integers(2))
            win = guess == b
        else:
            win = guess == b
            decided += win
        wins += win
        if keep_trace:
            trace.append(int(win))
    adv_est, eff, ci = _score(trials, wins, decided, abstentions, delta)
    return GameReport(game, participants, trials, wins, adv_est, ci, delta, seed, flags,
                      abstentions, eff, trace)


def run_indcpa(scheme, adv, trials, seed, lam=1, delta=0.01, keep_trace=False, flags=None):
    """Fresh key generation per trial, then the usual challenge."""
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def setup(i, rng):
        kp = scheme.keygen(lam, rng)
        return scheme, kp.pk, scheme.aux_public, kp.sk

    return _play(trials, seed, setup, adv, delta, "indcpa",
                 {"scheme": scheme.name, "adversary": adv.name}, dict(flags or {}), keep_trace)


def run_bridge_indcpa(b, adv, trials, seed, lam=1, delta=0.01, keep_trace=False, flags=None):
    """IND-CPA of the source scheme augmented with (pk2, bk)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def setup(i, rng):
        kb = b.keygen(lam, rng)
        scheme = augment(b.source, [kb.pk2, kb.bk])
        return scheme, kb.pk1, scheme.aux_public, kb.sk1

    fl = {k: v for k, v in b.flags.items() if k == "circular_security_assumed"}
    fl.update(flags or {})
    return _play(trials, seed, setup, adv, delta, "bridge-indcpa",
                 {"bridge": b.name, "adversary": adv.name}, fl, keep_trace)


def run_graph_indcpa(b, adv, trials, seed, lam=1, delta=0.01, keep_trace=False,
                     shared_randomness=False):
    """IND-CPA of the graph scheme of b."""
    scheme = graph_scheme(b, shared_randomness)

    def setup(i, rng):
        kp = scheme.keygen(lam, rng)
        return scheme, kp.pk, (), kp.sk

    return _play(trials, seed, setup, adv, delta, "graph-indcpa",
                 {"bridge": b.name, "adversary": adv.name}, {}, keep_trace)


# ---------------------------------------------------------------------------
# distinguisher games

def run_distinguisher(sA, sB, d, trials, seed, delta=0.01, names=None):
    """Coin picks a side, d sees one sample; advantage |P(d=1|A) - P(d=1|B)|.

    Only fixed distinguishers can be run, so every report is flagged as a
    heuristic smoke test.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ones = {0: 0, 1: 0}
    counts = {0: 0, 1: 0}
    wins = 0
    shape = None
    for i in range(trials):
        side = int(derive_rng(seed, "side", i).integers(2))
        sampler = sA if side == 0 else sB
        x = sampler(derive_rng(seed, "sample", i))
        s = shape_of(to_jsonable(x))
        if shape is None:
            shape = s
        elif s != shape:
            raise ShapeMismatch(f"sample {i} has a different serialized shape")
        out = int(d(x)) & 1
        counts[side] += 1
        ones[side] += out
        wins += (out == 1) == (side == 0)
    pa = Fraction(ones[0], counts[0]) if counts[0] else Fraction(0)
    pb = Fraction(ones[1], counts[1]) if counts[1] else Fraction(0)
    names = names or {}
    return GameReport("distinguish",
                      {"a": names.get("a", "A"), "b": names.get("b", "B"),
                       "d": names.get("d", getattr(d, "__name__", "d"))},
                      trials, wins, abs(pa - pb), hoeffding(trials, delta), delta, seed,
                      {"heuristic_only": True})


def _flat_ints(obj):
    obj = to_jsonable(obj)
    if isinstance(obj, list):
        for x in obj:
            yield from _flat_ints(x)
    elif isinstance(obj, (int, bool)):
        yield int(obj)


def key_bits_of(sample):
    """The key-bit ciphertexts of a bridge-key sample: its last entry."""
    return sample[-1]


def byte_parity(sample):
    """Parity of the low byte of the first entry of the first key-bit ciphertext."""
    first = next(_flat_ints(key_bits_of(sample)[0]), 0)
    return bin(first & 0xFF).count("1") & 1


def bit_marginal(sample):
    """Lowest bit of the last entry of the first key-bit ciphertext."""
    last = 0
    for last in _flat_ints(key_bits_of(sample)[0]):
        pass
    return last & 1


def first_bit(sample):
    """Lowest bit of the first integer in the serialized sample."""
    return next(_flat_ints(sample), 0) & 1


DISTINGUISHERS = {"byte-parity": byte_parity, "bit-marginal": bit_marginal,
                  "first-bit": first_bit}
