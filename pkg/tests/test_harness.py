import math

import pytest

from bridgelab import config, registry
from bridgelab.bridges import halfkey_bridges, revealing_bridges
from bridgelab.errors import InvalidMessagePair, MissingKeyHalf, ShapeMismatch
from bridgelab.harness import (Adversary, abstainer, first_bit, halfkey_attacker, hoeffding,
                               omniscient, plaintext_reader, random_guesser, reassemble_key,
                               run_bridge_indcpa, run_distinguisher, run_graph_indcpa, run_indcpa)
from bridgelab.homomorphic import trivial_fhe
from bridgelab.rng import derive_rng
from bridgelab.serialize import dumps

TOY = config.base_scheme("lwe-toy")


def test_hoeffding_value():
    # sqrt(ln(200) / 2000) at delta = 0.01, T = 1000
    assert hoeffding(1000, 0.01) == pytest.approx(0.05146, abs=1e-5)
    assert hoeffding(1000, 0.01) == math.sqrt(math.log(200) / 2000)


def test_random_guesser_within_ci():
    r = run_indcpa(TOY, random_guesser(), 10_000, seed=3)
    assert r.advantage <= r.advantage_ci
    assert r.flags == {} and r.game == "indcpa"


def test_omniscient_and_plaintext_reader():
    assert run_indcpa(TOY, omniscient(), 200, seed=0).advantage == 1
    t = trivial_fhe().base
    r = run_indcpa(t, plaintext_reader(), 100, seed=1)
    assert r.advantage == 1 and r.abstentions == 0


def test_plaintext_reader_abstains_on_lwe():
    r = run_indcpa(TOY, plaintext_reader(), 500, seed=0)
    assert r.abstentions == 500 and r.effective_advantage <= r.ci


def test_invalid_message_pair():
    same = Adversary("same", lambda v, rng: (1, 1, None), lambda s, c, rng: 0)
    with pytest.raises(InvalidMessagePair):
        run_indcpa(TOY, same, 1, seed=0)
    outside = Adversary("outside", lambda v, rng: (0, 2, None), lambda s, c, rng: 0)
    with pytest.raises(InvalidMessagePair):
        run_indcpa(TOY, outside, 1, seed=0)


def test_halfkey_parts_abstain_composite_breaks():
    f, g = halfkey_bridges(TOY)
    adv = halfkey_attacker(TOY)
    for b in (f, g):
        r = run_bridge_indcpa(b, adv, 300, seed=2)
        assert r.abstentions == 300
        assert r.effective_advantage <= r.ci
    r = run_bridge_indcpa(registry.bridge("halfkey-composed"), adv, 300, seed=2)
    assert r.advantage == 1 and r.abstentions == 0


def test_reassembly_recovers_exact_key():
    gf = registry.bridge("halfkey-composed")
    for i in range(100):
        kb = gf.keygen(1, derive_rng(i, "reassemble"))
        assert reassemble_key(TOY, (kb.pk1, kb.pk2, kb.bk)) == kb.sk1
    f, _ = halfkey_bridges(TOY)
    kb = f.keygen(1, derive_rng(0))
    with pytest.raises(MissingKeyHalf):
        reassemble_key(TOY, (kb.pk1, kb.pk2, kb.bk))


def test_revealing_g_leaks_plaintext():
    f, g = halfkey_bridges(TOY)
    fp, gp, _ = revealing_bridges(f, g)
    r = run_indcpa(gp.source, plaintext_reader(), 200, seed=4)
    assert r.advantage == 1
    assert run_bridge_indcpa(fp, halfkey_attacker(TOY), 200, seed=4).effective_advantage <= \
        hoeffding(200, 0.01)


@pytest.mark.parametrize("adv", [random_guesser, lambda: halfkey_attacker(TOY)])
def test_graph_and_augmented_traces_agree(adv):
    gf = registry.bridge("halfkey-composed")
    a = run_bridge_indcpa(gf, adv(), 200, seed=11, keep_trace=True)
    b = run_graph_indcpa(gf, adv(), 200, seed=11, keep_trace=True)
    assert a.trace == b.trace and a.wins == b.wins


def test_seed_determinism():
    a = run_indcpa(TOY, random_guesser(), 500, seed=9)
    b = run_indcpa(TOY, random_guesser(), 500, seed=9)
    c = run_indcpa(TOY, random_guesser(), 500, seed=10)
    assert dumps(a) == dumps(b)
    assert a.wins != c.wins or dumps(a) != dumps(c)


def test_report_field_order():
    r = run_indcpa(TOY, random_guesser(), 10, seed=0)
    keys = list(r.__json__())
    assert keys[:9] == ["game", "participants", "trials", "wins", "advantage", "ci", "delta",
                        "seed", "flags"]


def test_distinguisher_identical_samplers():
    s = registry.sampler("uniform-bits")
    r = run_distinguisher(s, s, first_bit, 1000, seed=0)
    assert r.advantage <= r.ci and r.flags["heuristic_only"]


def test_distinguisher_detects_bias():
    r = run_distinguisher(registry.sampler("uniform-bits"), registry.sampler("zero-bits"),
                          first_bit, 1000, seed=0)
    assert abs(float(r.advantage) - 0.5) <= 0.05


def test_distinguisher_shape_mismatch():
    short = lambda rng: (0, 1)  # noqa: E731
    with pytest.raises(ShapeMismatch):
        run_distinguisher(short, registry.sampler("zero-bits"), first_bit, 50, seed=0)


def test_gentry_pair_smoke():
    r = run_distinguisher(registry.sampler("gentry-real"), registry.sampler("gentry-zero"),
                          registry.distinguisher("byte-parity"), 200, seed=1)
    assert r.flags["heuristic_only"]
    assert r.advantage <= r.advantage_ci


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        run_indcpa(TOY, abstainer(), 0, seed=0)
