import itertools

import pytest

from bridgelab import config, registry
from bridgelab.bridges import (KeyBundle, check_bridge_correct, check_complete, compose,
                               concat_bridges, double_additive_bridge, find_halfkeys,
                               gm_identity_bridge, halfkey_bridges, identity_bridge, is_witness,
                               lwe_additive_bridge, modswitch_bridge, sabotaged_bridge,
                               search_correctness_counterexample, verified)
from bridgelab.circuits import AND, XOR, BooleanCircuit
from bridgelab.concrete import GmParams, LweCiphertext, LweParams, make_lwe_scheme
from bridgelab.core import fiber_power
from bridgelab.errors import (DivisibilityViolation, InvalidParameters, KeyBundleMismatch,
                              NonEnumerableSpace, OddKeyLength, SchemeMismatch)
from bridgelab.gentry import circuit_bridge
from bridgelab.homomorphic import GswParams, make_gsw, trivial_fhe
from bridgelab.rng import derive_rng

ADD = config.lwe_params("lwe-add")
TOY = config.lwe_params("lwe-toy")


def test_additive_bridge_correct():
    assert check_bridge_correct(lwe_additive_bridge(ADD), 10_000, 0) == 0


def test_additive_error_sum_enumeration():
    # oracle: every fresh error pair (e1, e2) in [-1, 1]^2 and message pair converts correctly
    b = lwe_additive_bridge(ADD)
    sk = (5, 9)
    for (m1, m2), e1, e2 in itertools.product(itertools.product((0, 1), repeat=2),
                                              range(-1, 2), range(-1, 2)):
        c1 = LweCiphertext((3, 4), (3 * 5 + 4 * 9 + 16 * m1 + e1) % 32)
        c2 = LweCiphertext((7, 1), (7 * 5 + 1 * 9 + 16 * m2 + e2) % 32)
        out = b.convert_fn((), (c1, c2), None)
        assert b.target.decrypt_fn(sk, out) == m1 ^ m2


def test_additive_examples():
    b = lwe_additive_bridge(ADD)
    kb = b.keygen(1, derive_rng(0))
    assert kb.bk == () and kb.sk2 == kb.sk1
    rng = derive_rng(1)
    c = b.source.encrypt(kb.pk1, (1, 1), rng)
    assert b.target.decrypt(kb.sk2, b.convert(kb.bk, c, rng)) == 0
    z = LweCiphertext((0, 0), 0)
    assert b.convert_fn((), (z, z), None) == LweCiphertext((0, 0), 0)


def test_identity_and_sabotaged():
    assert check_bridge_correct(identity_bridge(config.base_scheme("lwe-toy")), 2000, 0) == 0
    assert check_bridge_correct(identity_bridge(trivial_fhe().base), 2000, 0) == 0
    rate = check_bridge_correct(sabotaged_bridge(ADD), 10_000, 0)
    assert abs(float(rate) - 0.5) <= 0.05


def test_modswitch_examples():
    b = modswitch_bridge(6, 18, 1)
    assert b.key_mode == "derived"
    assert b.convert_fn((), LweCiphertext((1,), 5), None) == LweCiphertext((3,), 15)
    assert b.convert_fn((), LweCiphertext((0,), 0), None) == LweCiphertext((0,), 0)
    with pytest.raises(DivisibilityViolation):
        modswitch_bridge(6, 20, 1)
    with pytest.raises(InvalidParameters):
        modswitch_bridge(4, 12, 1)


def test_modswitch_complete_exhaustive():
    r = check_complete(modswitch_bridge(6, 18, 1), "exhaustive")
    assert r["complete"] and r["keys"] == 6 and r["checked"] == 6 * 36
    assert set(r) == {"bridge", "mode", "checked", "complete", "witness", "keys"}


def test_modswitch_complete_oracle():
    # oracle: interval decryption before and after scaling, written out directly
    def dec(q, s, a, b):
        x = (b - a * s) % q
        x = x - q if 2 * x > q else x
        return 0 if 4 * abs(x) < q else 1
    for s, a, b in itertools.product(range(6), repeat=3):
        assert dec(6, s, a, b) == dec(18, s, 3 * a % 18, 3 * b % 18)


def test_additive_not_complete_at_q16():
    b = lwe_additive_bridge(TOY)
    r = check_complete(b, "exhaustive", keys=1)
    assert not r["complete"]
    w = r["witness"]
    # first lexicographic witness under the zero key
    assert w["sk"] == (0, 0)
    assert w["ciphertext"] == (LweCiphertext((0, 0), 1), LweCiphertext((0, 0), 3))
    pinned = (LweCiphertext((0, 0), 3), LweCiphertext((0, 0), 3))
    assert is_witness(b, (0, 0), pinned)
    s = b.target
    assert s.decrypt_fn((0, 0), pinned[0]) == 0
    assert s.decrypt_fn((0, 0), LweCiphertext((0, 0), 6)) == 1


def test_gm_identity_complete_and_correct():
    b = gm_identity_bridge(GmParams(3, 7))
    assert check_bridge_correct(b, 10_000, 0) == 0
    r = check_complete(b, "exhaustive")
    assert r["complete"] and r["checked"] == 6


def test_exhaustive_needs_enumerable():
    h = make_gsw(GswParams(1, 16, 1, 1))
    b = identity_bridge(h.base)
    with pytest.raises(NonEnumerableSpace):
        check_complete(b, "exhaustive")
    assert check_complete(b, "sampled", budget=20)["complete"]


def test_compose_key_layout_and_flags():
    f, g = halfkey_bridges(config.base_scheme("lwe-toy"))
    gf = compose(f, g)
    assert gf.correctness_unverified is False  # g is complete
    kb = gf.keygen(1, derive_rng(0))
    kf, kg = kb.extra["inner"]
    assert kb.bk[0] is kf.bk and kb.bk[1] is kf.pk2 and kb.bk[2] is kg.bk
    assert gf.iota(1) == 1
    with pytest.raises(SchemeMismatch):
        compose(g, f)


def test_compose_runs_only_later_stages_of_g():
    calls = []
    base = config.base_scheme("lwe-toy")
    f = identity_bridge(base)
    g = identity_bridge(base)
    import dataclasses
    g = dataclasses.replace(g, stage2=lambda lam, kb, rng: calls.append("s2") or (kb["sk1"], kb["pk1"]))
    kb = compose(f, g).keygen(1, derive_rng(0))
    assert calls == ["s2"]
    assert kb.sk2 == kb.sk1


def test_any_then_complete_is_correct():
    b = registry.bridge("additive-modswitch")
    assert not b.correctness_unverified
    assert check_bridge_correct(b, 10_000, 0) == 0


def test_complete_then_complete_is_complete():
    ms = modswitch_bridge(6, 18, 1)
    ms2 = modswitch_bridge(18, 54, 1)
    b = compose(ms, ms2)
    assert b.complete_certified
    assert check_complete(b, "exhaustive")["complete"]
    f, g = halfkey_bridges(config.base_scheme("lwe-n1q4"))
    assert check_complete(compose(f, g), "exhaustive")["complete"]
    gm = gm_identity_bridge(GmParams(3, 7))
    assert check_complete(compose(gm, gm), "exhaustive")["complete"]


def test_double_additive_counterexample():
    b = double_additive_bridge(TOY)
    assert b.correctness_unverified
    r = search_correctness_counterexample(b, 10_000, 1)
    assert r["found"]
    # pinned regression witness; conversion is deterministic
    sk = (2, 6)
    cts = (LweCiphertext((6, 15), 5), LweCiphertext((7, 15), 15),
           LweCiphertext((15, 2), 9), LweCiphertext((11, 7), 7))
    s = b.target
    assert tuple(s.decrypt_fn(sk, c) for c in cts) == (0, 1, 0, 1)
    assert s.decrypt_fn(sk, b.convert_fn(((), (), ()), cts, None)) != 0
    b2, rate = verified(b, 2000, 1)
    assert rate > 0 and b2.correctness_unverified


def test_double_additive_safe_at_q32():
    assert check_bridge_correct(double_additive_bridge(ADD), 5000, 0) == 0


def test_halfkey_properties():
    base = config.base_scheme("lwe-toy")
    f, g = halfkey_bridges(base)
    assert check_bridge_correct(f, 2000, 0) == 0
    assert check_bridge_correct(g, 2000, 0) == 0
    assert check_complete(f, "exhaustive", keys=2)["complete"]
    assert check_complete(g, "exhaustive", keys=1)["complete"]
    kb = compose(f, g).keygen(1, derive_rng(3))
    halves = find_halfkeys(kb.bk)
    bits = halves[0].bits + halves[1].bits
    assert base.key_codec.decode(bits) == kb.sk1


def test_halfkey_odd_key():
    with pytest.raises(OddKeyLength):
        halfkey_bridges(make_lwe_scheme(LweParams(1, 8, 0)))


def test_concat_circuit_bridges():
    h = trivial_fhe()
    xor = circuit_bridge(h, BooleanCircuit(2, ((XOR, 0, 1),), (2,)))
    and_ = circuit_bridge(h, BooleanCircuit(2, ((AND, 0, 1),), (2,)))
    cc = concat_bridges([xor, and_])
    assert cc.target.name == fiber_power(h.base, 2).name
    kb = cc.keygen(1, derive_rng(0))
    for i in range(1000):
        rng = derive_rng(i, "cc")
        m = (int(rng.integers(2)), int(rng.integers(2)))
        out = cc.convert(kb.bk, cc.source.encrypt(kb.pk1, m, rng), rng)
        assert cc.target.decrypt(kb.sk2, out) == (m[0] ^ m[1], m[0] & m[1])
    assert check_complete(cc, "exhaustive")["complete"]
    one = concat_bridges([xor])
    assert one.iota((1, 1)) == (0,)


def test_concat_mismatch():
    h = trivial_fhe()
    xor = circuit_bridge(h, BooleanCircuit(2, ((XOR, 0, 1),), (2,)))
    with pytest.raises(SchemeMismatch):
        concat_bridges([xor, lwe_additive_bridge(ADD)])
    import dataclasses
    other = dataclasses.replace(xor, keygen_family="elsewhere")
    with pytest.raises(KeyBundleMismatch):
        concat_bridges([xor, other])


def test_iota_table():
    b = lwe_additive_bridge(ADD)
    assert b.iota_table() == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}


def test_registry_bridges_build():
    for ident in registry.BRIDGES:
        b = registry.bridge(ident)
        assert b.source is not None
    assert isinstance(registry.bridge("modswitch").keygen(1, derive_rng(0)), KeyBundle)
