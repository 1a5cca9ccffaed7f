import itertools

import pytest

from bridgelab import config, registry
from bridgelab.bridges import (check_bridge_correct, check_complete, compose, lwe_additive_bridge,
                               search_correctness_counterexample)
from bridgelab.circuits import (AND, XOR, BooleanCircuit, duplicate, enumerate_circuits,
                                identity_circuit, random_circuit, xor_chain)
from bridgelab.errors import CircuitOutOfClass, WrongKeyMode
from bridgelab.gentry import (BootstrapScheme, GentryBridgeSpec, RawEval, and_tree_bridge,
                              check_fche, check_fche_exhaustive, check_fresh_chain,
                              circuit_bridge, fche_compose_eval, fche_transform, garbage_witness,
                              gentry_bridge, is_gentry, real_bridge_key_sampler,
                              squaring_witness, zero_substituted_bridge_key)
from bridgelab.homomorphic import gsw_noise, trivial_fhe
from bridgelab.rng import derive_rng

N1Q4 = "lwe-n1q4"


@pytest.fixture(scope="module")
def fche_gsw():
    h = config.hom_scheme("gsw-fche")
    return h, fche_transform(h)


@pytest.mark.parametrize("variant,trivial_bits", [("fold", False), ("encrypt-bits", False),
                                                  ("encrypt-bits", True)])
@pytest.mark.parametrize("iota", ["id", "not"])
def test_gentry_trivial_outer_complete(variant, trivial_bits, iota):
    b = registry.gentry_from_id(f"gentry:{N1Q4}:trivial", variant, iota, trivial_bits)
    assert is_gentry(b) and b.complete_certified
    r = check_complete(b, "exhaustive")
    assert r["complete"] and r["checked"] == 64


def test_gentry_gsw_lite_sampled():
    b = registry.bridge(f"gentry:{N1Q4}:gsw-lite")
    assert b.flags["noise_bound"] * 4 < config.gsw_params("gsw-lite").q
    assert check_complete(b, "sampled", budget=200)["complete"]


def test_gentry_variants_agree():
    fold = registry.gentry_from_id(f"gentry:{N1Q4}:gsw-mid", "fold")
    bits = registry.gentry_from_id(f"gentry:{N1Q4}:gsw-mid", "encrypt-bits")
    inner = fold.source
    for sk in inner.key_space:
        pk = inner.keypair_from_sk(sk).pk
        rng = derive_rng(sk[0], "agree")
        kf = fold.keygen_from(1, sk, pk, rng)
        kb = bits.keygen_from(1, sk, pk, rng)
        for raw in inner.ciphertext_space:
            a = fold.target.decrypt_fn(kf.sk2, fold.convert_fn(kf.bk, raw, rng))
            b = bits.target.decrypt_fn(kb.sk2, bits.convert_fn(kb.bk, raw, rng))
            assert a == b == inner.decrypt_fn(sk, raw)


def test_gentry_out_of_class():
    inner = config.base_scheme(N1Q4)
    with pytest.raises(CircuitOutOfClass):
        gentry_bridge(GentryBridgeSpec(inner, config.hom_scheme("gsw-lite"),
                                       variant="encrypt-bits"))


def test_gentry_degenerate_inner():
    t = trivial_fhe().base
    h = config.hom_scheme("gsw-lite")
    b = gentry_bridge(GentryBridgeSpec(t, h))
    kb = b.keygen(1, derive_rng(0))
    for bit in (0, 1):
        out = b.convert_fn(kb.bk, bit, derive_rng(bit))
        assert b.target.decrypt_fn(kb.sk2, out) == bit


def test_gentry_shared_mode_flags():
    h = config.hom_scheme("gsw-fche")
    b = gentry_bridge(GentryBridgeSpec(h.base, h, key_mode="shared"))
    assert b.flags["circular_security_assumed"]
    assert check_complete(b, "sampled", budget=20)["complete"]
    kb = b.keygen(1, derive_rng(0))
    assert kb.sk2 is kb.sk1


def test_any_then_gentry_is_correct():
    f = lwe_additive_bridge(config.lwe_params(N1Q4))
    g = registry.bridge(f"gentry:{N1Q4}:gsw-lite")
    assert check_bridge_correct(compose(f, g), 300, 0) == 0
    g0 = registry.bridge(f"gentry:{N1Q4}:trivial")
    assert check_bridge_correct(compose(f, g0), 2000, 0) == 0


def test_circuit_bridges():
    h = trivial_fhe()
    xor = circuit_bridge(h, BooleanCircuit(2, ((XOR, 0, 1),), (2,)))
    kb = xor.keygen(1, derive_rng(0))
    assert kb.bk == kb.pk2 or kb.bk == ()
    assert xor.target.decrypt_fn(kb.sk2, xor.convert_fn(kb.bk, (1, 1), None)) == 0
    assert check_complete(xor, "exhaustive")["complete"]
    lite = config.hom_scheme("gsw-lite")
    and_ = circuit_bridge(lite, BooleanCircuit(2, ((AND, 0, 1),), (2,)))
    assert check_bridge_correct(and_, 1000, 0) == 0
    with pytest.raises(CircuitOutOfClass):
        circuit_bridge(lite, xor_chain(2, 8))


def test_composed_circuit_bridges_overflow():
    h = config.hom_scheme("gsw-small")
    b = and_tree_bridge(h, 3)
    assert b.correctness_unverified
    r = search_correctness_counterexample(b, 5000, 1)
    assert r["found"]
    assert and_tree_bridge(h, 1).correctness_unverified is False


def test_fche_trivial_exhaustive_small():
    s = fche_transform(trivial_fhe())
    circuits = list(enumerate_circuits(2, 2))
    assert check_fche_exhaustive(s, circuits)["holds"]


def test_fche_gsw_sampled(fche_gsw):
    h, s = fche_gsw
    def sampler(rng):
        return random_circuit(rng, int(rng.integers(1, 4)), int(rng.integers(1, 7)))
    r = check_fche(s, sampler, 100, seed=5)
    assert r["holds"] and r["checked"] == 100


def test_fche_shares_enc_dec(fche_gsw):
    h, s = fche_gsw
    kp = s.keygen(1, derive_rng(0))
    a = s.encrypt(kp.pk, 1, derive_rng(9)).value
    b = h.encrypt(kp.pk, 1, derive_rng(9)).value
    assert (a == b).all()
    for bit, c in zip(h.base.key_codec.encode(kp.sk), kp.evk.key_bits):
        assert h.decrypt(kp.sk, c) == bit


def test_recryption_noise_independent_of_input(fche_gsw):
    h, s = fche_gsw
    kp = s.keygen(1, derive_rng(1))
    p = config.gsw_params("gsw-fche")
    for i in range(5):
        garbage = h.base.wrap(h.base.ciphertext_space.sample(derive_rng(i, "g")))
        m = h.decrypt(kp.sk, garbage)
        out = s.recrypt(kp.evk, garbage)
        assert h.decrypt(kp.sk, out) == m
        assert gsw_noise(p, kp.sk, out.value, m) <= s.recrypt_bound


def test_fche_compose_eval():
    s = fche_transform(trivial_fhe())
    kp = s.keygen(1, derive_rng(0))
    and2 = BooleanCircuit(2, ((AND, 0, 1),), (2,))
    for m in (0, 1):
        c = s.encrypt(kp.pk, m, None)
        out = fche_compose_eval(s, kp.evk, duplicate(1), and2, [c])
        assert s.decrypt(kp.sk, out[0]) == m
    chain = xor_chain(4, 10)
    for bits in itertools.product((0, 1), repeat=4):
        ins = [s.encrypt(kp.pk, b, None) for b in bits]
        out = fche_compose_eval(s, kp.evk, chain, identity_circuit(1), ins)
        want = 0
        for b in bits:
            want ^= b
        # ten XORs fold inputs 1,2,3,0,1,2,3,0,1,2 into x0
        assert s.decrypt(kp.sk, out[0]) == bits[0] ^ bits[1] ^ bits[2] ^ bits[3] ^ bits[0] ^ bits[1] ^ bits[2] ^ bits[3] ^ bits[0] ^ bits[1] ^ bits[2]
    c = s.encrypt(kp.pk, 1, None)
    single = s.eval(kp.evk, and2, [c, c])
    both = fche_compose_eval(s, kp.evk, identity_circuit(2), and2, [c, c])
    assert single.value == both[0].value


def test_raw_gsw_not_fully_composable():
    h = config.hom_scheme("gsw-fche")
    w = squaring_witness(h, 0)
    assert w["found"] and w["expected"] != w["got"]
    sq = BooleanCircuit(1, ((AND, 0, 0),), (1,))
    r = check_fche(RawEval(h), lambda rng: sq, 200, seed=0)
    assert not r["holds"]


def test_bootstrap_chains_but_is_not_fche():
    h = config.hom_scheme("gsw-fche")
    s = BootstrapScheme(h)
    c1 = BooleanCircuit(4, ((XOR, 0, 1), (XOR, 2, 3)), (4, 5))
    c2 = BooleanCircuit(2, ((XOR, 0, 1),), (2,))
    chain = check_fresh_chain(s, c1, c2, seed=0)
    assert chain["holds"] and chain["checked"] == 16
    w = garbage_witness(s, c2, seed=0)
    assert w["found"] and w["expected"] != w["got"]


def _pair():
    return registry._gentry_pair()


def test_zero_substituted_structure():
    composed = _pair()
    zs = zero_substituted_bridge_key(composed)
    real = real_bridge_key_sampler(composed)
    rng = derive_rng(0)
    x = zs.base(rng)
    sample, sk_h = zs.fiber_with_secret(x, rng)
    e = composed.parts[0].target.key_bits
    assert len(sample[-1]) == e == len(real(derive_rng(1))[-1])
    h = composed.parts[1].target
    assert all(h.decrypt(sk_h, c) == 0 for c in sample[-1])
    # repeated fiber calls keep the base part and vary the rest
    s1, s2 = zs.fiber(x, derive_rng(2)), zs.fiber(x, derive_rng(3))
    assert s1[:3] == s2[:3] == x
    assert not (s1[4][0].value == s2[4][0].value).all()


def test_zero_substitution_needs_independent_gentry():
    with pytest.raises(WrongKeyMode):
        zero_substituted_bridge_key(registry.bridge("halfkey-composed"))
    h = config.hom_scheme("gsw-fche")
    shared = gentry_bridge(GentryBridgeSpec(h.base, h, key_mode="shared"))
    from bridgelab.bridges import identity_bridge
    with pytest.raises(WrongKeyMode):
        zero_substituted_bridge_key(compose(identity_bridge(h.base), shared))
