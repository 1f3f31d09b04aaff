import random

import pytest
from hypothesis import given, settings, strategies as st

from tempora import tf
from tempora.crypto import commit
from tempora.errors import (InvalidParameters, OpeningMismatch, ProtocolAbort, SolutionExtractionFailure,
                            TamperSuspected)
from tempora.field import FieldParams
from tempora.poly import DensePoly, interpolate
from tempora.timelock import keygen

from conftest import make_clients


@pytest.fixture(scope="module")
def sp():
    return tf.s_setup(random.Random(10), 128, leader_count=2, threshold=1)


def test_setup_shape(sp):
    assert sp.p.bit_length() == 128 and sp.t_bar == 4 and len(set(sp.xs)) == 4
    assert all(sp.universe <= x < sp.p for x in sp.xs)
    assert tf.check_server_params(sp)
    assert not tf.check_server_params(sp, min_bits=256)


@pytest.mark.parametrize("bad", [dict(leader_count=0), dict(leader_count=2, threshold=3),
                                 dict(threshold=0), dict(lambda_bits=64)])
def test_setup_rejects(bad):
    with pytest.raises(InvalidParameters):
        tf.s_setup(random.Random(0), **{"lambda_bits": 128, **bad})


def test_gen_puzzle_rejects_bad_setup(sp, keys):
    dup = tf.ServerParams(sp.field, (sp.xs[0],) * 4, 2, 1)
    with pytest.raises(InvalidParameters):
        tf.gen_puzzle(5, keys, dup, 1, 1, random.Random(0))
    low = tf.ServerParams(sp.field, (5, 6, 7, 8), 2, 1)
    with pytest.raises(InvalidParameters):
        tf.gen_puzzle(5, keys, low, 1, 1, random.Random(0))
    with pytest.raises(InvalidParameters):
        tf.gen_puzzle(1 << 64, keys, sp, 1, 1, random.Random(0))


def test_puzzle_structure(sp, keys):
    pz = tf.gen_puzzle(1234, keys, sp, 4, 5, random.Random(1))
    assert pz.pp.T == 20 and len(pz.vector) == sp.t_bar
    assert pz.mk == pow(pz.pp.r, 2**20, keys.N)
    # unblinding with the master key gives x + m at every grid point
    pts = tf.unblind_single(pz.vector, pz.mk, sp)
    assert all(y == (x + 1234) % sp.p for x, y in zip(pts.xs, pts.ys))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(0, 1000))
def test_single_roundtrip(m, seed):
    sp = tf.s_setup(random.Random(seed), 128)
    keys = keygen(random.Random(seed), 128)
    pz = tf.gen_puzzle(m, keys, sp, 3, 1, random.Random(seed))
    got, proof = tf.solve_single(pz.vector, pz.pp, sp)
    assert got == m and proof.mk == pz.mk
    assert tf.verify(got, proof, pz.pp, sp, tf.CLIENT_PUZZLE)
    assert not tf.verify(got + 1, proof, pz.pp, sp, tf.CLIENT_PUZZLE)
    assert tf.puzzle_consistent(got, proof, pz.vector, sp)


def test_single_tamper_suspected(sp, keys):
    pz = tf.gen_puzzle(9, keys, sp, 2, 1, random.Random(2))
    o = list(pz.vector.o)
    o[1] = (o[1] + 1) % sp.p
    bad = tf.PuzzleVector(tuple(o))
    with pytest.raises(TamperSuspected):
        tf.solve_single(bad, pz.pp, sp)
    m, proof = tf.solve_single(bad, pz.pp, sp, strict=False)
    assert not tf.puzzle_consistent(9, proof, bad, sp)
    assert tf.verify_single(9, proof, pz.pp)


def test_coin_toss():
    rngs = {u: random.Random(u) for u in (1, 2, 3)}
    a = tf.coin_toss(rngs)
    assert len(a) == tf.COIN_BYTES
    assert a == tf.coin_toss({u: random.Random(u) for u in (1, 2, 3)})
    assert a != tf.coin_toss({u: random.Random(u + 10) for u in (1, 2, 3)})


def test_coin_reveal_mismatch():
    share, nonce, com = tf.coin_commit(random.Random(1))
    share2, nonce2, com2 = tf.coin_commit(random.Random(2))
    with pytest.raises(OpeningMismatch) as exc:
        tf.coin_combine({1: com, 2: com2}, {1: (share, nonce), 2: (share, nonce2)})
    assert exc.value.party == 2
    with pytest.raises(OpeningMismatch):
        tf.coin_combine({1: com, 2: com2}, {1: (share, nonce)})
    xor = bytes(a ^ b for a, b in zip(share, share2))
    assert tf.coin_combine({1: com, 2: com2}, {1: (share, nonce), 2: (share2, nonce2)}) == xor


@given(st.integers(1, 12), st.data())
def test_select_leaders(n, data):
    count = data.draw(st.integers(1, n))
    seed = data.draw(st.binary(min_size=32, max_size=32))
    ls = tf.select_leaders(n, count, seed)
    assert len(ls) == count == len(set(ls)) and all(1 <= l <= n for l in ls)
    assert ls == tf.select_leaders(n, count, seed)


def test_select_leaders_too_many():
    with pytest.raises(InvalidParameters):
        tf.select_leaders(2, 3, b"\0" * 32)


def oracle_sum(q, ms, p):
    return sum(q[u] * ms[u] for u in ms) % p


@pytest.mark.parametrize("n,lc", [(1, 1), (2, 2), (3, 1), (4, 3)])
def test_evaluate_and_solve(n, lc):
    rng = random.Random(100 * n + lc)
    sp = tf.s_setup(rng, 128, lc, 1)
    clients, ms = make_clients(sp, n, rng)
    q = {u: rng.randrange(1 << 64) for u in clients}
    ev = tf.evaluate(clients, sp, q, 2, 2, rng)
    assert len(ev.leaders) == lc
    # zero-sum masks
    for i in range(sp.t_bar):
        assert sum(gr.y[i] for gr in ev.grants.values()) % sp.p == 0
    res, proof = tf.solve_combination(ev.g, ev.epp, sp, rng)
    assert res == oracle_sum(q, ms, sp.p)
    assert tf.verify(res, proof, (ev.g, ev.epp), sp, tf.EVAL_PUZZLE)
    assert not tf.verify(res + 1, proof, (ev.g, ev.epp), sp, tf.EVAL_PUZZLE)
    assert sorted(o.root for o in proof.openings) == sorted(ev.states[l].root for l in ev.leaders)


def test_theta_shape():
    # the unblinded combination is (sum q m + sum q x) * prod (x - root)
    rng = random.Random(5)
    sp = tf.s_setup(rng, 128, 2, 1)
    clients, ms = make_clients(sp, 3, rng)
    q = {1: 2, 2: 3, 3: 5}
    ev = tf.evaluate(clients, sp, q, 1, 1, rng)
    theta = interpolate(tf.unblind_combination(ev.g, [ev.states[l].tk for l in ev.leaders], sp))
    p = sp.p
    inner = DensePoly((oracle_sum(q, ms, p), sum(q.values())), sp.field)
    assert theta == DensePoly.from_roots([ev.states[l].root for l in ev.leaders], sp.field) * inner


def test_missing_gamma_or_key_aborts():
    rng = random.Random(6)
    sp = tf.s_setup(rng, 128, 1, 1)
    clients, _ = make_clients(sp, 2, rng)
    st_ = tf.prepare_leader(1, clients[1].keys, sp, 1, 1, [1, 2], rng)
    with pytest.raises(ProtocolAbort) as exc:
        tf.nonleader_grant(2, clients[2].puzzle.secret, sp, 1, [1], {1: st_.gamma_prime}, {})
    assert exc.value.party == 2 and exc.value.phase == "grant"
    with pytest.raises(ProtocolAbort):
        tf.nonleader_grant(2, clients[2].puzzle.secret, sp, 1, [1], {}, {1: st_.f_keys[2]})
    with pytest.raises(InvalidParameters):
        tf.nonleader_grant(1, clients[1].puzzle.secret, sp, 1, [1], {1: st_.gamma_prime}, {})


def test_coefficient_outside_universe():
    rng = random.Random(7)
    sp = tf.s_setup(rng, 128, 1, 1)
    clients, _ = make_clients(sp, 2, rng)
    with pytest.raises(InvalidParameters):
        tf.evaluate(clients, sp, {1: 1 << 64, 2: 1}, 1, 1, rng)


def test_equal_leader_delays_enforced():
    rec = tf.LeaderRecord(1, 2, commit(1, 1), 35, 4)
    with pytest.raises(InvalidParameters):
        tf.EvalPublicParams((rec, tf.LeaderRecord(2, 2, commit(1, 1), 35, 5)))


def test_zero_combination_is_an_extraction_failure():
    rng = random.Random(8)
    sp = tf.s_setup(rng, 128, 1, 1)
    clients, _ = make_clients(sp, 2, rng)
    ev = tf.evaluate(clients, sp, {1: 0, 2: 0}, 1, 1, rng)
    with pytest.raises(SolutionExtractionFailure):
        tf.solve_combination(ev.g, ev.epp, sp, rng)


def test_wrong_length_g():
    rng = random.Random(9)
    sp = tf.s_setup(rng, 128, 1, 1)
    clients, _ = make_clients(sp, 1, rng)
    ev = tf.evaluate(clients, sp, {1: 1}, 1, 1, rng)
    short = tf.EvalPuzzle(ev.g.g[:-1])
    with pytest.raises(SolutionExtractionFailure):
        tf.solve_combination(short, ev.epp, sp)
    res, proof = tf.solve_combination(ev.g, ev.epp, sp, rng)
    assert not tf.verify_combination(res, proof, short, ev.epp, sp)


def test_verify_unknown_command(sp):
    with pytest.raises(ValueError):
        tf.verify(1, None, None, sp, "other")


def test_small_field_fixture():
    # tiny fields are allowed when the caller lowers the floor explicitly
    sp = tf.ServerParams(FieldParams(65537), (300, 400, 500), 1, 1, universe_bits=8)
    keys = keygen(random.Random(1), 32)
    pz = tf.gen_puzzle(200, keys, sp, 2, 1, random.Random(1), min_bits=8)
    assert tf.solve_single(pz.vector, pz.pp, sp)[0] == 200
