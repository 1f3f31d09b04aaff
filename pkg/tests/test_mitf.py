import random

import pytest

from tempora import mitf
from tempora.errors import InvalidParameters, SolutionExtractionFailure, TamperSuspected
from tempora.poly import DensePoly
from tempora.timelock import keygen


@pytest.fixture(scope="module")
def chain():
    rng = random.Random(21)
    cp = mitf.mi_setup(rng, deltas=[4, 3, 5, 2, 6], max_ss=3)
    keys = keygen(rng, 128)
    ms = [rng.randrange(1 << 64) for _ in range(cp.z)]
    return cp, keys, ms, mitf.mi_gen_puzzles(ms, keys, cp, rng)


def test_params(chain):
    cp, *_ = chain
    assert cp.z == 5 and cp.Ts == (12, 9, 15, 6, 18)
    with pytest.raises(InvalidParameters):
        mitf.ChainParams(cp.field, cp.xs, (), 1)
    with pytest.raises(InvalidParameters):
        mitf.ChainParams(cp.field, cp.xs[:2], (1,), 1)
    with pytest.raises(InvalidParameters):
        mitf.ChainParams(cp.field, (1, 2, 3), (1,), 1)
    with pytest.raises(InvalidParameters):
        mitf.ChainParams(cp.field, cp.xs, (1, 0), 1)


def test_chain_roundtrip(chain):
    cp, keys, ms, pz = chain
    seen = []
    out = mitf.mi_solve_chain(pz.o, pz.pp, cp, progress=seen.append)
    assert [m for m, _ in out] == ms
    assert [mk for _, mk in out] == list(pz.mks)
    assert seen[-1] == sum(cp.Ts)
    for j, (m, mk) in enumerate(out, start=1):
        assert mitf.mi_verify(m, mk, (pz.pp, j), cp, mitf.CLIENT_PUZZLE)
        assert not mitf.mi_verify(m + 1, mk, (pz.pp, j), cp, mitf.CLIENT_PUZZLE)
    assert not mitf.mi_verify(ms[0], out[0][1], (pz.pp, 0), cp, mitf.CLIENT_PUZZLE)


def test_bases_follow_previous_key(chain):
    cp, keys, ms, pz = chain
    assert pz.bases[0] == pz.pp.r1
    for j in range(2, cp.z + 1):
        assert pz.bases[j - 1] == mitf.chain_base(j, pz.mks[j - 2], cp, keys.N)
        assert pz.mks[j - 1] == pow(pz.bases[j - 1], 2**cp.Ts[j - 1], keys.N)


def test_wrong_message_count(chain):
    cp, keys, ms, _ = chain
    with pytest.raises(InvalidParameters):
        mitf.mi_gen_puzzles(ms[:-1], keys, cp, random.Random(0))
    with pytest.raises(InvalidParameters):
        mitf.mi_gen_puzzles([1 << 64] + ms[1:], keys, cp, random.Random(0))


def test_tampered_row_lenient(chain):
    cp, keys, ms, pz = chain
    rows = [list(r) for r in pz.o]
    rows[2][0] = (rows[2][0] + 1) % cp.p
    with pytest.raises(TamperSuspected) as exc:
        mitf.mi_solve_chain(rows, pz.pp, cp)
    assert exc.value.index == 3
    out = mitf.mi_solve_chain(rows, pz.pp, cp, strict=False)
    assert out[2][0] is None
    assert [m for m, _ in out[3:]] == ms[3:]


def test_combination(chain):
    cp, keys, ms, pz = chain
    rng = random.Random(3)
    q = [rng.randrange(1 << 64) for _ in ms]
    g, epp, grant = mitf.mi_evaluate(pz, keys, cp, q, 2, rng)
    for i in range(mitf.POINTS):
        assert sum(row[i] for row in grant.y) % cp.p == 0
    res, proof = mitf.mi_solve_combination(g, epp, cp, rng)
    assert res == sum(a * b for a, b in zip(q, ms)) % cp.p
    assert proof == (grant.root, grant.tk)
    assert mitf.mi_verify(res, proof, (g, epp), cp, mitf.EVAL_PUZZLE)
    assert not mitf.mi_verify(res + 1, proof, (g, epp), cp, mitf.EVAL_PUZZLE)
    # theta is degree 2: (sum q m + sum q * x) * (x - root)
    theta = mitf._theta(g, grant.tk, cp)
    lin = DensePoly((res, sum(q) % cp.p), cp.field)
    assert theta == lin * DensePoly.from_roots([grant.root], cp.field)


def test_grant_checks(chain):
    cp, keys, ms, pz = chain
    rng = random.Random(4)
    with pytest.raises(InvalidParameters):
        mitf.mi_grant(pz, keys, cp, [1] * (cp.z - 1), 2, rng)
    with pytest.raises(InvalidParameters):
        mitf.mi_grant(pz, keys, cp, [1 << 64] + [1] * (cp.z - 1), 2, rng)
    # must open before the first puzzle
    with pytest.raises(InvalidParameters):
        mitf.mi_grant(pz, keys, cp, [1] * cp.z, cp.Ts[0], rng)


def test_zero_coefficients_fail_extraction(chain):
    cp, keys, ms, pz = chain
    rng = random.Random(5)
    g, epp, _ = mitf.mi_evaluate(pz, keys, cp, [0] * cp.z, 1, rng)
    with pytest.raises(SolutionExtractionFailure):
        mitf.mi_solve_combination(g, epp, cp, rng)


def test_verify_unknown_command(chain):
    with pytest.raises(ValueError):
        mitf.mi_verify(1, None, None, chain[0], "x")
