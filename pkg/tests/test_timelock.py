import random

import pytest
from hypothesis import given, settings, strategies as st

from tempora.errors import InvalidKey, InvalidParameters, SolveCancelled, TamperDetected
from tempora.timelock import (ClientKeys, TimelockParams, baseline_gen_puzzle, baseline_rsa_tlp_roundtrip,
                              baseline_solve, keygen, sequential_power, trapdoor_power)


def test_keys_from_primes(toy_keys):
    assert toy_keys.N == 1000003 * 1000033
    assert toy_keys.phi == 1000002 * 1000032
    assert toy_keys.public() == toy_keys.N
    with pytest.raises(InvalidKey):
        ClientKeys.from_primes(7, 7)
    with pytest.raises(InvalidKey):
        ClientKeys.from_primes(7, 9)
    with pytest.raises(InvalidKey):
        ClientKeys(15, 9, 3, 5)


def test_keygen_sizes():
    k = keygen(random.Random(1), 64)
    assert k.p1.bit_length() == 64 and k.p2.bit_length() == 64 and k.p1 != k.p2
    with pytest.raises(InvalidParameters):
        keygen(random.Random(1), 4)


def test_timelock_params():
    assert TimelockParams(max_ss=7, delta=3).T == 21
    with pytest.raises(InvalidParameters):
        TimelockParams(0, 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=10**12), st.integers(min_value=0, max_value=2000))
def test_trapdoor_matches_builtin(r, T):
    keys = ClientKeys.from_primes(1000003, 1000033)
    r %= keys.N
    if r == 0:
        r = 1
    expected = pow(r, 2**T, keys.N)
    assert trapdoor_power(r, T, keys) == expected
    assert sequential_power(r, T, keys.N) == expected


def test_base_must_be_in_range(toy_keys):
    for r in (0, toy_keys.N, -1):
        with pytest.raises(InvalidParameters):
            trapdoor_power(r, 5, toy_keys)
        with pytest.raises(InvalidParameters):
            sequential_power(r, 5, toy_keys.N)
    with pytest.raises(InvalidParameters):
        sequential_power(2, -1, toy_keys.N)


def test_progress_and_cancel(toy_keys):
    seen = []
    sequential_power(3, 100, toy_keys.N, seen.append, every=32)
    assert seen == [32, 64, 96, 100]
    with pytest.raises(SolveCancelled):
        sequential_power(3, 100, toy_keys.N, lambda done: done < 50, every=32)


def test_baseline_roundtrip(keys):
    assert baseline_rsa_tlp_roundtrip(b"hello", keys, 50, random.Random(2)) == b"hello"


def test_baseline_tamper(keys):
    pz = baseline_gen_puzzle(b"hello", keys, 20, random.Random(3))
    bad = type(pz)(pz.o1[:-1] + bytes([pz.o1[-1] ^ 1]), pz.o2, pz.T, pz.r, pz.N)
    with pytest.raises(TamperDetected):
        baseline_solve(bad)
    bad = type(pz)(pz.o1, (pz.o2 + 1) % pz.N, pz.T, pz.r, pz.N)
    with pytest.raises(TamperDetected):
        baseline_solve(bad)


def test_baseline_needs_big_modulus(toy_keys):
    with pytest.raises(InvalidParameters):
        baseline_gen_puzzle(b"x", toy_keys, 5)
