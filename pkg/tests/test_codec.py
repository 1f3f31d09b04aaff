import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from tempora import codec, tf
from tempora.timelock import keygen

from conftest import make_clients


@pytest.fixture(scope="module")
def fixture():
    rng = random.Random(31)
    sp = tf.s_setup(rng, 128, 2, 1)
    clients, ms = make_clients(sp, 3, rng)
    ev = tf.evaluate(clients, sp, {1: 1, 2: 2, 3: 3}, 1, 1, rng)
    return sp, clients, ev


def roundtrip(doc, kind):
    text = codec.dumps(doc)
    back = json.loads(text)
    codec.validate(back, kind)
    return back


def test_setup_roundtrip(fixture):
    sp = fixture[0]
    assert codec.setup_from_json(roundtrip(codec.setup_to_json(sp), "setup")) == sp


def test_puzzle_roundtrip(fixture):
    sp, clients, _ = fixture
    pz = clients[1].puzzle
    back = codec.puzzle_from_json(roundtrip(codec.puzzle_to_json(sp, pz.vector, pz.pp), "puzzle"))
    assert back == (sp, pz.vector, pz.pp)


def test_eval_and_solution_roundtrip(fixture):
    sp, _, ev = fixture
    assert codec.eval_from_json(roundtrip(codec.eval_to_json(sp, ev.g, ev.epp), "eval")) == (sp, ev.g, ev.epp)
    res, proof = tf.solve_combination(ev.g, ev.epp, sp)
    doc = roundtrip(codec.solution_to_json(tf.EVAL_PUZZLE, res, proof), "solution")
    assert codec.solution_from_json(doc) == (tf.EVAL_PUZZLE, res, proof)
    single = tf.SinglePuzzleProof(12345)
    doc = roundtrip(codec.solution_to_json(tf.CLIENT_PUZZLE, 7, single), "solution")
    assert codec.solution_from_json(doc) == (tf.CLIENT_PUZZLE, 7, single)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_keys_roundtrip(seed):
    keys = keygen(random.Random(seed), 32)
    assert codec.keys_from_json(roundtrip(codec.keys_to_json(keys), "keys")) == keys


def test_integers_are_decimal_strings(fixture):
    sp, clients, _ = fixture
    doc = codec.puzzle_to_json(sp, clients[1].puzzle.vector, clients[1].puzzle.pp)
    assert isinstance(doc["field"]["p"], str) and all(isinstance(x, str) for x in doc["puzzle"]["o"])


@pytest.mark.parametrize("edit,pointer", [
    (lambda d: d["pp"].update(com="zz"), "/pp/com"),
    (lambda d: d["puzzle"]["o"].__setitem__(1, "-4"), "/puzzle/o/1"),
    (lambda d: d["puzzle"]["o"].__setitem__(0, 17), "/puzzle/o/0"),
    (lambda d: d.pop("pp"), "/"),
    (lambda d: d.update(version=2), "/version"),
])
def test_schema_errors_carry_pointer(fixture, edit, pointer):
    sp, clients, _ = fixture
    doc = codec.puzzle_to_json(sp, clients[1].puzzle.vector, clients[1].puzzle.pp)
    edit(doc)
    with pytest.raises(codec.SchemaError) as exc:
        codec.validate(doc, "puzzle")
    assert exc.value.pointer == pointer


def test_pointer_escaping():
    assert codec._pointer(["a/b", "c~d", 0]) == "/a~1b/c~0d/0"


def test_dumps_is_canonical():
    assert codec.dumps({"b": 1, "a": 2}) == codec.dumps({"a": 2, "b": 1})
