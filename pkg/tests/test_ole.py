import io
import json
import random

import pytest
from hypothesis import given, strategies as st

from tempora.errors import FieldMismatch, ProtocolAbort, ReceiverInputZero
from tempora.field import FieldParams
from tempora.ole import OleReceiverInput, OleSenderInput, Transcript, f_ole, ole_plus

F = FieldParams(2**127 - 1)
P101 = FieldParams(101)
vals = st.integers(min_value=0, max_value=F.p - 1)


@given(vals, vals, vals.filter(bool), st.integers(0, 2**32))
def test_ole_plus_is_linear_evaluation(a, b, c, seed):
    out = ole_plus(OleSenderInput(F(a), F(b)), OleReceiverInput(F(c)), random.Random(seed))
    assert out.value == (a * c + b) % F.p


def test_f_ole():
    assert f_ole(OleSenderInput(P101(3), P101(4)), OleReceiverInput(P101(5))) == 19


def test_zero_receiver_input():
    with pytest.raises(ReceiverInputZero):
        ole_plus(OleSenderInput(F(1), F(1)), OleReceiverInput(F(0)), random.Random(0))


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        OleSenderInput(F(1), P101(1))
    with pytest.raises(FieldMismatch):
        ole_plus(OleSenderInput(P101(1), P101(1)), OleReceiverInput(F(3)), random.Random(0))


def test_sender_view_is_uniform_over_receiver_mask():
    # fix the sender's u via the rng and enumerate every receiver mask r: t
    # must take each value of F_101 exactly once
    sender = OleSenderInput(P101(17), P101(42))
    for c in (1, 2, 50, 100):
        seen = []
        for r in range(101):
            def force_r(stage, values, r=r):
                return (values[0], P101(r)) if stage == "first" else values
            t = Transcript()
            ole_plus(sender, OleReceiverInput(P101(c)), random.Random(7), t, hook=force_r)
            seen.append(t.values("to_sender")[0])
        assert sorted(seen) == list(range(101))


def test_transcript_records_both_directions():
    t = Transcript()
    ole_plus(OleSenderInput(F(2), F(3)), OleReceiverInput(F(4)), random.Random(1), t, session="s")
    assert [r["direction"] for r in t.records] == ["to_sender", "to_receiver"]
    assert t.values("to_sender", "s") and t.values("to_sender", "other") == []
    buf = io.StringIO()
    t.dump(buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert lines[0]["session"] == "s" and isinstance(lines[0]["value"], str)


def test_hook_can_corrupt_result():
    def bump(stage, values):
        return (values[0], values[1] + 1) if stage == "second" else values
    out = ole_plus(OleSenderInput(F(2), F(3)), OleReceiverInput(F(4)), random.Random(1), hook=bump)
    assert out.value == 12


def test_malformed_hook_output_aborts():
    with pytest.raises(ProtocolAbort):
        ole_plus(OleSenderInput(F(2), F(3)), OleReceiverInput(F(4)), random.Random(1),
                 hook=lambda stage, values: (values[0],))
    with pytest.raises(ProtocolAbort):
        ole_plus(OleSenderInput(F(2), F(3)), OleReceiverInput(F(4)), random.Random(1),
                 hook=lambda stage, values: (values[0], 5))
