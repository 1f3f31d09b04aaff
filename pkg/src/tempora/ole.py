"""Oblivious linear evaluation: the ideal functionality and OLE+.

``f_ole`` is a trusted broker: the receiver learns ``a*c + b`` and nothing
else flows anywhere.  ``ole_plus`` runs two ``f_ole`` calls so that the
receiver's input is hidden from the sender behind a random mask ``r``:

1. receiver sends ``(c^-1, r)`` into the first call, sender picks ``u`` and
   learns ``t = c^-1 * u + r``;
2. sender sends ``(t + a, b - u)`` into the second call, receiver gets
   ``k = (t + a) * c + b - u = a*c + b + r*c``;
3. receiver outputs ``k - r*c``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, TextIO

from .errors import FieldMismatch, ProtocolAbort, ReceiverInputZero
from .field import FieldElement


@dataclass(frozen=True)
class OleSenderInput:
    a: FieldElement
    b: FieldElement

    def __post_init__(self):
        if self.a.field.p != self.b.field.p:
            raise FieldMismatch("sender inputs from different fields")


@dataclass(frozen=True)
class OleReceiverInput:
    c: FieldElement


def f_ole(sender: OleSenderInput, receiver: OleReceiverInput) -> FieldElement:
    if sender.a.field.p != receiver.c.field.p:
        raise FieldMismatch("sender and receiver use different fields")
    return sender.a * receiver.c + sender.b


@dataclass
class Transcript:
    """Messages seen by each side of OLE+ sessions, as JSON-able records."""

    records: list[dict] = field(default_factory=list)

    def log(self, session, direction: str, value):
        self.records.append({"session": session, "direction": direction, "value": str(int(value))})

    def dump(self, fh: TextIO):
        for rec in self.records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def values(self, direction: str, session=None) -> list[int]:
        return [int(r["value"]) for r in self.records
                if r["direction"] == direction and (session is None or r["session"] == session)]


# hook(stage, values) -> replacement values; stages are "first", "second"
Hook = Callable[[str, tuple], tuple]


def _apply_hook(hook, stage, values, fld, session):
    if hook is None:
        return values
    out = hook(stage, values)
    if not isinstance(out, tuple) or len(out) != len(values):
        raise ProtocolAbort(f"malformed {stage} OLE input in session {session}", phase="ole")
    for v in out:
        if not isinstance(v, FieldElement) or v.field.p != fld.p:
            raise ProtocolAbort(f"malformed {stage} OLE input in session {session}", phase="ole")
    return out


def ole_plus(sender: OleSenderInput, receiver: OleReceiverInput, rng: random.Random,
             transcript: Transcript | None = None, session=0, hook: Hook | None = None) -> FieldElement:
    """Receiver's output ``a*c + b``; the sender only ever sees ``t``.

    ``rng`` draws the receiver mask ``r`` first, then the sender mask ``u``.
    ``hook`` lets a test replace the values fed into either inner call; a
    malformed replacement aborts the session.
    """
    fld = receiver.c.field
    if sender.a.field.p != fld.p:
        raise FieldMismatch("sender and receiver use different fields")
    if receiver.c.value == 0:
        raise ReceiverInputZero("OLE+ needs an invertible receiver input")
    r = fld.random(rng)
    u = fld.random(rng)
    c_inv, r = _apply_hook(hook, "first", (receiver.c.inv(), r), fld, session)
    # first call: sender contributes (u, r) via the (c^-1, r) linear map
    t = f_ole(OleSenderInput(c_inv, r), OleReceiverInput(u))
    if transcript is not None:
        transcript.log(session, "to_sender", t)
    a2, b2 = _apply_hook(hook, "second", (t + sender.a, sender.b - u), fld, session)
    k = f_ole(OleSenderInput(a2, b2), receiver)
    if transcript is not None:
        transcript.log(session, "to_receiver", k)
    return k - r * receiver.c
