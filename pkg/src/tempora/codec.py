"""JSON forms of protocol objects and the schemas for the CLI's files.

Integers are written as decimal strings so nothing depends on a JSON
reader's number range.
"""

from __future__ import annotations

import json

import jsonschema

from .crypto import Commitment
from .errors import InvalidParameters
from .field import FieldParams
from .tf import (
    CombinationProof,
    EvalPublicParams,
    EvalPuzzle,
    LeaderRecord,
    Opening,
    PuzzlePublicParams,
    PuzzleVector,
    ServerParams,
    SinglePuzzleProof,
)
from .timelock import ClientKeys

VERSION = 1

_INT = {"type": "string", "pattern": "^(0|[1-9][0-9]*)$"}
_HEX32 = {"type": "string", "pattern": "^[0-9a-f]{64}$"}
_INTS = {"type": "array", "items": _INT, "minItems": 1}
_FIELD = {"type": "object", "required": ["p"], "properties": {"p": _INT}}

_SETUP_PROPS = {
    "version": {"const": VERSION},
    "field": _FIELD,
    "xs": _INTS,
    "leaders": {"type": "integer", "minimum": 1},
    "threshold": {"type": "integer", "minimum": 1},
    "universe_bits": {"type": "integer", "minimum": 1},
}

SCHEMAS = {
    "setup": {
        "type": "object",
        "required": ["version", "field", "xs", "leaders", "threshold"],
        "properties": _SETUP_PROPS,
    },
    "keys": {
        "type": "object",
        "required": ["version", "N", "phi"],
        "properties": {"version": {"const": VERSION}, "N": _INT, "phi": _INT, "p1": _INT, "p2": _INT},
    },
    "puzzle": {
        "type": "object",
        "required": ["version", "field", "xs", "puzzle", "pp"],
        "properties": {
            **_SETUP_PROPS,
            "puzzle": {"type": "object", "required": ["o"], "properties": {"o": _INTS}},
            "pp": {
                "type": "object",
                "required": ["com", "T", "r", "N"],
                "properties": {"com": _HEX32, "T": _INT, "r": _INT, "N": _INT},
            },
        },
    },
    "eval": {
        "type": "object",
        "required": ["version", "field", "xs", "g", "epp"],
        "properties": {
            **_SETUP_PROPS,
            "g": _INTS,
            "epp": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["leader", "h", "com", "N", "Y"],
                    "properties": {"leader": {"type": "integer"}, "h": _INT, "com": _HEX32, "N": _INT, "Y": _INT},
                },
            },
        },
    },
    "solution": {
        "type": "object",
        "required": ["version", "kind", "value", "proof"],
        "properties": {
            "version": {"const": VERSION},
            "kind": {"enum": ["clientPzl", "evalPzl"]},
            "value": _INT,
            "proof": {
                "oneOf": [
                    {"type": "object", "required": ["mk"], "properties": {"mk": _INT}, "additionalProperties": False},
                    {
                        "type": "object",
                        "required": ["openings"],
                        "additionalProperties": False,
                        "properties": {
                            "openings": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "required": ["leader", "root", "tk"],
                                    "properties": {"leader": {"type": "integer"}, "root": _INT, "tk": _INT},
                                },
                            }
                        },
                    },
                ]
            },
        },
    },
}


class SchemaError(ValueError):
    """A document does not match its schema; ``pointer`` is a JSON pointer."""

    def __init__(self, message, pointer="/"):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


def _pointer(path) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts)


def validate(doc, kind: str):
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _pointer(err.absolute_path))


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _s(n) -> str:
    return str(int(n))


def _ints(xs) -> list[str]:
    return [_s(x) for x in xs]


# --------------------------------------------------------------- to / from

def setup_to_json(sp: ServerParams) -> dict:
    return {
        "version": VERSION,
        "field": {"p": _s(sp.p)},
        "xs": _ints(sp.xs),
        "leaders": sp.leader_count,
        "threshold": sp.threshold,
        "universe_bits": sp.universe_bits,
    }


def setup_from_json(doc) -> ServerParams:
    try:
        return ServerParams(
            FieldParams(int(doc["field"]["p"])),
            tuple(int(x) for x in doc["xs"]),
            doc["leaders"],
            doc["threshold"],
            doc.get("universe_bits", 64),
        )
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from None


def keys_to_json(keys: ClientKeys) -> dict:
    doc = {"version": VERSION, "N": _s(keys.N), "phi": _s(keys.phi)}
    if keys.p1:
        doc.update(p1=_s(keys.p1), p2=_s(keys.p2))
    return doc


def keys_from_json(doc) -> ClientKeys:
    return ClientKeys(int(doc["N"]), int(doc["phi"]), int(doc.get("p1", 0)), int(doc.get("p2", 0)))


def pp_to_json(pp: PuzzlePublicParams) -> dict:
    return {"com": pp.com.hex(), "T": _s(pp.T), "r": _s(pp.r), "N": _s(pp.N)}


def pp_from_json(doc) -> PuzzlePublicParams:
    return PuzzlePublicParams(Commitment.from_hex(doc["com"]), int(doc["T"]), int(doc["r"]), int(doc["N"]))


def puzzle_to_json(sp: ServerParams, o: PuzzleVector, pp: PuzzlePublicParams) -> dict:
    return {**setup_to_json(sp), "puzzle": {"o": _ints(o.o)}, "pp": pp_to_json(pp)}


def puzzle_from_json(doc) -> tuple[ServerParams, PuzzleVector, PuzzlePublicParams]:
    return setup_from_json(doc), PuzzleVector(tuple(int(x) for x in doc["puzzle"]["o"])), pp_from_json(doc["pp"])


def epp_to_json(epp: EvalPublicParams) -> list:
    return [{"leader": r.leader, "h": _s(r.h), "com": r.com.hex(), "N": _s(r.N), "Y": _s(r.Y)} for r in epp.records]


def epp_from_json(items) -> EvalPublicParams:
    return EvalPublicParams(tuple(
        LeaderRecord(r["leader"], int(r["h"]), Commitment.from_hex(r["com"]), int(r["N"]), int(r["Y"]))
        for r in items))


def eval_to_json(sp: ServerParams, g: EvalPuzzle, epp: EvalPublicParams) -> dict:
    return {**setup_to_json(sp), "g": _ints(g.g), "epp": epp_to_json(epp)}


def eval_from_json(doc) -> tuple[ServerParams, EvalPuzzle, EvalPublicParams]:
    return setup_from_json(doc), EvalPuzzle(tuple(int(x) for x in doc["g"])), epp_from_json(doc["epp"])


def proof_to_json(proof) -> dict:
    if isinstance(proof, SinglePuzzleProof):
        return {"mk": _s(proof.mk)}
    return {"openings": [{"leader": o.leader, "root": _s(o.root), "tk": _s(o.tk)} for o in proof.openings]}


def proof_from_json(doc):
    if "mk" in doc:
        return SinglePuzzleProof(int(doc["mk"]))
    return CombinationProof(tuple(Opening(o["leader"], int(o["root"]), int(o["tk"])) for o in doc["openings"]))


def solution_to_json(kind: str, value: int, proof) -> dict:
    return {"version": VERSION, "kind": kind, "value": _s(value), "proof": proof_to_json(proof)}


def solution_from_json(doc):
    return doc["kind"], int(doc["value"]), proof_from_json(doc["proof"])
