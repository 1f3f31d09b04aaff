"""In-process simulation of a full multi-client run.

Parties talk only through :class:`Network`, which keeps one FIFO
:class:`Channel` per ordered pair and logs every delivered message.  An
adversary hook sees each message before delivery and may replace it or drop
it.  Every party draws randomness from its own generator forked off the run
seed, so two runs with the same seed and config publish identical bytes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import random
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import codec, tf
from .crypto import Commitment, PrfKey
from .errors import InvalidParameters, ProtocolAbort, TemporaError
from .ole import Transcript
from .timelock import keygen

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class PartyId:
    role: str  # "client", "server" or "verifier"
    index: int = 0

    def __post_init__(self):
        if self.role not in ("client", "server", "verifier"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role == "client" and self.index < 1:
            raise ValueError("client indices start at 1")

    def __str__(self):
        return f"client:{self.index}" if self.role == "client" else self.role

    @classmethod
    def parse(cls, text: str) -> PartyId:
        role, _, idx = text.partition(":")
        return cls(role, int(idx) if idx else 0)


SERVER = PartyId("server")
VERIFIER = PartyId("verifier")


def client(u: int) -> PartyId:
    return PartyId("client", u)


@dataclass(frozen=True)
class Message:
    kind: str
    sender: PartyId
    receiver: PartyId
    seq: int
    payload: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "from": str(self.sender), "to": str(self.receiver),
                "seq": self.seq, "payload": self.payload}

    @classmethod
    def from_json(cls, doc) -> Message:
        return cls(doc["kind"], PartyId.parse(doc["from"]), PartyId.parse(doc["to"]), doc["seq"], doc["payload"])


DROP = object()

# hook(message) -> Message, DROP, or None for "deliver unchanged"
AdversaryHook = Callable[[Message], object]


class Channel:
    """FIFO queue between one sender and one receiver."""

    def __init__(self):
        self.queue: deque[Message] = deque()
        self.sent = 0

    def __len__(self):
        return len(self.queue)


class Network:
    def __init__(self, hook: AdversaryHook | None = None):
        self.channels: dict[tuple[PartyId, PartyId], Channel] = {}
        self.hook = hook
        self.log: list[dict] = []
        self.interceptions: list[dict] = []

    def channel(self, src: PartyId, dst: PartyId) -> Channel:
        return self.channels.setdefault((src, dst), Channel())

    def send(self, kind: str, src: PartyId, dst: PartyId, payload: dict):
        ch = self.channel(src, dst)
        msg = Message(kind, src, dst, ch.sent, payload)
        ch.sent += 1
        if self.hook is not None:
            out = self.hook(msg)
            if out is DROP:
                self.interceptions.append({"action": "drop", "message": msg.to_json()})
                return
            if out is not None and out != msg:
                self.interceptions.append({"action": "modify", "message": msg.to_json()})
                msg = out
        ch.queue.append(msg)
        self.log.append(msg.to_json())

    def broadcast(self, kind: str, src: PartyId, dsts, payload: dict):
        for dst in dsts:
            if dst != src:
                self.send(kind, src, dst, payload)

    def recv(self, src: PartyId, dst: PartyId, kind: str) -> Message | None:
        """Next message from ``src`` to ``dst``, or ``None`` if it is missing.

        A head message of another kind means the expected one never arrived;
        it stays queued for the next call.
        """
        ch = self.channels.get((src, dst))
        if not ch or not ch.queue or ch.queue[0].kind != kind:
            return None
        return ch.queue.popleft()

    def transcript_lines(self) -> str:
        return "".join(json.dumps(m, sort_keys=True) + "\n" for m in self.log)


def fork_rng(seed: int, label: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


# ----------------------------------------------------------------- config

@dataclass
class RunConfig:
    """Sizes are small by default so a run takes well under a second."""

    n: int = 3
    leaders: int = 1
    threshold: int = 1
    field_bits: int = 128
    rsa_bits: int = 256
    max_ss: int = 10
    delta: int = 10
    eval_delta: int = 5
    q: list[int] | None = None
    messages: list[int] | None = None
    threads: bool = False

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.leaders <= self.n:
            raise InvalidParameters(f"need 1 <= leaders <= n, got leaders={self.leaders}, n={self.n}")
        for name in ("q", "messages"):
            vals = getattr(self, name)
            if vals is not None:
                if len(vals) != self.n:
                    raise InvalidParameters(f"{name} must have n={self.n} entries")
                setattr(self, name, [int(v) for v in vals])

    @classmethod
    def from_dict(cls, doc: dict) -> RunConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(doc) - known
        if extra:
            raise InvalidParameters(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunReport:
    seed: int
    config: dict
    setup: dict | None = None
    coin: str | None = None
    leaders: list[int] = field(default_factory=list)
    puzzles: dict = field(default_factory=dict)
    eval: dict | None = None
    result: dict | None = None
    singles: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    transcript: list[dict] = field(default_factory=list)
    interceptions: list[dict] = field(default_factory=list)
    abort: dict | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


# -------------------------------------------------------------- protocol

def _phase(name):
    """Attach phase and party to any protocol error raised inside a step."""

    def wrap(fn):
        def inner(self, *args, **kwargs):
            try:
                return fn(self, *args, **kwargs)
            except ProtocolAbort as exc:
                if exc.phase is None:
                    exc.phase = name
                raise
            except TemporaError as exc:
                raise ProtocolAbort(str(exc), party=getattr(exc, "party", None), phase=name) from exc
        return inner
    return wrap


class _Run:
    def __init__(self, cfg: RunConfig, seed: int, hook=None):
        self.cfg, self.seed = cfg, seed
        self.net = Network(hook)
        self.ids = list(range(1, cfg.n + 1))
        self.report = RunReport(seed, cfg.to_dict())
        self.rng = {u: fork_rng(seed, f"client/{u}") for u in self.ids}
        self.server_rng = fork_rng(seed, "server")

    def _map(self, fn, items):
        if self.cfg.threads:
            with ThreadPoolExecutor(max_workers=len(items)) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    @_phase("setup")
    def setup(self):
        cfg = self.cfg
        self.sp = tf.s_setup(self.server_rng, cfg.field_bits, cfg.leaders, cfg.threshold)
        doc = codec.setup_to_json(self.sp)
        self.net.broadcast("SetupPublish", SERVER, [client(u) for u in self.ids] + [VERIFIER], doc)
        self.report.setup = doc

    @_phase("puzzle")
    def puzzles(self):
        cfg = self.cfg
        msgs = cfg.messages or [self.rng[u].randrange(1 << 64) for u in self.ids]
        self.q = cfg.q or [self.rng[u].randrange(1 << 64) for u in self.ids]
        self.messages = dict(zip(self.ids, msgs))

        def make(u):
            rng = self.rng[u]
            keys = keygen(rng, cfg.rsa_bits)
            pz = tf.gen_puzzle(self.messages[u], keys, self.sp, cfg.delta, cfg.max_ss, rng, min_bits=cfg.field_bits)
            return tf.ClientContext(u, keys, pz)

        self.clients = dict(zip(self.ids, self._map(make, self.ids)))
        for u in self.ids:
            pz = self.clients[u].puzzle
            doc = {"o": [str(x) for x in pz.vector.o], "pp": codec.pp_to_json(pz.pp)}
            self.net.send("PuzzlePublish", client(u), SERVER, doc)
            self.net.send("PuzzlePublish", client(u), VERIFIER, {"pp": doc["pp"]})
            self.report.puzzles[str(u)] = doc
        self.report.expected = {
            "messages": [str(self.messages[u]) for u in self.ids],
            "q": [str(c) for c in self.q],
            "res": str(sum(c * m for c, m in zip(self.q, msgs)) % self.sp.p),
        }

    @_phase("coin_toss")
    def coin(self):
        peers = [client(u) for u in self.ids]
        opened = {}
        for u in self.ids:
            share, nonce, com = tf.coin_commit(self.rng[u])
            opened[u] = (share, nonce, com)
            self.net.broadcast("CoinCommit", client(u), peers, {"com": com.hex()})
        for u in self.ids:
            share, nonce, _ = opened[u]
            self.net.broadcast("CoinReveal", client(u), peers, {"share": share.hex(), "nonce": str(nonce)})
        views = {}
        for u in self.ids:
            coms = {u: opened[u][2]}
            reveals = {u: opened[u][:2]}
            for l in self.ids:
                if l == u:
                    continue
                c = self.net.recv(client(l), client(u), "CoinCommit")
                r = self.net.recv(client(l), client(u), "CoinReveal")
                if c is None:
                    raise ProtocolAbort(f"client {u} got no coin commitment from {l}", party=str(client(l)))
                coms[l] = Commitment.from_hex(c.payload["com"])
                if r is not None:
                    reveals[l] = (bytes.fromhex(r.payload["share"]), int(r.payload["nonce"]))
            try:
                seed = tf.coin_combine(coms, reveals)
            except ProtocolAbort as exc:
                exc.party = str(client(exc.party)) if isinstance(exc.party, int) else exc.party
                raise
            views[u] = [self.ids[k - 1] for k in tf.select_leaders(len(self.ids), self.cfg.leaders, seed)]
            if u == self.ids[0]:
                self.report.coin = seed.hex()
        if len({tuple(v) for v in views.values()}) != 1:
            raise ProtocolAbort("clients disagree on the leader set")
        self.leaders = views[self.ids[0]]
        self.report.leaders = list(self.leaders)

    @_phase("leader")
    def leaders_round(self):
        cfg = self.cfg
        self.states = {}
        for u in self.leaders:
            st = tf.prepare_leader(u, self.clients[u].keys, self.sp, cfg.eval_delta, cfg.max_ss, self.ids, self.rng[u])
            self.states[u] = st
            for l in self.ids:
                if l == u:
                    continue
                self.net.send("FKey", client(u), client(l), {"key": st.f_keys[l].hex()})
                self.net.send("GammaVec", client(u), client(l), {"gamma": [str(x) for x in st.gamma_prime]})
            rec = codec.epp_to_json(tf.EvalPublicParams((st.record,)))[0]
            self.net.send("LeaderPublish", client(u), SERVER, rec)
            self.net.send("LeaderPublish", client(u), VERIFIER, rec)

    @_phase("grant")
    def grants(self):
        inbox = {}
        for u in self.ids:
            gammas, f_in = {}, {}
            for l in self.leaders:
                if l == u:
                    gammas[u] = self.states[u].gamma_prime
                    continue
                fk = self.net.recv(client(l), client(u), "FKey")
                gv = self.net.recv(client(l), client(u), "GammaVec")
                if fk is not None:
                    f_in[l] = PrfKey(bytes.fromhex(fk.payload["key"]))
                if gv is not None:
                    gammas[l] = tuple(int(x) for x in gv.payload["gamma"])
            inbox[u] = (gammas, f_in)

        def make(u):
            gammas, f_in = inbox[u]
            secret = self.clients[u].puzzle.secret
            q = self.q[u - 1]
            try:
                if u in self.states:
                    return tf.leader_grant(self.states[u], secret, self.sp, q, self.leaders, gammas, f_in, self.ids)
                return tf.nonleader_grant(u, secret, self.sp, q, self.leaders, gammas, f_in)
            except ProtocolAbort as exc:
                exc.party = str(client(u))
                raise

        self.grant = dict(zip(self.ids, self._map(make, self.ids)))

    @_phase("evaluate")
    def evaluate(self):
        puzzles = {}
        for u in self.ids:
            msg = self.net.recv(client(u), SERVER, "PuzzlePublish")
            if msg is None:
                raise ProtocolAbort(f"server has no puzzle from client {u}", party=str(client(u)))
            puzzles[u] = tf.PuzzleVector(tuple(int(x) for x in msg.payload["o"]))
        self.server_puzzles = puzzles
        fld = self.sp.field
        g = [0] * self.sp.t_bar
        for u in self.ids:
            ole_log = Transcript()
            part = tf.server_evaluate({u: puzzles[u]}, {u: self.grant[u]}, self.sp,
                                      fork_rng(self.seed, f"ole/{u}"), ole_log)
            g = [(a + b) % fld.p for a, b in zip(g, part.g)]
            for i, t in enumerate(ole_log.values("to_sender"), start=1):
                self.net.send("OleSession", SERVER, client(u), {"session": f"{u}:{i}", "t": str(t)})
        records = []
        for l in self.leaders:
            msg = self.net.recv(client(l), SERVER, "LeaderPublish")
            if msg is None:
                raise ProtocolAbort(f"server has no record from leader {l}", party=str(client(l)))
            records.append(msg.payload)
        self.g = tf.EvalPuzzle(tuple(g))
        self.epp = codec.epp_from_json(records)
        doc = {"g": [str(x) for x in g], "epp": records}
        self.net.send("EvalPuzzlePublish", SERVER, VERIFIER, doc)
        self.report.eval = doc

    def solve(self):
        # failures here are the server's problem to report, not a protocol abort
        try:
            res, proof = tf.solve_combination(self.g, self.epp, self.sp, self.server_rng)
            doc = {"value": str(res), "proof": codec.proof_to_json(proof), "error": None}
        except TemporaError as exc:
            doc = {"value": None, "proof": None, "error": f"{type(exc).__name__}: {exc}"}
        self.net.send("ProofPublish", SERVER, VERIFIER, {"kind": tf.EVAL_PUZZLE, **doc})
        self.report.result = doc
        for u in self.ids:
            pp = self.clients[u].puzzle.pp
            try:
                m, proof = tf.solve_single(self.server_puzzles[u], pp, self.sp)
                doc = {"value": str(m), "proof": codec.proof_to_json(proof), "error": None}
            except TemporaError as exc:
                doc = {"value": None, "proof": None, "error": f"{type(exc).__name__}: {exc}"}
            self.net.send("ProofPublish", SERVER, VERIFIER, {"kind": tf.CLIENT_PUZZLE, "client": u, **doc})
            self.report.singles[str(u)] = doc

    def run(self) -> RunReport:
        try:
            self.setup()
            self.puzzles()
            self.coin()
            self.leaders_round()
            self.grants()
            self.evaluate()
            self.solve()
        finally:
            self.report.transcript = list(self.net.log)
            self.report.interceptions = list(self.net.interceptions)
        self.report.verify = replay_verification(self.report.transcript)
        return self.report


def replay_verification(transcript: list[dict]) -> dict:
    """Verify bits computed only from messages addressed to the verifier."""
    msgs = [m for m in transcript if m["to"] == str(VERIFIER)]
    setup = next(m["payload"] for m in msgs if m["kind"] == "SetupPublish")
    sp = codec.setup_from_json(setup)
    pps = {PartyId.parse(m["from"]).index: codec.pp_from_json(m["payload"]["pp"])
           for m in msgs if m["kind"] == "PuzzlePublish"}
    out = {"evalPzl": 0, "clientPzl": {str(u): 0 for u in sorted(pps)}}
    evals = [m["payload"] for m in msgs if m["kind"] == "EvalPuzzlePublish"]
    for m in msgs:
        if m["kind"] != "ProofPublish" or m["payload"]["value"] is None:
            continue
        doc = m["payload"]
        value, proof = int(doc["value"]), codec.proof_from_json(doc["proof"])
        try:
            if doc["kind"] == tf.CLIENT_PUZZLE:
                u = doc["client"]
                ok = u in pps and tf.verify(value, proof, pps[u], sp, tf.CLIENT_PUZZLE)
                out["clientPzl"][str(u)] = int(ok)
            elif evals:
                g = tf.EvalPuzzle(tuple(int(x) for x in evals[0]["g"]))
                epp = codec.epp_from_json(evals[0]["epp"])
                out["evalPzl"] = int(tf.verify(value, proof, (g, epp), sp, tf.EVAL_PUZZLE))
        except (TemporaError, ValueError, KeyError):
            continue
    return out


def run_protocol(config: RunConfig | dict, seed: int, hook: AdversaryHook | None = None) -> RunReport:
    """Run every phase; any protocol error propagates with party and phase set."""
    cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
    return _Run(cfg, seed, hook).run()


def run_with_adversary(config: RunConfig | dict, seed: int, hook: AdversaryHook) -> RunReport:
    """Like :func:`run_protocol`, but an abort is recorded in the report instead of raised."""
    cfg = config if isinstance(config, RunConfig) else RunConfig.from_dict(config)
    run = _Run(cfg, seed, hook)
    try:
        return run.run()
    except ProtocolAbort as exc:
        run.report.abort = {"party": exc.party, "phase": exc.phase, "error": str(exc)}
        return run.report


# ------------------------------------------------------------ stock hooks

def replace_payload(msg: Message, **changes) -> Message:
    return dataclasses.replace(msg, payload={**msg.payload, **changes})


def flip_coordinate(kind: str, key: str, index: int, sender: PartyId | None = None) -> AdversaryHook:
    """Add one to ``payload[key][index]`` in the first matching message."""
    done = []

    def hook(msg):
        if done or msg.kind != kind or key not in msg.payload or (sender and msg.sender != sender):
            return None
        vals = list(msg.payload[key])
        vals[index] = str(int(vals[index]) + 1)
        done.append(msg.seq)
        return replace_payload(msg, **{key: vals})
    return hook


def drop_messages(kind: str, sender: PartyId | None = None, receiver: PartyId | None = None) -> AdversaryHook:
    def hook(msg):
        if msg.kind == kind and (sender is None or msg.sender == sender) \
                and (receiver is None or msg.receiver == receiver):
            return DROP
        return None
    return hook
