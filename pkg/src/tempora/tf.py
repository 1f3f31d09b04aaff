"""Multi-client time-lock puzzles with a verifiable linear combination.

Life cycle, one function per step:

* the server picks a field and an x-grid (:func:`s_setup`);
* each client locks ``m`` as blinded evaluations of ``x + m`` (:func:`gen_puzzle`);
* clients agree on leaders (:func:`coin_toss`, :func:`select_leaders`), each
  leader hides a random root behind a short time lock (:func:`prepare_leader`),
  every client re-encodes its puzzle through OLE+ sessions with the server
  (:func:`leader_grant`, :func:`nonleader_grant`, :func:`server_evaluate`);
* the server opens the short locks, interpolates
  ``theta(x) = prod(x - root_u) * sum q_u (x + m_u)`` and reads the result
  off the constant term (:func:`solve_combination`), or opens one puzzle the
  slow way (:func:`solve_single`);
* anyone checks either answer from public data (:func:`verify`).

Protocol records hold plain ints reduced mod p; :class:`FieldElement` is used
for arithmetic inside the functions.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Mapping

from .crypto import Commitment, PrfKey, commit, encode, hash_g, prf, prf_derive_pair, verify_commit
from .errors import (
    InvalidParameters,
    OpeningMismatch,
    ProtocolAbort,
    SolutionExtractionFailure,
    TamperSuspected,
)
from .field import FieldParams, random_prime
from .ole import OleReceiverInput, OleSenderInput, Transcript, ole_plus
from .poly import PointValuePoly, find_roots, interpolate
from .timelock import ClientKeys, sample_base, sequential_power, trapdoor_power

log = logging.getLogger(__name__)

UNIVERSE_BITS = 64
MIN_FIELD_BITS = 128
COIN_BYTES = 32

CLIENT_PUZZLE = "clientPzl"
EVAL_PUZZLE = "evalPzl"


# ------------------------------------------------------------------- setup

@dataclass(frozen=True)
class ServerParams:
    """Field, x-grid of ``leader_count + 2`` points, and the plaintext universe.

    ``threshold`` is carried along for completeness; honest execution never
    reads it.
    """

    field: FieldParams
    xs: tuple[int, ...]
    leader_count: int
    threshold: int
    universe_bits: int = UNIVERSE_BITS

    @property
    def t_bar(self) -> int:
        return self.leader_count + 2

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def universe(self) -> int:
        return 1 << self.universe_bits


def s_setup(rng: random.Random, lambda_bits: int = MIN_FIELD_BITS, leader_count: int = 1,
            threshold: int = 1, universe_bits: int = UNIVERSE_BITS) -> ServerParams:
    if leader_count < 1 or not 1 <= threshold <= leader_count:
        raise InvalidParameters(f"need 1 <= t <= leaders, got t={threshold}, leaders={leader_count}")
    if lambda_bits <= universe_bits + 1:
        raise InvalidParameters("field must be larger than the plaintext universe")
    p = random_prime(lambda_bits, rng)
    while p.bit_length() < lambda_bits:
        p = random_prime(lambda_bits, rng)
    xs: list[int] = []
    while len(xs) < leader_count + 2:
        x = rng.randrange(1 << universe_bits, p)
        if x not in xs:
            xs.append(x)
    return ServerParams(FieldParams(p), tuple(xs), leader_count, threshold, universe_bits)


def check_server_params(sp: ServerParams, min_bits: int = MIN_FIELD_BITS) -> bool:
    """What a client checks before locking anything under ``sp``."""
    if sp.p.bit_length() < min_bits:
        return False
    if len(sp.xs) != sp.t_bar or len(set(sp.xs)) != len(sp.xs):
        return False
    return all(sp.universe <= x < sp.p for x in sp.xs)


def _check_in_universe(value: int, sp: ServerParams, what: str):
    if not 0 <= int(value) < sp.universe:
        raise InvalidParameters(f"{what} must lie in [0, 2^{sp.universe_bits})")


# ------------------------------------------------------------------ puzzles

@dataclass(frozen=True)
class PuzzleVector:
    o: tuple[int, ...]

    def __len__(self):
        return len(self.o)


@dataclass(frozen=True)
class PuzzlePublicParams:
    com: Commitment
    T: int
    r: int
    N: int

    def __post_init__(self):
        if not 0 < self.r < self.N:
            raise InvalidParameters("puzzle base must lie in (0, N)")


@dataclass(frozen=True)
class PuzzleSecret:
    """What a client keeps after locking: the two blinding keys."""

    k: PrfKey
    s: PrfKey


@dataclass(frozen=True)
class Puzzle:
    vector: PuzzleVector
    pp: PuzzlePublicParams
    secret: PuzzleSecret
    mk: int


def blinding(key: PrfKey, sp: ServerParams, count: int | None = None) -> list[int]:
    count = sp.t_bar if count is None else count
    return [prf(i, key, sp.field).value for i in range(1, count + 1)]


def encrypt_coordinates(m: int, xs: Iterable[int], z: list[int], w: list[int], p: int) -> list[int]:
    """``o_i = w_i * (x_i + m + z_i) mod p``."""
    return [wi * (x + m + zi) % p for x, zi, wi in zip(xs, z, w)]


def gen_puzzle(m: int, keys: ClientKeys, sp: ServerParams, delta: int, max_ss: int,
               rng: random.Random, min_bits: int = MIN_FIELD_BITS) -> Puzzle:
    """Lock ``m`` for ``delta * max_ss`` squarings.

    A fresh base is drawn whenever a blinding factor or an encrypted
    coordinate comes out zero, so every ``o_i`` is a valid OLE+ input.
    """
    if not check_server_params(sp, min_bits):
        raise InvalidParameters("server parameters rejected")
    m = int(m)
    _check_in_universe(m, sp, "message")
    T = delta * max_ss
    p = sp.p
    while True:
        r = sample_base(keys.N, rng)
        mk = trapdoor_power(r, T, keys)
        k, s = prf_derive_pair(mk, sp.field)
        z, w = blinding(k, sp), blinding(s, sp)
        o = encrypt_coordinates(m, sp.xs, z, w, p)
        if all(w) and all(o):
            break
        log.debug("zero blinding or coordinate; drawing a new base")
    pp = PuzzlePublicParams(commit(m, mk), T, r, keys.N)
    return Puzzle(PuzzleVector(tuple(o)), pp, PuzzleSecret(k, s), mk)


# ------------------------------------------------------------------ leaders

def coin_commit(rng: random.Random, nbytes: int = COIN_BYTES) -> tuple[bytes, int, Commitment]:
    share = rng.getrandbits(8 * nbytes).to_bytes(nbytes, "big")
    nonce = rng.getrandbits(256)
    return share, nonce, commit(int.from_bytes(share, "big"), nonce)


def coin_combine(commitments: Mapping[int, Commitment], reveals: Mapping[int, tuple[bytes, int]]) -> bytes:
    """XOR of all revealed shares, after checking each against its commitment."""
    out = None
    for party in sorted(commitments):
        if party not in reveals:
            raise OpeningMismatch(f"party {party} did not reveal", party=party, phase="coin_toss")
        share, nonce = reveals[party]
        if not verify_commit(commitments[party], int.from_bytes(share, "big"), nonce):
            raise OpeningMismatch(f"party {party} revealed a share that does not open its commitment",
                                  party=party, phase="coin_toss")
        out = share if out is None else bytes(a ^ b for a, b in zip(out, share))
    if out is None:
        raise InvalidParameters("coin toss needs at least one party")
    return out


def coin_toss(parties: Mapping[int, random.Random]) -> bytes:
    """Commit-then-reveal between in-process parties, each with its own RNG."""
    opened = {u: coin_commit(rng) for u, rng in parties.items()}
    coms = {u: c for u, (_, _, c) in opened.items()}
    reveals = {u: (s, n) for u, (s, n, _) in opened.items()}
    return coin_combine(coms, reveals)


def select_leaders(n: int, count: int, seed: bytes) -> list[int]:
    """``count`` distinct client indices in ``1..n`` from ``G(j || seed)``.

    A repeated index is retried with a counter appended to the hash input.
    """
    if not 1 <= count <= n:
        raise InvalidParameters(f"cannot pick {count} leaders from {n} clients")
    out: list[int] = []
    for j in range(1, count + 1):
        ctr = 0
        while True:
            data = encode(j, seed) if ctr == 0 else encode(j, seed, ctr)
            idx = int.from_bytes(hash_g(data), "big") % n + 1
            if idx not in out:
                out.append(idx)
                break
            ctr += 1
    return out


# --------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class LeaderRecord:
    """Published by one leader: base ``h``, root commitment, modulus, ``Y``."""

    leader: int
    h: int
    com: Commitment
    N: int
    Y: int


@dataclass(frozen=True)
class EvalPublicParams:
    records: tuple[LeaderRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise InvalidParameters("no leader records")
        if len({rec.Y for rec in self.records}) != 1:
            raise InvalidParameters("all leaders must use the same Y")

    @property
    def Y(self) -> int:
        return self.records[0].Y


@dataclass(frozen=True)
class EvalPuzzle:
    g: tuple[int, ...]

    def __len__(self):
        return len(self.g)


@dataclass
class LeaderState:
    """A leader's private state between the two grant rounds."""

    index: int
    tk: int
    k2: PrfKey
    s2: PrfKey
    root: int
    gamma_prime: tuple[int, ...]
    f_keys: dict[int, PrfKey]
    record: LeaderRecord


def prepare_leader(u: int, keys: ClientKeys, sp: ServerParams, delta: int, max_ss: int,
                   clients: Iterable[int], rng: random.Random) -> LeaderState:
    """First leader round: short time lock, hidden root, and pairwise keys."""
    Y = delta * max_ss
    p = sp.p
    while True:
        h = sample_base(keys.N, rng)
        tk = trapdoor_power(h, Y, keys)
        k2, s2 = prf_derive_pair(tk, sp.field)
        w2 = blinding(s2, sp)
        if all(w2):
            break
    # root 0 would make the result unrecoverable, root = x_i would zero a coordinate
    while True:
        root = rng.randrange(1, p)
        if root not in sp.xs:
            break
    gamma_prime = tuple((x - root) * wi % p for x, wi in zip(sp.xs, w2))
    f_keys = {l: PrfKey(rng.getrandbits(256).to_bytes(32, "big")) for l in clients if l != u}
    record = LeaderRecord(u, h, commit(root, tk), keys.N, Y)
    return LeaderState(u, tk, k2, s2, root, gamma_prime, f_keys, record)


@dataclass
class ClientGrant:
    """One client's OLE+ sender inputs, plus the masks kept for white-box checks."""

    index: int
    inputs: list[OleSenderInput]
    v: list[int]
    y: list[int]
    q: int


def _grant(u, secret: PuzzleSecret, sp: ServerParams, q: int, leaders: list[int],
           gammas: Mapping[int, tuple], f_in: Mapping[int, PrfKey], state: LeaderState | None,
           clients: Iterable[int]) -> ClientGrant:
    _check_in_universe(q, sp, "coefficient")
    fld, p = sp.field, sp.p
    for l in leaders:
        if l not in gammas:
            raise ProtocolAbort(f"client {u} has no gamma vector from leader {l}", party=u, phase="grant")
        if l != u and l not in f_in:
            raise ProtocolAbort(f"client {u} has no key from leader {l}", party=u, phase="grant")
        if len(gammas[l]) != sp.t_bar:
            raise ProtocolAbort(f"gamma vector from leader {l} has the wrong length", party=u, phase="grant")
    z, w = blinding(secret.k, sp), blinding(secret.s, sp)
    z2 = blinding(state.k2, sp) if state is not None else [0] * sp.t_bar
    inputs, vs, ys = [], [], []
    for i in range(1, sp.t_bar + 1):
        v = 1
        for l in leaders:
            v = v * gammas[l][i - 1] % p
        y = sum(prf(i, f_in[l], fld).value for l in leaders if l != u)
        if state is not None:
            y -= sum(prf(i, state.f_keys[l], fld).value for l in clients if l != u)
        y %= p
        wi, zi = w[i - 1], z[i - 1]
        e = q * v * pow(wi, -1, p) % p
        e2 = (-q * v * zi + z2[i - 1] + y) % p
        inputs.append(OleSenderInput(fld(e), fld(e2)))
        vs.append(v)
        ys.append(y)
    return ClientGrant(u, inputs, vs, ys, q)


def leader_grant(state: LeaderState, secret: PuzzleSecret, sp: ServerParams, q: int,
                 leaders: list[int], gammas: Mapping[int, tuple], f_in: Mapping[int, PrfKey],
                 clients: Iterable[int]) -> ClientGrant:
    """Second leader round.  ``gammas`` holds every leader's vector, own included."""
    clients = list(clients)
    for l in clients:
        if l != state.index and l not in state.f_keys:
            raise ProtocolAbort(f"leader {state.index} has no key for client {l}",
                                party=state.index, phase="grant")
    return _grant(state.index, secret, sp, q, leaders, gammas, f_in, state, clients)


def nonleader_grant(u: int, secret: PuzzleSecret, sp: ServerParams, q: int, leaders: list[int],
                    gammas: Mapping[int, tuple], f_in: Mapping[int, PrfKey]) -> ClientGrant:
    if u in leaders:
        raise InvalidParameters(f"client {u} is a leader")
    return _grant(u, secret, sp, q, leaders, gammas, f_in, None, ())


def server_evaluate(puzzles: Mapping[int, PuzzleVector], grants: Mapping[int, ClientGrant],
                    sp: ServerParams, rng: random.Random, transcript: Transcript | None = None,
                    hook=None) -> EvalPuzzle:
    """Run ``t_bar`` OLE+ sessions per client and sum the outputs per coordinate."""
    fld = sp.field
    g = [fld.zero() for _ in range(sp.t_bar)]
    for u in sorted(puzzles):
        if u not in grants:
            raise ProtocolAbort(f"no OLE+ sessions from client {u}", party=u, phase="evaluate")
        vec, inputs = puzzles[u], grants[u].inputs
        if len(vec) != sp.t_bar or len(inputs) != sp.t_bar:
            raise ProtocolAbort(f"client {u} sent {len(inputs)} sessions for {len(vec)} coordinates",
                                party=u, phase="evaluate")
        for i in range(sp.t_bar):
            d = ole_plus(inputs[i], OleReceiverInput(fld(vec.o[i])), rng, transcript, f"{u}:{i + 1}", hook)
            g[i] = g[i] + d
    return EvalPuzzle(tuple(x.value for x in g))


@dataclass(frozen=True)
class ClientContext:
    """Everything one client holds when the evaluation starts."""

    index: int
    keys: ClientKeys
    puzzle: Puzzle


@dataclass
class Evaluation:
    g: EvalPuzzle
    epp: EvalPublicParams
    leaders: list[int]
    grants: dict[int, ClientGrant]
    states: dict[int, LeaderState] = dc_field(default_factory=dict)


def evaluate(clients: Mapping[int, ClientContext], sp: ServerParams, q: Mapping[int, int],
             delta: int, max_ss: int, rng: random.Random, leaders: list[int] | None = None,
             transcript: Transcript | None = None) -> Evaluation:
    """Whole linear-combination phase in one process (no channels)."""
    ids = sorted(clients)
    if leaders is None:
        seed = coin_toss({u: random.Random(rng.getrandbits(64)) for u in ids})
        leaders = [ids[k - 1] for k in select_leaders(len(ids), sp.leader_count, seed)]
    states = {u: prepare_leader(u, clients[u].keys, sp, delta, max_ss, ids, rng) for u in leaders}
    gammas = {u: st.gamma_prime for u, st in states.items()}
    grants = {}
    for u in ids:
        f_in = {l: states[l].f_keys[u] for l in leaders if l != u}
        secret = clients[u].puzzle.secret
        if u in states:
            grants[u] = leader_grant(states[u], secret, sp, q[u], leaders, gammas, f_in, ids)
        else:
            grants[u] = nonleader_grant(u, secret, sp, q[u], leaders, gammas, f_in)
    g = server_evaluate({u: clients[u].puzzle.vector for u in ids}, grants, sp, rng, transcript)
    epp = EvalPublicParams(tuple(states[u].record for u in leaders))
    return Evaluation(g, epp, list(leaders), grants, states)


# ------------------------------------------------------------------ solving

@dataclass(frozen=True)
class SinglePuzzleProof:
    mk: int


@dataclass(frozen=True)
class Opening:
    leader: int
    root: int
    tk: int


@dataclass(frozen=True)
class CombinationProof:
    openings: tuple[Opening, ...]


def unblind_combination(g: EvalPuzzle, tks: list[int], sp: ServerParams) -> PointValuePoly | None:
    """``theta_i = (prod w'_i)^-1 (g_i - sum z'_i)``; ``None`` if a product is zero."""
    p = sp.p
    pairs = [prf_derive_pair(tk, sp.field) for tk in tks]
    zs = [blinding(k2, sp) for k2, _ in pairs]
    ws = [blinding(s2, sp) for _, s2 in pairs]
    theta = []
    for i in range(sp.t_bar):
        wprod = 1
        for w in ws:
            wprod = wprod * w[i] % p
        if wprod == 0:
            return None
        theta.append((g.g[i] - sum(z[i] for z in zs)) * pow(wprod, -1, p) % p)
    return PointValuePoly(sp.xs, tuple(theta), sp.field)


def _result_from(theta_poly, roots: list[int], p: int) -> int | None:
    denom = 1
    for r in roots:
        denom = denom * (-r) % p
    if denom == 0:
        return None
    return theta_poly.constant_term.value * pow(denom, -1, p) % p


def solve_combination(g: EvalPuzzle, epp: EvalPublicParams, sp: ServerParams,
                      rng: random.Random | None = None,
                      progress: Callable[[int], object] | None = None) -> tuple[int, CombinationProof]:
    """Open every leader's short lock by squaring, then read the result off theta."""
    if len(g) != sp.t_bar:
        raise SolutionExtractionFailure(f"expected {sp.t_bar} coordinates, got {len(g)}")
    tks = [sequential_power(rec.h, rec.Y, rec.N, progress) for rec in epp.records]
    points = unblind_combination(g, tks, sp)
    if points is None:
        raise SolutionExtractionFailure("a leader blinding product is zero")
    theta = interpolate(points)
    if theta.is_zero():
        raise SolutionExtractionFailure("theta is the zero polynomial; roots cannot be identified")
    candidates = sorted(r.value for r in find_roots(theta, rng))
    openings = []
    for rec, tk in zip(epp.records, tks):
        match = [r for r in candidates if verify_commit(rec.com, r, tk)]
        if not match:
            raise SolutionExtractionFailure(f"no root of theta opens leader {rec.leader}'s commitment")
        openings.append(Opening(rec.leader, match[0], tk))
    res = _result_from(theta, [o.root for o in openings], sp.p)
    if res is None:
        raise SolutionExtractionFailure("a matched root is zero")
    return res, CombinationProof(tuple(openings))


def unblind_single(o: PuzzleVector, mk: int, sp: ServerParams) -> PointValuePoly:
    p = sp.p
    k, s = prf_derive_pair(mk, sp.field)
    z, w = blinding(k, sp, len(o)), blinding(s, sp, len(o))
    if not all(w):
        raise TamperSuspected("zero blinding factor")
    ys = tuple((pow(wi, -1, p) * oi - zi) % p for oi, wi, zi in zip(o.o, w, z))
    return PointValuePoly(sp.xs[:len(o)], ys, sp.field)


def solve_single(o: PuzzleVector, pp: PuzzlePublicParams, sp: ServerParams, strict: bool = True,
                 progress: Callable[[int], object] | None = None) -> tuple[int, SinglePuzzleProof]:
    """Square ``r`` ``T`` times, unblind, and return the constant term.

    An honest puzzle unblinds to ``x + m``.  Anything else raises
    :class:`TamperSuspected` unless ``strict`` is off, in which case the
    constant term is returned anyway and the commitment check decides.
    """
    mk = sequential_power(pp.r, pp.T, pp.N, progress)
    poly = interpolate(unblind_single(o, mk, sp))
    if strict and (poly.degree != 1 or poly.coeffs[1] != 1):
        raise TamperSuspected(f"unblinded polynomial is {poly}, not x + m")
    return poly.constant_term.value, SinglePuzzleProof(mk)


# ------------------------------------------------------------- verification

def verify_single(m: int, proof: SinglePuzzleProof, pp: PuzzlePublicParams) -> bool:
    return verify_commit(pp.com, m, proof.mk)


def puzzle_consistent(m: int, proof: SinglePuzzleProof, o: PuzzleVector, sp: ServerParams) -> bool:
    """Whether ``o`` unblinds under ``proof.mk`` to exactly ``x + m``."""
    try:
        poly = interpolate(unblind_single(o, proof.mk, sp))
    except (TamperSuspected, ValueError):
        return False
    return poly.degree == 1 and poly.coeffs[1] == 1 and poly.constant_term.value == int(m) % sp.p


def verify_combination(res: int, proof: CombinationProof, g: EvalPuzzle, epp: EvalPublicParams,
                       sp: ServerParams) -> bool:
    if len(proof.openings) != len(epp.records) or len(g) != sp.t_bar:
        return False
    for op, rec in zip(proof.openings, epp.records):
        if op.leader != rec.leader or not verify_commit(rec.com, op.root, op.tk):
            return False
    points = unblind_combination(g, [op.tk for op in proof.openings], sp)
    if points is None:
        return False
    theta = interpolate(points)
    if any(theta(op.root).value != 0 for op in proof.openings):
        return False
    expected = _result_from(theta, [op.root for op in proof.openings], sp.p)
    return expected is not None and expected == int(res) % sp.p


def verify(m, zeta, context, sp: ServerParams, cmd: str) -> bool:
    """``cmd`` is ``"clientPzl"`` (context: PuzzlePublicParams) or
    ``"evalPzl"`` (context: ``(EvalPuzzle, EvalPublicParams)``)."""
    if cmd == CLIENT_PUZZLE:
        return isinstance(zeta, SinglePuzzleProof) and verify_single(m, zeta, context)
    if cmd == EVAL_PUZZLE:
        g, epp = context
        return isinstance(zeta, CombinationProof) and verify_combination(m, zeta, g, epp, sp)
    raise ValueError(f"unknown command {cmd!r}")
