"""One client, a chain of ``z`` puzzles, and a linear combination over the chain.

Puzzle ``j`` squares a base derived from puzzle ``j-1``'s master key, so the
solver has to open them in order.  The combination works like the multi-client
protocol with a single leader: the client is the only one who hides a root,
and three x-coordinates are enough because ``theta`` has degree two.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .crypto import Commitment, PrfKey, commit, prf, prf_derive_pair, verify_commit
from .errors import InvalidParameters, ProtocolAbort, SolutionExtractionFailure, TamperSuspected
from .field import FieldParams, random_prime
from .ole import OleReceiverInput, OleSenderInput, Transcript, ole_plus
from .poly import PointValuePoly, find_roots, interpolate
from .timelock import ClientKeys, sample_base, sequential_power, trapdoor_power
from .tf import CLIENT_PUZZLE, EVAL_PUZZLE, MIN_FIELD_BITS, UNIVERSE_BITS

POINTS = 3


@dataclass(frozen=True)
class ChainParams:
    """``deltas[j]`` is the gap between puzzle ``j`` and ``j+1`` opening, in seconds."""

    field: FieldParams
    xs: tuple[int, ...]
    deltas: tuple[int, ...]
    max_ss: int
    universe_bits: int = UNIVERSE_BITS

    def __post_init__(self):
        if not self.deltas:
            raise InvalidParameters("need at least one puzzle")
        if any(d <= 0 for d in self.deltas) or self.max_ss < 1:
            raise InvalidParameters("time gaps and max_ss must be positive")
        if len(self.xs) != POINTS or len(set(self.xs)) != POINTS:
            raise InvalidParameters("need exactly three distinct x-coordinates")
        if any(not (1 << self.universe_bits) <= x < self.field.p for x in self.xs):
            raise InvalidParameters("x-coordinates must lie in [2^64, p)")

    @property
    def z(self) -> int:
        return len(self.deltas)

    @property
    def Ts(self) -> tuple[int, ...]:
        return tuple(self.max_ss * d for d in self.deltas)

    @property
    def p(self) -> int:
        return self.field.p


def mi_setup(rng: random.Random, deltas: Sequence[int], max_ss: int,
             lambda_bits: int = MIN_FIELD_BITS, universe_bits: int = UNIVERSE_BITS) -> ChainParams:
    if lambda_bits <= universe_bits + 1:
        raise InvalidParameters("field must be larger than the plaintext universe")
    p = random_prime(lambda_bits, rng)
    xs: list[int] = []
    while len(xs) < POINTS:
        x = rng.randrange(1 << universe_bits, p)
        if x not in xs:
            xs.append(x)
    return ChainParams(FieldParams(p), tuple(xs), tuple(deltas), max_ss, universe_bits)


def chain_base(j: int, prev_mk: int, cp: ChainParams, N: int) -> int:
    """Base of puzzle ``j`` (1-based, ``j >= 2``): ``PRF(j || 0, mk_{j-1})``."""
    return prf((j, 0), prev_mk, cp.field).value % N


def _blind(mk: int, cp: ChainParams) -> tuple[list[int], list[int]]:
    k, s = prf_derive_pair(mk, cp.field)
    return ([prf(i, k, cp.field).value for i in range(1, POINTS + 1)],
            [prf(i, s, cp.field).value for i in range(1, POINTS + 1)])


@dataclass(frozen=True)
class ChainPublicParams:
    coms: tuple[Commitment, ...]
    r1: int
    N: int
    Ts: tuple[int, ...]


@dataclass(frozen=True)
class ChainPuzzles:
    o: tuple[tuple[int, ...], ...]  # z rows of three coordinates
    pp: ChainPublicParams
    mks: tuple[int, ...]
    bases: tuple[int, ...]


def mi_gen_puzzles(ms: Sequence[int], keys: ClientKeys, cp: ChainParams, rng: random.Random) -> ChainPuzzles:
    """Lock ``ms[j]`` so it opens ``sum(Ts[:j+1])`` squarings from now.

    The whole chain restarts from a fresh ``r_1`` if any derived base, blinding
    factor or coordinate is zero.
    """
    if len(ms) != cp.z:
        raise InvalidParameters(f"expected {cp.z} messages, got {len(ms)}")
    for m in ms:
        if not 0 <= int(m) < 1 << cp.universe_bits:
            raise InvalidParameters("message outside [0, 2^64)")
    p, N = cp.p, keys.N
    while True:
        r1 = sample_base(N, rng)
        rows, mks, bases, ok = [], [], [], True
        r = r1
        for j, (m, T) in enumerate(zip(ms, cp.Ts), start=1):
            if j > 1:
                r = chain_base(j, mks[-1], cp, N)
                if r == 0:
                    ok = False
                    break
            mk = trapdoor_power(r, T, keys)
            z, w = _blind(mk, cp)
            row = tuple(wi * (x + int(m) + zi) % p for x, zi, wi in zip(cp.xs, z, w))
            if not (all(w) and all(row)):
                ok = False
                break
            mks.append(mk)
            bases.append(r)
            rows.append(row)
        if ok:
            break
    coms = tuple(commit(int(m), mk) for m, mk in zip(ms, mks))
    return ChainPuzzles(tuple(rows), ChainPublicParams(coms, r1, N, cp.Ts), tuple(mks), tuple(bases))


def _unblind_row(row, mk: int, cp: ChainParams, j: int) -> int:
    p = cp.p
    z, w = _blind(mk, cp)
    if not all(w):
        raise TamperSuspected("zero blinding factor", index=j)
    ys = tuple((pow(wi, -1, p) * oi - zi) % p for oi, wi, zi in zip(row, w, z))
    poly = interpolate(PointValuePoly(cp.xs, ys, cp.field))
    if poly.degree != 1 or poly.coeffs[1] != 1:
        raise TamperSuspected(f"puzzle {j} does not unblind to x + m", index=j)
    return poly.constant_term.value


def mi_solve_chain(o, pp: ChainPublicParams, cp: ChainParams,
                   progress: Callable[[int], object] | None = None,
                   strict: bool = True) -> list[tuple[int, int]]:
    """Open the puzzles in order; returns ``[(m_j, mk_j), ...]``.

    ``progress`` receives the running total of squarings across the chain.
    With ``strict`` off a puzzle that fails the shape check is reported as
    ``(None, mk_j)`` and the chain carries on, since later bases only depend
    on ``mk_j``.
    """
    out = []
    done = 0
    r = pp.r1
    for j, (row, T) in enumerate(zip(o, pp.Ts), start=1):
        if j > 1:
            r = chain_base(j, out[-1][1], cp, pp.N)
        base_done = done
        sub = None if progress is None else (lambda k, b=base_done: progress(b + k))
        mk = sequential_power(r, T, pp.N, sub)
        done += T
        try:
            m = _unblind_row(row, mk, cp, j)
        except TamperSuspected:
            if strict:
                raise
            m = None
        out.append((m, mk))
    return out


@dataclass(frozen=True)
class ChainEvalParams:
    h: int
    com: Commitment
    N: int
    Y: int


@dataclass
class ChainGrant:
    """The client's OLE+ sender inputs, with masks kept for white-box checks."""

    inputs: list[list[OleSenderInput]]  # z rows of three
    y: list[list[int]]
    root: int
    tk: int


def mi_grant(puzzles: ChainPuzzles, keys: ClientKeys, cp: ChainParams, q: Sequence[int],
             delta: int, rng: random.Random) -> tuple[ChainGrant, ChainEvalParams]:
    if len(q) != cp.z:
        raise InvalidParameters(f"expected {cp.z} coefficients, got {len(q)}")
    if any(not 0 <= int(c) < 1 << cp.universe_bits for c in q):
        raise InvalidParameters("coefficient outside [0, 2^64)")
    Y = delta * cp.max_ss
    if Y >= cp.Ts[0]:
        raise InvalidParameters("the combination must open before the first puzzle")
    p, fld = cp.p, cp.field
    while True:
        h = sample_base(keys.N, rng)
        tk = trapdoor_power(h, Y, keys)
        z2, w2 = _blind(tk, cp)
        if all(w2):
            break
    while True:
        root = rng.randrange(1, p)
        if root not in cp.xs:
            break
    gamma = [(x - root) % p for x in cp.xs]
    f_keys = [PrfKey(rng.getrandbits(256).to_bytes(32, "big")) for _ in range(cp.z - 1)]
    inputs, ys = [], []
    for j in range(cp.z):
        zj, wj = _blind(puzzles.mks[j], cp)
        row_in, row_y = [], []
        for i in range(POINTS):
            if j == 0:
                y = -sum(prf(i + 1, f, fld).value for f in f_keys) % p
            else:
                y = prf(i + 1, f_keys[j - 1], fld).value
            scale = gamma[i] * int(q[j]) * w2[i] % p
            e = scale * pow(wj[i], -1, p) % p
            # z' is added once per coordinate, otherwise it would be summed z times
            e2 = (-scale * zj[i] + (z2[i] if j == 0 else 0) + y) % p
            row_in.append(OleSenderInput(fld(e), fld(e2)))
            row_y.append(y)
        inputs.append(row_in)
        ys.append(row_y)
    return ChainGrant(inputs, ys, root, tk), ChainEvalParams(h, commit(root, tk), keys.N, Y)


def mi_server_evaluate(o, grant: ChainGrant, cp: ChainParams, rng: random.Random,
                       transcript: Transcript | None = None, hook=None) -> tuple[int, ...]:
    fld = cp.field
    if len(grant.inputs) != len(o):
        raise ProtocolAbort(f"{len(grant.inputs)} session rows for {len(o)} puzzles", phase="evaluate")
    g = [fld.zero() for _ in range(POINTS)]
    for j, (row, row_in) in enumerate(zip(o, grant.inputs), start=1):
        for i in range(POINTS):
            g[i] = g[i] + ole_plus(row_in[i], OleReceiverInput(fld(row[i])), rng, transcript, f"{j}:{i + 1}", hook)
    return tuple(x.value for x in g)


def mi_evaluate(puzzles: ChainPuzzles, keys: ClientKeys, cp: ChainParams, q: Sequence[int],
                delta: int, rng: random.Random, transcript: Transcript | None = None):
    """Client grant plus server evaluation; returns ``(g, epp, grant)``."""
    grant, epp = mi_grant(puzzles, keys, cp, q, delta, rng)
    g = mi_server_evaluate(puzzles.o, grant, cp, rng, transcript)
    return g, epp, grant


def _theta(g, tk: int, cp: ChainParams):
    p = cp.p
    z2, w2 = _blind(tk, cp)
    if not all(w2):
        return None
    ys = tuple((gi - zi) * pow(wi, -1, p) % p for gi, zi, wi in zip(g, z2, w2))
    return interpolate(PointValuePoly(cp.xs, ys, cp.field))


def mi_solve_combination(g, epp: ChainEvalParams, cp: ChainParams, rng: random.Random | None = None,
                         progress=None) -> tuple[int, tuple[int, int]]:
    """Returns ``(res, (root, tk))``."""
    if len(g) != POINTS:
        raise SolutionExtractionFailure(f"expected {POINTS} coordinates, got {len(g)}")
    tk = sequential_power(epp.h, epp.Y, epp.N, progress)
    theta = _theta(g, tk, cp)
    if theta is None or theta.is_zero():
        raise SolutionExtractionFailure("cannot unblind theta")
    for r in sorted(x.value for x in find_roots(theta, rng)):
        if r and verify_commit(epp.com, r, tk):
            res = theta.constant_term.value * pow(-r % cp.p, -1, cp.p) % cp.p
            return res, (r, tk)
    raise SolutionExtractionFailure("no root of theta opens the commitment")


def mi_verify_combination(res: int, proof: tuple[int, int], g, epp: ChainEvalParams, cp: ChainParams) -> bool:
    root, tk = proof
    if len(g) != POINTS or not verify_commit(epp.com, root, tk):
        return False
    theta = _theta(g, tk, cp)
    if theta is None or theta(root).value != 0 or root % cp.p == 0:
        return False
    return theta.constant_term.value * pow(-root % cp.p, -1, cp.p) % cp.p == int(res) % cp.p


def mi_verify(m, zeta, context, cp: ChainParams, cmd: str) -> bool:
    """``clientPzl``: context is ``(pp, j)`` with 1-based ``j`` and ``zeta = mk_j``.
    ``evalPzl``: context is ``(g, epp)`` and ``zeta = (root, tk)``."""
    if cmd == CLIENT_PUZZLE:
        pp, j = context
        if not 1 <= j <= len(pp.coms) or m is None:
            return False
        return verify_commit(pp.coms[j - 1], m, zeta)
    if cmd == EVAL_PUZZLE:
        g, epp = context
        return mi_verify_combination(m, zeta, g, epp, cp)
    raise ValueError(f"unknown command {cmd!r}")
