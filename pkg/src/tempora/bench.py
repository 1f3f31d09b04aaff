"""Timing harness for root finding and PRF calls.

Every cell of a grid (each parameter at each field size) is timed once per
trial in round-robin order, so slow drift on a shared machine hits all
cells equally and their ratios and ordering stay meaningful.
"""

from __future__ import annotations

import csv
import gc
import random
import statistics
import time
from dataclasses import dataclass, fields
from typing import Iterable, TextIO

from .crypto import PrfKey, prf
from .field import FieldParams, random_prime
from .poly import DensePoly, find_roots

FIELD_BITS = (128, 256)
FACTORIZATION_DEGREES = (2, 4, 6, 8, 10)
PRF_COUNTS = (2, 4, 16, 64, 256, 1024)
MIN_TRIALS = 100

# published timings of a compiled implementation, in ms
REFERENCE_FACTORIZATION_MS = {
    128: dict(zip(FACTORIZATION_DEGREES, (0.3, 0.5, 0.8, 1.2, 1.4))),
    256: dict(zip(FACTORIZATION_DEGREES, (0.6, 1.0, 1.7, 2.1, 2.2))),
}
REFERENCE_PRF_MS = {
    128: dict(zip(PRF_COUNTS, (0.006, 0.011, 0.04, 0.15, 0.658, 2.424))),
    256: dict(zip(PRF_COUNTS, (0.008, 0.016, 0.071, 0.29, 0.97, 3.534))),
}

SUITES = ("factorization", "prf")


@dataclass(frozen=True)
class BenchRow:
    operation: str
    parameter: int
    field_bits: int
    mean_ms: float
    stddev_ms: float
    trials: int

    @property
    def reference_ms(self) -> float | None:
        table = REFERENCE_FACTORIZATION_MS if self.operation == "factorization" else REFERENCE_PRF_MS
        return table.get(self.field_bits, {}).get(self.parameter)


def bench_fields(bits: Iterable[int], seed: int = 0) -> dict[int, FieldParams]:
    return {b: FieldParams(random_prime(b, random.Random(f"{seed}/{b}"))) for b in bits}


def _row(op, param, bits, samples) -> BenchRow:
    ms = [s * 1e3 for s in samples]
    sd = statistics.stdev(ms) if len(ms) > 1 else 0.0
    return BenchRow(op, param, bits, statistics.fmean(ms), sd, len(ms))


def _interleaved(grid, bits, trials, make_job):
    """Time every (param, bits) cell once per trial, round-robin.

    ``make_job(param, bits, trial)`` returns a zero-argument callable.
    """
    cells = [(param, b) for param in grid for b in bits]
    jobs = {c: [make_job(c[0], c[1], t) for t in range(trials)] for c in cells}
    samples = {c: [] for c in cells}
    clock = time.perf_counter
    gc.collect()
    gc.disable()
    try:
        for t in range(trials):
            for c in cells:
                job = jobs[c][t]
                start = clock()
                job()
                samples[c].append(clock() - start)
    finally:
        gc.enable()
    return [(param, b, samples[(param, b)]) for param, b in cells]


def run_factorization(bits=FIELD_BITS, trials: int = MIN_TRIALS, seed: int = 0,
                      degrees=FACTORIZATION_DEGREES) -> list[BenchRow]:
    """Time root finding on products of ``d`` distinct random linear factors."""
    flds = bench_fields(bits, seed)
    rng = random.Random(seed)

    def make(d, b, t):
        fld = flds[b]
        roots = set()
        while len(roots) < d:
            roots.add(rng.randrange(1, fld.p))
        poly = DensePoly.from_roots(sorted(roots), fld)
        return lambda: find_roots(poly, random.Random(t))

    rows = [_row("factorization", d, b, s) for d, b, s in _interleaved(degrees, list(bits), trials, make)]
    return sorted(rows, key=lambda r: (r.field_bits, r.parameter))


def run_prf(bits=FIELD_BITS, trials: int = MIN_TRIALS, seed: int = 0, counts=PRF_COUNTS) -> list[BenchRow]:
    """Time ``c`` consecutive PRF calls under one fresh key."""
    flds = bench_fields(bits, seed)
    rng = random.Random(seed)

    def make(c, b, t):
        fld = flds[b]
        key = PrfKey(rng.getrandbits(256).to_bytes(32, "big"))
        return lambda: [prf(i, key, fld) for i in range(1, c + 1)]

    rows = [_row("prf", c, b, s) for c, b, s in _interleaved(counts, list(bits), trials, make)]
    return sorted(rows, key=lambda r: (r.field_bits, r.parameter))


def run_suite(suite: str, bits=FIELD_BITS, trials: int = MIN_TRIALS, seed: int = 0) -> list[BenchRow]:
    if trials < MIN_TRIALS:
        raise ValueError(f"at least {MIN_TRIALS} trials per cell")
    if suite == "factorization":
        return run_factorization(bits, trials, seed)
    if suite == "prf":
        return run_prf(bits, trials, seed)
    raise ValueError(f"unknown suite {suite!r}")


def write_csv(rows: list[BenchRow], fh: TextIO):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRow)] + ["reference_ms"])
    for r in rows:
        ref = r.reference_ms
        w.writerow([r.operation, r.parameter, r.field_bits, f"{r.mean_ms:.4f}", f"{r.stddev_ms:.4f}",
                    r.trials, "" if ref is None else ref])


def read_csv(fh: TextIO) -> list[BenchRow]:
    out = []
    for rec in csv.DictReader(fh):
        out.append(BenchRow(rec["operation"], int(rec["parameter"]), int(rec["field_bits"]),
                            float(rec["mean_ms"]), float(rec["stddev_ms"]), int(rec["trials"])))
    return out


def by_bits(rows: list[BenchRow], bits: int) -> list[BenchRow]:
    return sorted((r for r in rows if r.field_bits == bits), key=lambda r: r.parameter)


def size_ratio(rows: list[BenchRow], low: int = 128, high: int = 256) -> float:
    """Total time at ``high`` bits over total time at ``low`` bits."""
    return sum(r.mean_ms for r in by_bits(rows, high)) / sum(r.mean_ms for r in by_bits(rows, low))


def within_factor(rows: list[BenchRow], factor: float = 10.0) -> bool:
    return all(r.reference_ms / factor <= r.mean_ms <= r.reference_ms * factor
               for r in rows if r.reference_ms is not None)


def nondecreasing(rows: list[BenchRow], bits: int) -> bool:
    ms = [r.mean_ms for r in by_bits(rows, bits)]
    return all(a <= b for a, b in zip(ms, ms[1:]))
