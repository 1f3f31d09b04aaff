"""One client locks five messages that open one after another.

Each puzzle's squaring base comes from the previous puzzle's master key, so
a solver can only work through them in order.  A weighted combination of all
five opens before the first one.
"""

import random

from tempora import mitf
from tempora.timelock import keygen

rng = random.Random(11)
cp = mitf.mi_setup(rng, deltas=[40, 10, 10, 20, 30], max_ss=5)
keys = keygen(rng, 128)

messages = [101, 202, 303, 404, 505]
chain = mitf.mi_gen_puzzles(messages, keys, cp, rng)
print("squarings per puzzle:", cp.Ts)

q = [1, 2, 3, 4, 5]
g, epp, _ = mitf.mi_evaluate(chain, keys, cp, q, delta=2, rng=rng)
res, proof = mitf.mi_solve_combination(g, epp, cp, rng)
print(f"combination after {epp.Y} squarings: {res} (expected {sum(a * b for a, b in zip(q, messages))})")
print("verified:", mitf.mi_verify(res, proof, (g, epp), cp, mitf.EVAL_PUZZLE))


def report(done):
    print(f"  {done} squarings so far")


for j, (m, mk) in enumerate(mitf.mi_solve_chain(chain.o, chain.pp, cp, progress=report), start=1):
    print(f"puzzle {j} opened: {m}, verified={mitf.mi_verify(m, mk, (chain.pp, j), cp, mitf.CLIENT_PUZZLE)}")
