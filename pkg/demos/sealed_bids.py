"""Five bidders lock their bids; a server learns only the weighted total.

Run with ``python demos/sealed_bids.py``.  Squaring counts are tiny so the
whole thing finishes in well under a second.
"""

import random

from tempora import tf
from tempora.timelock import keygen

rng = random.Random(2024)
sp = tf.s_setup(rng, lambda_bits=128, leader_count=2, threshold=1)

bids = {u: rng.randrange(1000, 5000) for u in range(1, 6)}
clients = {}
for u, bid in bids.items():
    keys = keygen(rng, 128)
    clients[u] = tf.ClientContext(u, keys, tf.gen_puzzle(bid, keys, sp, delta=200, max_ss=1, rng=rng))
    print(f"bidder {u} locked a bid, published {len(clients[u].puzzle.vector)} coordinates")

# everybody's weight is 1, so the combination is the sum of all bids
weights = {u: 1 for u in bids}
ev = tf.evaluate(clients, sp, weights, delta=50, max_ss=1, rng=rng)
print(f"leaders: {ev.leaders}")

total, proof = tf.solve_combination(ev.g, ev.epp, sp, rng)
print(f"opened total after {ev.epp.Y} squarings: {total} (true sum {sum(bids.values())})")
print("anyone can check it:", tf.verify(total, proof, (ev.g, ev.epp), sp, tf.EVAL_PUZZLE))

# the individual bids open later, one puzzle at a time
for u, ctx in clients.items():
    bid, p = tf.solve_single(ctx.puzzle.vector, ctx.puzzle.pp, sp)
    ok = tf.verify(bid, p, ctx.puzzle.pp, sp, tf.CLIENT_PUZZLE)
    print(f"bidder {u}: {bid} verified={ok}")
