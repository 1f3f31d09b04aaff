"""A server that nudges one coordinate of the combined puzzle gets caught.

Runs the simulated network twice with the same seed: once honestly, once
with a hook that adds 1 to a coordinate of the evaluated puzzle on its way
to the verifier.
"""

from tempora import simnet

cfg = simnet.RunConfig(n=3, leaders=1, rsa_bits=128)

honest = simnet.run_protocol(cfg, seed=7)
print("honest run verify bits:", honest.verify)
print("expected result:", honest.expected["res"], "server result:", honest.result["value"])

hook = simnet.flip_coordinate("EvalPuzzlePublish", "g", 0)
cheat = simnet.run_with_adversary(cfg, seed=7, hook=hook)
print("tampered run verify bits:", cheat.verify)
print("interceptions:", [i["action"] + " " + i["message"]["kind"] for i in cheat.interceptions])

drop = simnet.drop_messages("FKey")
aborted = simnet.run_with_adversary(cfg, seed=7, hook=drop)
print("dropping pairwise keys aborts:", aborted.abort)
