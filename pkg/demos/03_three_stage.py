"""
The three-stage protocol and three attacks on it
================================================

Alice and Bob lock the qubit with commuting rotations, so the key bit
travels three times without either basis ever being announced.
"""

from qkdsim.adversaries import FakedStateForcing, InterceptResend, Party, mitm_three_stage
from qkdsim.analysis import qber
from qkdsim.protocols import EVE, run_three_stage, three_stage_keys, three_stage_run
from qkdsim.quantum import Basis, RandomStream, RotationTransform

# one round, step by step
u_a, u_b = RotationTransform.from_grid(137, 1024), RotationTransform.from_grid(900, 1024)
rec = three_stage_run(1, Basis.Z, RandomStream(1), RandomStream(2), u_a=u_a, u_b=u_b)
print("U_A =", u_a.angle, "U_B =", u_b.angle)
print("states on the wire:", [round(s.angle, 4) for s in rec.stage_states], "-> Bob reads", rec.bob_detection)

n = 20_000
clean = run_three_stage(n, 3)
print("no eavesdropper, qber:", qber(*three_stage_keys(clean.records)))

# measuring a rotated qubit in the agreed basis is a coin flip for Eve
ir = run_three_stage(n, 3, InterceptResend(RandomStream(3, EVE), basis=Basis.Z).hooks())
print("measure-and-resend, bob qber:", round(qber(*three_stage_keys(ir.records)), 3))

# forcing Bob's detector to Eve's reading gives away a 50% error rate
forced = run_three_stage(n, 3, FakedStateForcing(RandomStream(3, EVE)).hooks())
print("faked-state forcing, bob qber:", round(qber(*three_stage_keys(forced.records)), 3))

# a man in the middle with her own rotations is invisible unless the classical channel is authenticated
bits = [int(u < 0.5) for u in RandomStream(4, 9).uniforms(1000)]
for auth in (False, True):
    res = mitm_three_stage(bits, Party("alice", RandomStream(4, 0)), Party("bob", RandomStream(4, 1)),
                           Party("eve", RandomStream(4, EVE)), authenticated=auth)
    print(f"mitm authenticated={auth}: detected={res.detected}, "
          f"eve holds {len(res.eve_key_with_alice)} bits, bob holds {len(res.bob_key)}")
