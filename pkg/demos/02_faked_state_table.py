"""
Detector blinding: rebuilding the faked-state outcome table
===========================================================

Eve measures Alice's photon, blinds Bob's detectors for the opposite bit and
sends a bright pulse of the opposite bit in the opposite basis. Bob only ever
clicks with Eve's bit, and only when he picked Eve's basis.
"""

from collections import Counter

from qkdsim.adversaries import FakedStateBB84, faked_state_bb84
from qkdsim.analysis import summarize
from qkdsim.detector import DetectorBank, Quantum, receive, select_basis, tick
from qkdsim.protocols import EVE, run_bb84
from qkdsim.quantum import Basis, RandomStream, encode

rng_eve, rng_bob = RandomStream(7, EVE), RandomStream(7, 1)

# Alice always sends X0 here; tabulate what Bob sees for each Eve branch
table = Counter()
for _ in range(20_000):
    pulses, note = faked_state_bb84(Quantum(encode(0, Basis.X)), rng_eve)
    sent = pulses[1]
    for bob_basis in (Basis.X, Basis.Z):
        bank = DetectorBank()
        select_basis(bank, bob_basis)
        det = receive(bank, pulses, rng_bob)
        tick(bank)
        table[(note.eve_basis, note.measured_bit, f"{sent.basis}{sent.bit}", bob_basis, str(det))] += 1

print("Alice  Eve-basis  Eve-bit  Eve-sends  Bob-basis  Bob-sees  count")
for (eb, ebit, sent, bb, det), count in sorted(table.items(), key=str):
    print(f"X0     {eb}          {ebit}        {sent}         {bb}          {det:<8}  {count}")

# the full protocol: no errors, Eve knows everything, Bob sees a quarter of the pulses
tr = run_bb84(40_000, 7, FakedStateBB84(RandomStream(7, EVE)).hooks())
tr.attack = "faked-state"
rep = summarize(tr)
print(f"\ndetection rate {rep.detection_rate:.3f}, sifted yield {rep.sift_fraction:.3f}, "
      f"qber {rep.qber}, eve knows {rep.eve_knowledge_fraction}")
