"""
How many photons does it take to read a rotation angle?
=======================================================

Eve siphons photons off a bright pulse and estimates its polarization by
maximum likelihood over a grid of candidate angles.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from qkdsim.adversaries import siphon_success_rate
from qkdsim.quantum import RandomStream

grid = 1024
photons = [1, 8, 64, 512, 2048, 8192]
rates = [siphon_success_rate(grid, m, 5000, RandomStream(1, m)) for m in photons]
for m, r in zip(photons, rates):
    print(f"m={m:>5}  exact hit rate {r:.4f}")

# with one photon per filter and ideal filters, a full sweep pins the angle
print("idealized, one photon per filter:", siphon_success_rate(grid, grid, 2000, RandomStream(2), mode="oracle"))

plt.semilogx(photons, rates, "o-")
plt.xlabel("siphoned photons")
plt.ylabel("P(estimate == true angle)")
plt.title(f"{grid}-point grid, realistic filters")
plt.savefig("siphon_success.png", dpi=120)
print("wrote siphon_success.png")
