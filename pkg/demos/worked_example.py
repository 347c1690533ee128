"""
Coarse membership on an 8-node toy network
==========================================

Three communities of sizes 3, 4 and 1 are observed through four coarse
nodes, each averaging two neighbouring fine nodes.
"""

import numpy as np

from coarsectrl.coarsening import CoarseningMap, coarse_membership, sync_stats
from coarsectrl.example1 import report
from coarsectrl.sbm import generate_membership

# exact fractions first
print(report())

# the same objects through the float API
assign = generate_membership(8, [3 / 8, 1 / 2, 1 / 8])
cmap = CoarseningMap(supports=np.array([[0, 1], [2, 3], [4, 5], [6, 7]]), n=8)
phi = coarse_membership(cmap, assign)
stats = sync_stats(phi, np.diag(assign.relative_sizes))

# coarse nodes 0 and 2 see one community each, 1 and 3 straddle two
print("communities per coarse node:", stats.support_sizes)
print("perfectly synchronized:", stats.perfect_sync)
print("balancedness gap:", stats.balancedness_gap)
