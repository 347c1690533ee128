"""
One trial end to end
====================

Sample a 4-community graph, coarsen it, and compare the two estimators of
group average controllability against the truth and a random guess.
"""

import numpy as np

from coarsectrl.coarsening import coarse_adjacency, coarse_membership, sample_coarsening
from coarsectrl.controllability import normalize, theta_fine, theta_group_expected
from coarsectrl.estimators import baseline_vector, learned_theta, mm_community_estimate, prom_estimate
from coarsectrl.metrics import align_columns, baseline_error, delta_learned, delta_prom
from coarsectrl.sbm import BlockModel, generate_membership, sample_fine_graph

rng = np.random.default_rng(1)
n, m, r, K = 1000, 60, 10, 4

model = BlockModel.planted(K, p=0.5, q=0.1, rho=0.2)
assign = generate_membership(n, model.pi)
A = sample_fine_graph(model, assign, rng)
print("mean degree:", A.sum(axis=1).mean())

# coarse view: m groups of r fine nodes, mostly drawn from one community
cmap = sample_coarsening(assign, m, r, omega=0.05, rng=rng)
A_tilde = coarse_adjacency(cmap, A)
phi = coarse_membership(cmap, assign)

# ground truth needs the fine graph
theta_grp = cmap.apply(theta_fine(normalize(A))) / r
print("group controllability range:", theta_grp.min(), theta_grp.max())
print("expected-model value for comparison:", theta_group_expected(model, assign, cmap)[:3])

# estimators only see A_tilde
theta_prom = prom_estimate(A_tilde)
est = mm_community_estimate(A_tilde, K)
learned = learned_theta(est, a=1.0, n=n)
perm = align_columns(est.phi_hat, phi)
print("membership error per coarse node:", np.abs(est.phi_hat[:, perm] - phi).sum() / m)

print("PROM error:    ", delta_prom(theta_grp, theta_prom, r))
print("learned error: ", delta_learned(learned.theta_hat, theta_grp, r))
print("random guess:  ", baseline_error(baseline_vector(m, rng), theta_grp, r))
