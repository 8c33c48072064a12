"""Variational free energy bounds the surprise of the observations.

With a single observation the exact posterior makes the bound tight and any
other belief pays extra. Over several steps the belief factorizes across time,
so it can put joint mass on moves the dynamics forbid; the free energy is then
infinite even though every marginal is exact.
"""

from dataclasses import replace

import numpy as np

from efekit.agent import line_world
from efekit.inference import exact_filter_posterior, log_evidence, variational_free_energy

world, _ = line_world()
m = replace(world, prior_d=np.full(world.n_states, 0.25))  # start unsure of position
obs, acts = [1], []

q_exact = exact_filter_posterior(m, obs, acts)
logz = log_evidence(m, obs, acts)
print("log evidence            ", logz)
print("free energy, exact q    ", variational_free_energy(m, q_exact, obs, acts))

rng = np.random.default_rng(0)
for i in range(3):
    # reweight inside the exact support; mass outside it would make the cost infinite
    support = q_exact.current.probs > 0
    w = np.where(support, rng.dirichlet(np.ones(m.n_states)), 0.0)
    q = [0.5 * q_exact.current.probs + 0.5 * w / w.sum()]
    print(f"free energy, perturbed q {i}", variational_free_energy(m, q, obs, acts))

m = world
obs, acts = [0, 1, 2], [2, 2]
q_chain = exact_filter_posterior(m, obs, acts)
print("\nthree steps, log evidence", log_evidence(m, obs, acts))
print("free energy, exact marginals", variational_free_energy(m, q_chain, obs, acts))
print("smoothed marginals:")
for k, q in enumerate(q_chain.marginals):
    print(f"  step {k}:", np.round(q.probs, 4))
