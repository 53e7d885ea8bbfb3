"""
Integrator checks
=================

Closed form, conservation laws and steady-state detection.
"""

import numpy as np

import crnmono as cm

net = cm.parse("A -> B @ 1\ninit A = 1").network
traj = cm.simulate(net, None, cm.SimConfig(t_end=10))
print("max error vs exp(-t):", np.max(np.abs(traj.grid_states[:, 0] - np.exp(-traj.grid_times))))

mm = cm.parse_file("tests/fixtures/michaelis.crn").network
W = cm.conservation_laws(mm)
print("conservation laws:\n", W)
traj = cm.simulate(mm, None, cm.SimConfig(t_end=200))
totals = traj.states @ W.T
print("drift:", np.max(np.abs(totals - totals[0]), axis=0))

# a constant source never settles; an exchange reaction does
for text in ("0 -> A @ 1", "A <-> B @ 1, 1\ninit A = 2"):
    t = cm.simulate(cm.parse(text).network, None, cm.SimConfig(t_end=100))
    print(text.splitlines()[0], "->", "converged" if t.steady_state.converged else "not converged")
