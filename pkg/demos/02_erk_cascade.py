"""
ERK* cascade fragment
=====================

Raf phosphorylation drives Mek1 phosphorylation through the promoter PRaf.
"""

import numpy as np

import crnmono as cm

doc = cm.parse_file("tests/fixtures/erk.crn")
net = doc.network
raf, pp = net.species_id("Raf"), net.species_id("PPMek1")

# PRaf only shows up as a promoter: a one-way species -> reaction arc
sr = cm.build_sr_graph(net)
print(cm.to_dot(sr))

verdict = cm.check_io_monotonicity(net, raf, pp)
print(verdict.kind)
print(cm.to_dot(verdict.r_graph, verdict.labeling))

res = cm.sweep(net, raf, np.linspace(1, 100, 8), pp, cm.SimConfig(t_end=3000), keep_trajectories=False)
print(cm.sweep_csv(res))
