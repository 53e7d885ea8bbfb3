"""
R-graphs, labelings and certificates
====================================
"""

import crnmono as cm

# two reactions compete for A and cooperate through B
net = cm.parse("A -> B @ 1\nA + B -> C @ 1").network
rg = cm.build_r_graph(net)
for e in rg.edges:
    print(net.reaction_names[e.i], net.reaction_names[e.k], "+" if e.sign > 0 else "-",
          [net.species_names[j] for j in e.witnesses])

cert = cm.find_consistent_labeling(rg)
print(type(cert).__name__, "negative edges:", cert.negative_count, "valid:", cert.verify(rg))
print("exhaustive search:", cm.brute_force_labeling(rg))

# n(A) = 2 here; the input reaction 0 -> A pushes it to 3, so the rule of 2
# alone rules out a labeling for the augmented network
print("rule of 2 counts:", cm.rule_of_two(net).counts)
aug = cm.augment(net, net.species_id("A"), net.species_id("C"))
print("augmented:", cm.rule_of_two(aug).counts, "violations:", cm.rule_of_two(aug).violations)

# a cascade where every species feeds exactly one consumer has a labeling
chain = cm.parse("A -> C @ 1\nB -> C @ 1\nC -> D @ 1").network
lab = cm.find_consistent_labeling(cm.build_r_graph(chain))
print(lab, cm.verify_labeling(chain, lab))

# reorienting a reversible reaction negates its label and nothing else
rev = cm.parse("A <-> B @ 1, 2\nB -> C @ 1").network
for n in (rev, cm.flip_orientation(rev, 0)):
    print(cm.find_consistent_labeling(cm.build_r_graph(n)))
