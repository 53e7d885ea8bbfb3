"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL line of
every criterion as it completes; the same lines are repeated in the terminal
summary of any pytest run that includes this file.
"""

import io
import re
import time

import numpy as np

from crnmono import (
    EmpiricalKind,
    OddCycle,
    SimConfig,
    VerdictKind,
    brute_force_labeling,
    build_r_graph,
    build_sign_structure,
    check_empirical_monotonicity,
    check_io_monotonicity,
    conservation_laws,
    find_consistent_labeling,
    flip_orientation,
    parse,
    rule_of_two,
    simulate,
    sweep,
    verify_labeling,
)
from crnmono.cli import run
from conftest import FIXTURES, load, mixed_network, random_network


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    t0 = time.perf_counter()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), time.perf_counter() - t0


def _ordered(values, rel=1e-6):
    """Adjacent decreases at most ``rel`` of the larger magnitude."""
    worst = 0.0
    for a, b in zip(values, values[1:]):
        if b < a:
            worst = max(worst, (a - b) / max(abs(a), abs(b)))
    return worst <= rel, worst


def test_criterion_01_michaelis_verdict(criterion):
    c = criterion(1, "Michaelis-Menten structural verdict")
    _cli("analyze", FIXTURES / "michaelis.crn")  # warm-up: first-call import costs are not the analysis
    code, out, dt = _cli("analyze", FIXTURES / "michaelis.crn")
    c.check(code == 0, f"exit code {code}")
    c.check("verdict: PositivelyMonotonic" in out, "verdict not PositivelyMonotonic")
    c.check("sigma(R_IN)*sigma(R_OUT) = +1" in out, "sign product not +1")
    c.check(dt < 0.1, f"runtime {dt:.3f} s >= 0.1 s")
    c.note(f"runtime {dt * 1e3:.1f} ms")
    assert not c.failures, c.line()


def test_criterion_02_michaelis_sweep(criterion):
    c = criterion(2, "Michaelis-Menten sweep shape")
    doc = load("michaelis")
    net = doc.network
    c.check(net.initial == (10.0, 100.0, 0.0, 0.0), f"fixture inits {net.initial}")
    rx = net.reactions
    c.check((rx[0].k_fwd, rx[0].k_bwd, rx[1].k_fwd) == (0.1, 1000.0, 0.3), "rate mapping")
    s, p = net.species_id("S"), net.species_id("P")
    values = np.geomspace(100.0, 2000.0, 20)
    # the slow phase has time constant Km/(k2*E0) ~ 3.3e3; 6e4 reaches the 1e-6 steady state
    cfg = SimConfig(t_end=60000.0)
    t0 = time.perf_counter()
    res = check_empirical_monotonicity(net, s, p, values, cfg, expected="positive")
    dt = time.perf_counter() - t0
    sw = res.sweep
    c.check(all(sw.converged), f"{sw.converged.count(False)} runs not at steady state")
    ok, worst = _ordered(sw.output_at_ss)
    c.check(ok, f"[P]_ss decreases by {worst:.2e} relative")
    c.check(res.kind is EmpiricalKind.CONSISTENT_POSITIVE, f"dominance {res.kind.value}, gap {res.gap}")
    c.check(len(sw.trajectories[0].grid_times) == 1001, "grid size")
    c.check(dt < 10.0, f"runtime {dt:.1f} s >= 10 s")
    c.note(f"runtime {dt:.1f} s, [P]_ss from {sw.output_at_ss[0]:.6g} to {sw.output_at_ss[-1]:.6g}")
    assert not c.failures, c.line()


def test_criterion_03_erk_verdict(criterion):
    c = criterion(3, "ERK* structural verdict and labeling")
    fixture = FIXTURES / "erk.crn"
    net = load("erk").network
    c.check(net.reactions[net.reaction_id("R21")].promoters == {net.species_id("PRaf")}, "PRaf not a promoter of R21")
    _cli("analyze", fixture)
    code, out, dt = _cli("analyze", fixture)
    c.check(code == 0 and "verdict: PositivelyMonotonic" in out, "verdict not PositivelyMonotonic")
    c.check(dt < 0.1, f"analyze runtime {dt:.3f} s >= 0.1 s")
    code, dot, dt_g = _cli("graph", fixture, "--kind", "r", "--augment")
    labels = dict(re.findall(r'"(\w+)" \[shape=box, xlabel="([+-]1)"\]', dot))
    c.check(code == 0 and len(labels) == 5, f"labels found: {labels}")
    c.check(len(set(labels.values())) == 1, f"labels not uniform up to sign: {labels}")
    c.check(" -- " in dot and 'label="−"' not in dot, "augmented R-graph should carry only positive edges")
    c.check(dt_g < 0.1, f"graph runtime {dt_g:.3f} s >= 0.1 s")
    c.note(f"analyze {dt * 1e3:.1f} ms, labels {sorted(labels.items())}")
    assert not c.failures, c.line()


def test_criterion_04_erk_sweep(criterion):
    c = criterion(4, "ERK* sweep shape")
    net = load("erk").network
    raf, pp = net.species_id("Raf"), net.species_id("PPMek1")
    values = np.linspace(1.0, 100.0, 20)
    # slowest mode at Raf = 1 relaxes over a few hundred time units; 3000 clears the 1e-6 detector
    cfg = SimConfig(t_end=3000.0)
    t0 = time.perf_counter()
    res = sweep(net, raf, values, pp, cfg, keep_trajectories=False)
    dt = time.perf_counter() - t0
    c.check(all(res.converged), f"{res.converged.count(False)} runs not at steady state")
    ok, worst = _ordered(res.output_at_ss)
    c.check(ok, f"PPMek1_ss decreases by {worst:.2e} relative")
    c.check(dt < 10.0, f"runtime {dt:.1f} s >= 10 s")
    c.note(f"runtime {dt:.1f} s, PPMek1_ss from {res.output_at_ss[0]:.6g} to {res.output_at_ss[-1]:.6g}")
    assert not c.failures, c.line()


def test_criterion_05_network3(criterion):
    c = criterion(5, "network (3) R-graph, labeling and rule of 2")
    net = load("network3").network
    rg = build_r_graph(net)
    r1, r2, r3 = (net.reaction_id(n) for n in ("R1", "R2", "R3"))
    c.check(rg.edge_signs(r1, r2) == set(), "unexpected {R1,R2} edge")
    c.check(rg.edge_signs(r1, r3) == {1} and rg.edge_signs(r2, r3) == {1}, "expected positive edges to R3")
    c.check(verify_labeling(net, (1, 1, 1)), "sigma = +1 does not verify")
    c.check(find_consistent_labeling(rg).sigma == (1, 1, 1), "search did not return sigma = +1")
    n_c = rule_of_two(net).counts[net.species_id("C")]
    c.check(n_c == 2, f"n(C) = {n_c}")
    assert not c.failures, c.line()


def test_criterion_06_oracle_equivalence(criterion, rng):
    c = criterion(6, "labeling search agrees with exhaustive search")
    t0 = time.perf_counter()
    agree = fail = 0
    for _ in range(200):
        net = mixed_network(rng)  # at most 8 reactions
        rg = build_r_graph(net)
        fast = find_consistent_labeling(rg)
        slow = brute_force_labeling(rg)
        found = not isinstance(fast, OddCycle)
        if found == (slow is not None):
            agree += 1
        if found:
            c.check(verify_labeling(net, fast), "returned labeling fails verification")
        else:
            fail += 1
            c.check(fast.verify(rg), "certificate does not re-verify")
        if slow is not None:
            c.check(verify_labeling(net, slow), "exhaustive labeling fails verification")
    dt = time.perf_counter() - t0
    c.check(agree == 200, f"agreement {agree}/200")
    c.check(dt < 30.0, f"runtime {dt:.1f} s")
    c.note(f"{agree}/200 agree, {fail} without labeling, {dt:.2f} s")
    assert not c.failures, c.line()


def test_criterion_07_orientation_invariance(criterion, rng):
    c = criterion(7, "verdict invariant under reorienting reversible reactions")
    t0 = time.perf_counter()
    flips = 0
    kinds = set()
    for _ in range(100):
        net = mixed_network(rng, min_reversible=1)
        i, o = (int(x) for x in rng.choice(net.n_species, 2, replace=False))
        kind = check_io_monotonicity(net, i, o).kind
        kinds.add(kind)
        for r, rx in enumerate(net.reactions):
            if rx.reversible:
                flips += 1
                after = check_io_monotonicity(flip_orientation(net, r), i, o).kind
                c.check(after is kind, f"flip of {rx.name} changed {kind.value} to {after.value}")
    dt = time.perf_counter() - t0
    c.check(dt < 30.0, f"runtime {dt:.1f} s")
    c.note(f"{flips} flips over 100 networks, verdicts seen {sorted(k.value for k in kinds)}, {dt:.2f} s")
    assert not c.failures, c.line()


def test_criterion_08_rule_of_two_soundness(criterion, rng):
    c = criterion(8, "rule-of-2 failure implies no labeling")
    failing = 0
    for _ in range(500):
        net = random_network(rng)
        if not rule_of_two(net).passed:
            failing += 1
            c.check(isinstance(find_consistent_labeling(build_r_graph(net)), OddCycle), "counterexample found")
    c.check(failing > 0, "randomized suite produced no rule-of-2 failures")
    c.note(f"{failing} of 500 networks fail the rule of 2, 0 counterexamples")
    assert not c.failures, c.line()


def test_criterion_09_numerical_integrity(criterion):
    c = criterion(9, "integrator accuracy and conservation")
    net = parse("A -> B @ 1\ninit A = 1").network
    tr = simulate(net, None, SimConfig(t_end=10.0))
    err = float(np.max(np.abs(tr.grid_states[:, 0] - np.exp(-tr.grid_times))))
    c.check(err < 1e-8, f"max error {err:.2e}")
    worst = 0.0
    for path in sorted(FIXTURES.glob("*.crn")):
        fnet = load(path.stem).network
        y0 = fnet.initial_vector()
        if not y0.any():
            y0 = np.linspace(1.0, 2.0, fnet.n_species)
        traj = simulate(fnet, y0, SimConfig(t_end=100.0))
        W = conservation_laws(fnet)
        c.check(np.all(W @ build_sign_structure(fnet).gamma == 0), f"{path.stem}: not a left null vector")
        for col in (traj.states @ W.T).T:
            rel = float(np.max(np.abs(col - col[0]))) / max(abs(col[0]), 1e-300)
            worst = max(worst, rel)
            c.check(rel <= 1e-6, f"{path.stem}: conservation drift {rel:.2e}")
        c.check(np.all(traj.states >= 0), f"{path.stem}: negative concentration")
    c.note(f"A->B max error {err:.1e}, worst conservation drift {worst:.1e}")
    assert not c.failures, c.line()


# per fixture: sweep values for the input and a horizon long enough to show the ordering
CONCORDANCE = {
    "michaelis": (np.geomspace(100.0, 2000.0, 6), 300.0),
    "erk": (np.linspace(1.0, 100.0, 6), 300.0),
    "network3": (np.linspace(0.0, 3.0, 6), 20.0),
    "linear": (np.linspace(0.0, 3.0, 6), 20.0),
    "consumption": (np.linspace(0.0, 3.0, 6), 20.0),
    "competing": (np.linspace(0.0, 3.0, 6), 20.0),
}


def test_criterion_10_concordance(criterion):
    c = criterion(10, "structural verdicts never contradicted by simulation")
    checked = []
    for path in sorted(FIXTURES.glob("*.crn")):
        doc = load(path.stem)
        if doc.declared_input is None or doc.declared_output is None:
            continue
        net = doc.network
        i, o = net.species_id(doc.declared_input), net.species_id(doc.declared_output)
        v = check_io_monotonicity(net, i, o)
        if v.kind is VerdictKind.INCONCLUSIVE:
            continue
        values, t_end = CONCORDANCE[path.stem]
        expected = "positive" if v.kind is VerdictKind.POSITIVE else "negative"
        res = check_empirical_monotonicity(net, i, o, values, SimConfig(t_end=t_end), expected=expected, keep_trajectories=False)
        c.check(res.kind is not EmpiricalKind.VIOLATION, f"{path.stem}: {expected} ordering violated by {res.gap}")
        checked.append(f"{path.stem}={res.kind.value}")
    c.check(len(checked) >= 5, f"only {len(checked)} fixtures had a signed verdict")
    c.note(", ".join(checked))
    assert not c.failures, c.line()
