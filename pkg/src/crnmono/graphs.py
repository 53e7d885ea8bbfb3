"""Structural monotonicity analysis on the directed SR-graph and the R-graph.

The central entry point is :func:`check_io_monotonicity`: it adds a source
reaction for the input species and a promoter-only reaction for the output
species, searches the R-graph of the augmented network for a consistent
labeling, and reads the sign of the input/output relation off the labels of
the two auxiliary reactions.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Network, NetworkError, Reaction, SignStructure, build_sign_structure

IN_NAME = "R_IN"
OUT_NAME = "R_OUT"
BRUTE_FORCE_LIMIT = 20


class Case(enum.Enum):
    C1 = "C1"  # species -> reaction only (promoter)
    C2 = "C2"  # reaction -> species only (e.g. product of an irreversible reaction)
    C3 = "C3"  # both directions


# --------------------------------------------------------------------------
# SR-graph


@dataclass(frozen=True)
class SREdge:
    source: tuple[str, int]  # ("species", j) or ("reaction", i)
    target: tuple[str, int]
    case: Case


@dataclass(frozen=True)
class SRGraph:
    species_nodes: tuple[str, ...]
    reaction_nodes: tuple[str, ...]
    edges: frozenset[SREdge]
    cases: dict = field(compare=False)  # (reaction id, species id) -> Case

    def has_edge(self, source: tuple[str, int], target: tuple[str, int]) -> bool:
        return any(e.source == source and e.target == target for e in self.edges)

    def sorted_edges(self) -> list[SREdge]:
        def key(e: SREdge):
            s, t = e.source, e.target
            return (s[0] != "species", s[1], t[1])

        return sorted(self.edges, key=key)


def _cases_from_signs(signs: SignStructure) -> dict[tuple[int, int], Case]:
    gamma, dr = signs.gamma, signs.dr_sign
    out = {}
    r, s = dr.shape
    for i in range(r):
        for j in range(s):
            d, g = dr[i, j] != 0, gamma[j, i] != 0
            if d and g:
                out[(i, j)] = Case.C3
            elif d:
                out[(i, j)] = Case.C1
            elif g:
                out[(i, j)] = Case.C2
    return out


def build_sr_graph(network: Network) -> SRGraph:
    signs = build_sign_structure(network)
    cases = _cases_from_signs(signs)
    edges = set()
    for (i, j), case in cases.items():
        if signs.gamma[j, i] != 0:
            edges.add(SREdge(("reaction", i), ("species", j), case))
        if signs.dr_sign[i, j] != 0:
            edges.add(SREdge(("species", j), ("reaction", i), case))
    return SRGraph(
        species_nodes=tuple(network.species_names),
        reaction_nodes=tuple(network.reaction_names),
        edges=frozenset(edges),
        cases=cases,
    )


# --------------------------------------------------------------------------
# R-graph


@dataclass(frozen=True)
class REdge:
    i: int
    k: int  # i < k
    sign: int  # +1 (E+) or -1 (E-)
    witnesses: tuple[int, ...]  # species inducing the edge

    @property
    def witness(self) -> int:
        return self.witnesses[0]


@dataclass(frozen=True)
class RGraph:
    nodes: tuple[str, ...]
    pos_edges: tuple[REdge, ...]
    neg_edges: tuple[REdge, ...]
    signs: SignStructure = field(compare=False, repr=False)
    species_names: tuple[str, ...] = field(default=(), compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> tuple[REdge, ...]:
        return tuple(sorted(self.pos_edges + self.neg_edges, key=lambda e: (e.i, e.k, -e.sign)))

    def edge_signs(self, i: int, k: int) -> set[int]:
        a, b = min(i, k), max(i, k)
        return {e.sign for e in self.edges if (e.i, e.k) == (a, b)}


def _r_graph_from_signs(signs: SignStructure, nodes, species_names=()) -> RGraph:
    gamma, dr = signs.gamma, signs.dr_sign
    r = dr.shape[0]
    # prod[i, j, k] = dr[i, j] * gamma[j, k]
    prod = dr[:, :, None] * gamma[None, :, :]
    found: dict[tuple[int, int, int], list[int]] = {}
    for i, j, k in zip(*np.nonzero(prod)):
        if i == k:
            continue
        sgn = 1 if prod[i, j, k] > 0 else -1
        key = (min(i, k), max(i, k), sgn)
        wl = found.setdefault(key, [])
        if j not in wl:
            wl.append(int(j))
    pos, neg = [], []
    for (a, b, sgn), wl in sorted(found.items()):
        e = REdge(int(a), int(b), sgn, tuple(sorted(wl)))
        (pos if sgn > 0 else neg).append(e)
    assert len(nodes) == r
    return RGraph(tuple(nodes), tuple(pos), tuple(neg), signs, tuple(species_names))


def build_r_graph(network: Network) -> RGraph:
    return _r_graph_from_signs(build_sign_structure(network), network.reaction_names, network.species_names)


# --------------------------------------------------------------------------
# Rule of 2


@dataclass(frozen=True)
class RuleOfTwo:
    counts: dict[int, int]  # species id -> n(S_j)
    cases: dict[int, dict[Case, list[int]]]  # species id -> case -> reaction ids

    @property
    def violations(self) -> list[int]:
        return sorted(j for j, n in self.counts.items() if n > 2)

    @property
    def passed(self) -> bool:
        return not self.violations


def rule_of_two(network: Network) -> RuleOfTwo:
    signs = build_sign_structure(network)
    cases = _cases_from_signs(signs)
    per: dict[int, dict[Case, list[int]]] = {j: {c: [] for c in Case} for j in range(network.n_species)}
    for (i, j), c in sorted(cases.items()):
        per[j][c].append(i)
    counts = {
        j: len(d[Case.C3]) + (1 if d[Case.C1] else 0) + (1 if d[Case.C2] else 0) for j, d in per.items()
    }
    return RuleOfTwo(counts, per)


# --------------------------------------------------------------------------
# consistent labeling


@dataclass(frozen=True)
class Labeling:
    sigma: tuple[int, ...]  # indexed by reaction id

    def __getitem__(self, i: int) -> int:
        return self.sigma[i]

    def __len__(self) -> int:
        return len(self.sigma)


@dataclass(frozen=True)
class OddCycle:
    """A closed walk in the R-graph with an odd number of negative edges."""

    edges: tuple[REdge, ...]  # in traversal order
    nodes: tuple[int, ...]  # nodes[0] -> nodes[1] -> ... -> nodes[0]

    @property
    def negative_count(self) -> int:
        return sum(1 for e in self.edges if e.sign < 0)

    def verify(self, rg: RGraph) -> bool:
        if not self.edges or self.negative_count % 2 == 0:
            return False
        all_edges = set(rg.edges)
        if any(e not in all_edges for e in self.edges):
            return False
        n = len(self.nodes)
        for step, e in enumerate(self.edges):
            a, b = self.nodes[step], self.nodes[(step + 1) % n]
            if {a, b} != {e.i, e.k}:
                return False
        return True


def find_consistent_labeling(rg: RGraph) -> Labeling | OddCycle:
    """Breadth-first sign propagation; returns a labeling or an odd cycle."""
    by_pair: dict[tuple[int, int], dict[int, REdge]] = {}
    for e in rg.edges:
        by_pair.setdefault((e.i, e.k), {})[e.sign] = e
    for (a, b), d in sorted(by_pair.items()):
        if len(d) == 2:
            return OddCycle(edges=(d[1], d[-1]), nodes=(a, b))

    adj: dict[int, list[tuple[int, REdge]]] = {v: [] for v in range(rg.n)}
    for (a, b), d in sorted(by_pair.items()):
        (e,) = d.values()
        adj[a].append((b, e))
        adj[b].append((a, e))

    sigma = [0] * rg.n
    parent: dict[int, tuple[int, REdge] | None] = {}
    depth = [0] * rg.n
    for root in range(rg.n):
        if sigma[root]:
            continue
        sigma[root] = 1
        parent[root] = None
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, e in adj[u]:
                want = sigma[u] * e.sign
                if not sigma[v]:
                    sigma[v] = want
                    parent[v] = (u, e)
                    depth[v] = depth[u] + 1
                    queue.append(v)
                elif sigma[v] != want:
                    return _cycle_through(u, v, e, parent, depth)
    return Labeling(tuple(sigma))


def _cycle_through(u, v, e_uv, parent, depth) -> OddCycle:
    # walk both endpoints up the BFS tree to their common ancestor
    left_nodes, left_edges = [u], []
    right_nodes, right_edges = [v], []
    a, b = u, v
    while depth[a] > depth[b]:
        p, e = parent[a]
        left_edges.append(e)
        left_nodes.append(p)
        a = p
    while depth[b] > depth[a]:
        p, e = parent[b]
        right_edges.append(e)
        right_nodes.append(p)
        b = p
    while a != b:
        pa, ea = parent[a]
        pb, eb = parent[b]
        left_edges.append(ea)
        left_nodes.append(pa)
        right_edges.append(eb)
        right_nodes.append(pb)
        a, b = pa, pb
    # cycle: lca -> ... -> u -> v -> ... -> lca
    nodes = list(reversed(left_nodes)) + right_nodes[:-1]
    edges = list(reversed(left_edges)) + [e_uv] + right_edges
    return OddCycle(edges=tuple(edges), nodes=tuple(nodes))


def verify_labeling(network: Network, sigma: Labeling | tuple[int, ...]) -> bool:
    """True iff sigma(i) * DR_ij * Gamma_jk * sigma(k) >= 0 for all i != k and all j."""
    signs = build_sign_structure(network)
    return _labeling_ok(signs, np.asarray(tuple(sigma), dtype=np.int64))


def _labeling_ok(signs: SignStructure, sig: np.ndarray) -> bool:
    r = signs.dr_sign.shape[0]
    if sig.shape != (r,) or not np.all(np.abs(sig) == 1):
        raise ValueError(f"labeling must assign +1 or -1 to each of the {r} reactions")
    terms = sig[:, None, None] * signs.dr_sign[:, :, None] * signs.gamma[None, :, :] * sig[None, None, :]
    idx = np.arange(r)
    terms[idx, :, idx] = 0  # the condition only constrains pairs i != k
    return bool(np.all(terms >= 0))


def brute_force_labeling(rg: RGraph) -> Labeling | None:
    """Exhaustive search over all sign assignments, checked termwise.

    Candidates are ordered lexicographically with +1 before -1, first
    reaction most significant, so the all-positive labeling is tried first.
    The check uses the sign matrices directly, not the R-graph edges.
    """
    n = rg.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} reactions, got {n}")
    if n == 0:
        return Labeling(())
    dr, gamma = rg.signs.dr_sign, rg.signs.gamma
    # every nonzero term dr[i,j]*gamma[j,k] (i != k) demands sigma_i*sigma_k == its sign
    need = []
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            for j in range(dr.shape[1]):
                t = dr[i, j] * gamma[j, k]
                if t:
                    need.append((i, k, 1 if t > 0 else -1))
    if not need:
        return Labeling((1,) * n)
    ii = np.array([c[0] for c in need])
    kk = np.array([c[1] for c in need])
    ss = np.array([c[2] for c in need])
    chunk = 1 << 14
    bits = np.arange(n - 1, -1, -1)
    for start in range(0, 1 << n, chunk):
        m = np.arange(start, min(start + chunk, 1 << n))
        sig = 1 - 2 * ((m[:, None] >> bits[None, :]) & 1)
        ok = np.all(sig[:, ii] * sig[:, kk] == ss[None, :], axis=1)
        hit = np.flatnonzero(ok)
        if hit.size:
            return Labeling(tuple(int(v) for v in sig[hit[0]]))
    return None


# --------------------------------------------------------------------------
# augmentation, orientation, verdict


def _fresh_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def augment(network: Network, input: int, output: int) -> Network:
    """Append the source reaction 0 -> input and the promoter-only reaction for output."""
    s = network.n_species
    if not (0 <= input < s and 0 <= output < s):
        raise NetworkError(f"unknown species id in augment(input={input}, output={output})")
    if input == output:
        raise NetworkError("input and output species must be distinct")
    taken = set(network.reaction_names)
    r = network.n_reactions
    r_in = Reaction(r, _fresh_name(IN_NAME, taken), {}, {input: 1}, dummy=True)
    taken.add(r_in.name)
    r_out = Reaction(r + 1, _fresh_name(OUT_NAME, taken), {}, {}, promoters=frozenset({output}), dummy=True)
    return network.with_reactions(network.reactions + (r_in, r_out))


def flip_orientation(network: Network, reaction: int) -> Network:
    """Swap the two sides (and the two rate constants) of a reversible reaction."""
    rx = network.reactions[reaction]
    if not rx.reversible:
        raise NetworkError(f"{rx.name} is irreversible and cannot be reoriented")
    flipped = replace(
        rx,
        reactants=dict(rx.products),
        products=dict(rx.reactants),
        promoters=rx.reverse_promoters,
        reverse_promoters=rx.promoters,
        k_fwd=rx.k_bwd,
        k_bwd=rx.k_fwd,
    )
    rxns = list(network.reactions)
    rxns[reaction] = flipped
    return network.with_reactions(rxns)


class VerdictKind(enum.Enum):
    POSITIVE = "PositivelyMonotonic"
    NEGATIVE = "NegativelyMonotonic"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    input: int
    output: int
    augmented: Network = field(repr=False)
    r_graph: RGraph = field(repr=False)
    labeling: Labeling | None = None
    certificate: OddCycle | None = None
    rule_of_two: RuleOfTwo | None = field(default=None, repr=False)
    disconnected: bool = False

    @property
    def in_id(self) -> int:
        return self.augmented.n_reactions - 2

    @property
    def out_id(self) -> int:
        return self.augmented.n_reactions - 1

    @property
    def sign_product(self) -> int | None:
        if self.labeling is None:
            return None
        return self.labeling[self.in_id] * self.labeling[self.out_id]

    @property
    def rule_of_two_witnesses(self) -> list[int]:
        return self.rule_of_two.violations if self.rule_of_two else []


def _components(rg: RGraph) -> list[int]:
    comp = list(range(rg.n))

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    for e in rg.edges:
        a, b = find(e.i), find(e.k)
        if a != b:
            comp[max(a, b)] = min(a, b)
    return [find(v) for v in range(rg.n)]


def check_io_monotonicity(network: Network, input: int, output: int) -> Verdict:
    if input == output:
        raise NetworkError("input and output species must be distinct")
    aug = augment(network, input, output)
    rg = build_r_graph(aug)
    r2 = rule_of_two(aug)
    found = find_consistent_labeling(rg)
    if isinstance(found, OddCycle):
        return Verdict(VerdictKind.INCONCLUSIVE, input, output, aug, rg, certificate=found, rule_of_two=r2)

    comp = _components(rg)
    i_in, i_out = aug.n_reactions - 2, aug.n_reactions - 1
    sigma = list(found.sigma)
    disconnected = comp[i_in] != comp[i_out]
    # negating a whole component keeps the labeling consistent
    for anchor in (i_in, i_out) if disconnected else (i_in,):
        if sigma[anchor] < 0:
            c = comp[anchor]
            sigma = [-v if comp[idx] == c else v for idx, v in enumerate(sigma)]
    labeling = Labeling(tuple(sigma))
    kind = VerdictKind.POSITIVE if sigma[i_in] * sigma[i_out] > 0 else VerdictKind.NEGATIVE
    return Verdict(kind, input, output, aug, rg, labeling=labeling, rule_of_two=r2, disconnected=disconnected)


# --------------------------------------------------------------------------
# DOT export


def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: SRGraph | RGraph, labeling: Labeling | None = None) -> str:
    if isinstance(graph, SRGraph):
        lines = ["digraph SR {"]
        for name in graph.species_nodes:
            lines.append(f"  {_q(name)} [shape=ellipse];")
        for name in graph.reaction_nodes:
            lines.append(f"  {_q(name)} [shape=box];")
        for e in graph.sorted_edges():
            src = graph.species_nodes[e.source[1]] if e.source[0] == "species" else graph.reaction_nodes[e.source[1]]
            dst = graph.species_nodes[e.target[1]] if e.target[0] == "species" else graph.reaction_nodes[e.target[1]]
            lines.append(f"  {_q(src)} -> {_q(dst)} [case={e.case.value}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    lines = ["graph R {"]
    for idx, name in enumerate(graph.nodes):
        attrs = "shape=box"
        if labeling is not None:
            attrs += f', xlabel="{"+" if labeling[idx] > 0 else "-"}1"'
        lines.append(f"  {_q(name)} [{attrs}];")
    for e in graph.edges:
        a, b = graph.nodes[e.i], graph.nodes[e.k]
        wit = ",".join(graph.species_names[j] for j in e.witnesses) if graph.species_names else ""
        if e.sign > 0:
            style = 'style=solid, label="+"'
        else:
            style = 'style=dashed, label="−"'
        extra = f', witness="{wit}"' if wit else ""
        lines.append(f"  {_q(a)} -- {_q(b)} [{style}{extra}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "Case",
    "Labeling",
    "OddCycle",
    "REdge",
    "RGraph",
    "RuleOfTwo",
    "SREdge",
    "SRGraph",
    "Verdict",
    "VerdictKind",
    "augment",
    "brute_force_labeling",
    "build_r_graph",
    "build_sr_graph",
    "check_io_monotonicity",
    "find_consistent_labeling",
    "flip_orientation",
    "rule_of_two",
    "to_dot",
    "verify_labeling",
]
