"""Domain model of a chemical reaction network under mass-action kinetics.

A :class:`Network` is an immutable bundle of :class:`Species`, :class:`Reaction`
and initial concentrations.  From it we derive the integer stoichiometric
matrix ``gamma`` (species x reactions) and the sign pattern of the rate
Jacobian ``dr_sign`` (reactions x species), which is all the structural
analysis in :mod:`crnmono.graphs` ever looks at.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np


class NetworkError(ValueError):
    """Raised when a network or reaction violates a structural invariant."""


@dataclass(frozen=True)
class Species:
    id: int
    name: str


def _coeff_map(raw: Mapping[int, int], what: str, rname: str) -> dict[int, int]:
    out = {}
    for sid, c in sorted(raw.items()):
        if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
            raise NetworkError(f"{rname}: {what} coefficient of species {sid} must be an integer, got {c!r}")
        if c <= 0:
            raise NetworkError(f"{rname}: {what} coefficient of species {sid} must be positive, got {c}")
        out[int(sid)] = int(c)
    return out


@dataclass(frozen=True)
class Reaction:
    """One (possibly reversible) mass-action reaction.

    ``promoters`` multiply the forward rate with exponent 1.
    ``reverse_promoters`` multiply the backward rate of a reversible reaction;
    they arise when a reaction carrying promoters is written (or flipped) in
    the opposite orientation.  ``dummy`` marks the auxiliary reactions added
    by :func:`crnmono.graphs.augment`; simulation skips them.
    """

    id: int
    name: str
    reactants: Mapping[int, int]
    products: Mapping[int, int]
    promoters: frozenset[int] = frozenset()
    reversible: bool = False
    k_fwd: float = 1.0
    k_bwd: float | None = None
    reverse_promoters: frozenset[int] = frozenset()
    dummy: bool = False

    def __post_init__(self) -> None:
        name = self.name
        object.__setattr__(self, "reactants", _coeff_map(self.reactants, "reactant", name))
        object.__setattr__(self, "products", _coeff_map(self.products, "product", name))
        object.__setattr__(self, "promoters", frozenset(int(j) for j in self.promoters))
        object.__setattr__(self, "reverse_promoters", frozenset(int(j) for j in self.reverse_promoters))

        if not (np.isfinite(self.k_fwd) and self.k_fwd > 0):
            raise NetworkError(f"{name}: forward rate constant must be positive, got {self.k_fwd}")
        if self.reversible:
            if self.k_bwd is None or not (np.isfinite(self.k_bwd) and self.k_bwd > 0):
                raise NetworkError(f"{name}: reversible reaction needs a positive backward rate constant")
        else:
            if self.k_bwd is not None:
                raise NetworkError(f"{name}: backward rate constant given for an irreversible reaction")
            if self.reverse_promoters:
                raise NetworkError(f"{name}: only reversible reactions may promote their backward rate")

        involved = set(self.reactants) | set(self.products)
        for group in (self.promoters, self.reverse_promoters):
            clash = group & involved
            if clash:
                raise NetworkError(
                    f"{name}: species {sorted(clash)} cannot be both a promoter and a reactant/product"
                )
        both = self.promoters & self.reverse_promoters
        if both:
            # k_f [X]... - k_b [X]... has no constant sign in X
            raise NetworkError(f"{name}: species {sorted(both)} promotes both directions of a reversible reaction")

        for sid in set(self.reactants) & set(self.products):
            a, b = self.reactants[sid], self.products[sid]
            if a == b:
                raise NetworkError(
                    f"{name}: species {sid} appears with equal coefficient on both sides; "
                    "declare it as a promoter instead"
                )
            if self.reversible:
                raise NetworkError(
                    f"{name}: species {sid} appears on both sides of a reversible reaction, "
                    "its rate dependence has no constant sign"
                )
            if b > a:
                raise NetworkError(
                    f"{name}: species {sid} is a reactant with net production (autocatalysis); "
                    "the rate would increase with a species it produces"
                )

    @property
    def species_ids(self) -> frozenset[int]:
        return frozenset(self.reactants) | frozenset(self.products) | self.promoters | self.reverse_promoters


@dataclass(frozen=True)
class Network:
    species: tuple[Species, ...] = ()
    reactions: tuple[Reaction, ...] = ()
    initial: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        s = len(self.species)
        init = tuple(float(v) for v in self.initial) if self.initial else (0.0,) * s
        object.__setattr__(self, "initial", init)

        names = set()
        for idx, sp in enumerate(self.species):
            if sp.id != idx:
                raise NetworkError(f"species ids must be contiguous from 0; {sp.name!r} has id {sp.id}")
            if sp.name in names:
                raise NetworkError(f"duplicate species name {sp.name!r}")
            names.add(sp.name)
        rnames = set()
        for idx, rx in enumerate(self.reactions):
            if rx.id != idx:
                raise NetworkError(f"reaction ids must be contiguous from 0; {rx.name!r} has id {rx.id}")
            if rx.name in rnames:
                raise NetworkError(f"duplicate reaction name {rx.name!r}")
            rnames.add(rx.name)
            bad = [j for j in rx.species_ids if not 0 <= j < s]
            if bad:
                raise NetworkError(f"{rx.name}: unknown species ids {sorted(bad)}")
        if len(init) != s:
            raise NetworkError(f"expected {s} initial concentrations, got {len(init)}")
        if any(not np.isfinite(v) or v < 0 for v in init):
            raise NetworkError("initial concentrations must be finite and non-negative")

    @classmethod
    def from_reactions(
        cls,
        reactions: Iterable[tuple],
        initial: Mapping[str, float] | None = None,
        species: Sequence[str] | None = None,
    ) -> "Network":
        """Build a network from name-based reaction tuples.

        Each tuple is ``(name, reactants, products)`` optionally followed by
        keyword-style dict ``{"reversible":..., "k_fwd":..., "k_bwd":...,
        "promoters": [...], "reverse_promoters": [...]}``.  Species are
        indexed in order of first mention unless ``species`` is given.
        """
        order: dict[str, int] = {}
        for n in species or ():
            order.setdefault(n, len(order))
        specs = []
        for item in reactions:
            name, lhs, rhs, *rest = item
            opts = dict(rest[0]) if rest else {}
            for n in list(lhs) + list(opts.get("promoters", ())) + list(rhs) + list(opts.get("reverse_promoters", ())):
                order.setdefault(n, len(order))
            specs.append((name, lhs, rhs, opts))
        rxns = []
        for i, (name, lhs, rhs, opts) in enumerate(specs):
            rxns.append(
                Reaction(
                    id=i,
                    name=name,
                    reactants={order[n]: c for n, c in dict(lhs).items()},
                    products={order[n]: c for n, c in dict(rhs).items()},
                    promoters=frozenset(order[n] for n in opts.get("promoters", ())),
                    reverse_promoters=frozenset(order[n] for n in opts.get("reverse_promoters", ())),
                    reversible=opts.get("reversible", False),
                    k_fwd=opts.get("k_fwd", 1.0),
                    k_bwd=opts.get("k_bwd", 1.0 if opts.get("reversible") else None),
                )
            )
        sp = tuple(Species(i, n) for n, i in order.items())
        init = [0.0] * len(sp)
        for n, v in (initial or {}).items():
            if n not in order:
                raise NetworkError(f"initial concentration for unknown species {n!r}")
            init[order[n]] = float(v)
        return cls(sp, tuple(rxns), tuple(init))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @property
    def species_names(self) -> list[str]:
        return [s.name for s in self.species]

    @property
    def reaction_names(self) -> list[str]:
        return [r.name for r in self.reactions]

    def species_id(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.id
        raise KeyError(f"unknown species {name!r}")

    def reaction_id(self, name: str) -> int:
        for r in self.reactions:
            if r.name == name:
                return r.id
        raise KeyError(f"unknown reaction {name!r}")

    def initial_vector(self) -> np.ndarray:
        return np.array(self.initial, dtype=float)

    def with_initial(self, values: Mapping[int, float] | Sequence[float]) -> "Network":
        if isinstance(values, Mapping):
            init = list(self.initial)
            for j, v in values.items():
                init[j] = float(v)
        else:
            init = [float(v) for v in values]
        return replace(self, initial=tuple(init))

    def with_reactions(self, reactions: Sequence[Reaction]) -> "Network":
        return replace(self, reactions=tuple(reactions))


@dataclass(frozen=True)
class SignStructure:
    gamma: np.ndarray  # (s, r) integer
    dr_sign: np.ndarray  # (r, s) in {-1, 0, 1}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignStructure):
            return NotImplemented
        return np.array_equal(self.gamma, other.gamma) and np.array_equal(self.dr_sign, other.dr_sign)

    __hash__ = None  # type: ignore[assignment]


def build_sign_structure(network: Network) -> SignStructure:
    s, r = network.n_species, network.n_reactions
    gamma = np.zeros((s, r), dtype=np.int64)
    dr = np.zeros((r, s), dtype=np.int64)
    for rx in network.reactions:
        i = rx.id
        for j, a in rx.reactants.items():
            gamma[j, i] -= a
        for j, b in rx.products.items():
            gamma[j, i] += b
        for j in rx.reactants:
            dr[i, j] = 1
        for j in rx.promoters:
            dr[i, j] = 1
        if rx.reversible:
            for j in rx.products:
                dr[i, j] = -1
            for j in rx.reverse_promoters:
                dr[i, j] = -1
    # the rate of a reaction never increases with a species it produces
    assert np.all(dr * gamma.T <= 0), "sign assumption DR_ij * Gamma_ji <= 0 violated"
    gamma.setflags(write=False)
    dr.setflags(write=False)
    return SignStructure(gamma=gamma, dr_sign=dr)


def _check_conc(network: Network, conc) -> np.ndarray:
    x = np.asarray(conc, dtype=float)
    if x.shape != (network.n_species,):
        raise ValueError(f"expected a concentration vector of length {network.n_species}, got shape {x.shape}")
    return x


def rate_vector(network: Network, conc) -> np.ndarray:
    """Mass-action rate of every reaction at concentration ``conc``."""
    x = _check_conc(network, conc)
    out = np.empty(network.n_reactions)
    for rx in network.reactions:
        v = rx.k_fwd
        for j, a in rx.reactants.items():
            v *= x[j] ** a
        for j in rx.promoters:
            v *= x[j]
        if rx.reversible:
            w = rx.k_bwd
            for j, b in rx.products.items():
                w *= x[j] ** b
            for j in rx.reverse_promoters:
                w *= x[j]
            v -= w
        out[rx.id] = v
    return out


def species_derivatives(network: Network, conc) -> np.ndarray:
    gamma = build_sign_structure(network).gamma
    return gamma @ rate_vector(network, conc)


def conservation_laws(network: Network) -> np.ndarray:
    """Integer basis of the left null space of the stoichiometric matrix.

    Rows ``w`` satisfy ``w @ gamma == 0``; computed by exact rational
    elimination and scaled to primitive integer vectors.
    """
    gamma = build_sign_structure(network).gamma
    s, r = gamma.shape
    # row-reduce gamma^T (r x s); its null space is the left null space of gamma
    m = [[Fraction(int(gamma[j, i])) for j in range(s)] for i in range(r)]
    pivots: list[int] = []
    row = 0
    for col in range(s):
        piv = next((k for k in range(row, r) if m[k][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        p = m[row][col]
        m[row] = [v / p for v in m[row]]
        for k in range(r):
            if k != row and m[k][col] != 0:
                f = m[k][col]
                m[k] = [a - f * b for a, b in zip(m[k], m[row])]
        pivots.append(col)
        row += 1
        if row == r:
            break
    free = [c for c in range(s) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * s
        vec[fc] = Fraction(1)
        for k, pc in enumerate(pivots):
            vec[pc] = -m[k][fc]
        den = lcm(*[v.denominator for v in vec])
        ints = [int(v * den) for v in vec]
        g = np.gcd.reduce([abs(v) for v in ints if v]) if any(ints) else 1
        if next(v for v in ints if v) < 0:
            g = -g
        basis.append([v // g for v in ints])
    return np.array(basis, dtype=np.int64).reshape(len(basis), s)
