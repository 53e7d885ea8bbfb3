from pathlib import Path

import numpy as np
import pytest

from crnmono import Network, Reaction, Species, parse_file

FIXTURES = Path(__file__).parent / "fixtures"


def load(name):
    return parse_file(FIXTURES / f"{name}.crn")


@pytest.fixture
def michaelis():
    return load("michaelis")


@pytest.fixture
def erk():
    return load("erk")


@pytest.fixture
def network3():
    return load("network3")


@pytest.fixture
def competing():
    return load("competing")


def random_network(rng, max_reactions=8, max_species=6, p_rev=0.4, p_prom=0.25, min_reversible=0, max_side=2):
    """Random valid mass-action network; every species takes part in some reaction."""
    while True:
        s = int(rng.integers(2, max_species + 1))
        r = int(rng.integers(1, max_reactions + 1))
        rxns = []
        for i in range(r):
            pool = list(rng.permutation(s))
            n_re = int(rng.integers(0, max_side + 1))
            n_pr = int(rng.integers(0 if n_re else 1, max_side + 1))
            reac = {int(j): int(rng.integers(1, 3)) for j in pool[:n_re]}
            prod = {int(j): int(rng.integers(1, 3)) for j in pool[n_re : n_re + n_pr]}
            rest = pool[n_re + n_pr :]
            rev = bool(rng.random() < p_rev) or i < min_reversible
            proms, rproms = set(), set()
            if rest and rng.random() < p_prom:
                j = int(rest[0])
                if rev and rng.random() < 0.5:
                    rproms.add(j)
                else:
                    proms.add(j)
            rxns.append(
                Reaction(
                    i,
                    f"R{i + 1}",
                    reac,
                    prod,
                    promoters=frozenset(proms),
                    reverse_promoters=frozenset(rproms),
                    reversible=rev,
                    k_fwd=float(rng.uniform(0.1, 2.0)),
                    k_bwd=float(rng.uniform(0.1, 2.0)) if rev else None,
                )
            )
        used = set()
        for rx in rxns:
            used |= rx.species_ids
        if used != set(range(s)):
            continue
        species = tuple(Species(j, f"S{j}") for j in range(s))
        init = tuple(float(v) for v in rng.uniform(0.0, 2.0, s))
        return Network(species, tuple(rxns), init)


def mixed_network(rng, **kwargs):
    """Alternate dense and sparse draws so both verdict branches are well represented."""
    if rng.random() < 0.5:
        return random_network(rng, **kwargs)
    kwargs.setdefault("max_reactions", 6)
    return random_network(rng, max_species=9, max_side=1, p_prom=0.1, p_rev=0.2, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20201)


_CRITERIA: dict[int, str] = {}


class Criterion:
    """Collects the checks of one acceptance criterion and reports a single line."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, ok, message: str) -> None:
        if not ok:
            self.failures.append(message)

    def note(self, message: str) -> None:
        self.notes.append(message)

    def line(self) -> str:
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures + self.notes)
        return f"{status} criterion {self.number:2d}: {self.title}" + (f" ({detail})" if detail else "")


@pytest.fixture
def criterion(request):
    made = []

    def make(number, title):
        c = Criterion(number, title)
        made.append(c)
        return c

    yield make
    for c in made:
        _CRITERIA[c.number] = c.line()
        print("\n" + c.line())


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
