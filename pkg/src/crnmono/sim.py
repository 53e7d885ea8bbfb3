"""Mass-action simulation, steady-state detection and input sweeps.

Integration uses an embedded Dormand-Prince 5(4) pair with Shampine's dense
output, compiled with numba (see :mod:`crnmono._dopri`).  Every trajectory is
sampled on a uniform grid so that trajectories from a sweep can be compared
pointwise in time.
"""

from __future__ import annotations

import csv
import enum
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _dopri
from .core import Network, NetworkError


class SimulationError(RuntimeError):
    def __init__(self, message: str, time: float | None = None):
        super().__init__(message if time is None else f"{message} (t = {time:.17g})")
        self.time = time


class SweepError(RuntimeError):
    def __init__(self, value: float, cause: Exception):
        super().__init__(f"simulation failed for input value {value:.17g}: {cause}")
        self.value = value
        self.cause = cause


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 100.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 50_000_000
    ss_window: float | None = None  # defaults to 10% of t_end
    ss_tol: float = 1e-6
    n_grid: int = 1001
    keep_steps: bool = False

    def __post_init__(self) -> None:
        if self.ss_window is None:
            object.__setattr__(self, "ss_window", 0.1 * self.t_end)
        for name in ("t_end", "rel_tol", "abs_tol", "max_steps", "ss_window", "ss_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SimConfig.{name} must be positive")
        if self.rel_tol < 1e-12:
            raise ValueError("SimConfig.rel_tol must be at least 1e-12")
        if not self.ss_window < self.t_end:
            raise ValueError("SimConfig.ss_window must be shorter than t_end")
        if self.n_grid < 2:
            raise ValueError("SimConfig.n_grid must be at least 2")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_grid)


@dataclass(frozen=True)
class SteadyState:
    converged: bool
    state: np.ndarray
    max_change: float  # largest absolute change over the trailing window
    threshold: float


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n_species)
    species: tuple[str, ...]
    grid_mask: np.ndarray = field(repr=False)  # True where times[i] is a uniform-grid point
    n_steps: int = 0
    steady_state: SteadyState | None = None

    @property
    def grid_times(self) -> np.ndarray:
        return self.times[self.grid_mask]

    @property
    def grid_states(self) -> np.ndarray:
        return self.states[self.grid_mask]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def species_series(self, j: int, grid_only: bool = True) -> np.ndarray:
        return (self.grid_states if grid_only else self.states)[:, j]


def _kernel_arrays(network: Network):
    live = [rx for rx in network.reactions if not rx.dummy]
    kf = np.array([rx.k_fwd for rx in live], dtype=float)
    kb = np.array([rx.k_bwd if rx.reversible else 0.0 for rx in live], dtype=float)
    rev = np.array([rx.reversible for rx in live], dtype=np.bool_)

    def csr(rows):
        ptr = [0]
        idx, val = [], []
        for row in rows:
            for j, v in row:
                idx.append(j)
                val.append(v)
            ptr.append(len(idx))
        return np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64), val

    fptr, fsp, fexp = csr(
        [sorted(rx.reactants.items()) + [(j, 1) for j in sorted(rx.promoters)] for rx in live]
    )
    bptr, bsp, bexp = csr(
        [
            (sorted(rx.products.items()) + [(j, 1) for j in sorted(rx.reverse_promoters)]) if rx.reversible else []
            for rx in live
        ]
    )
    net_rows = []
    for rx in live:
        delta: dict[int, int] = {}
        for j, a in rx.reactants.items():
            delta[j] = delta.get(j, 0) - a
        for j, b in rx.products.items():
            delta[j] = delta.get(j, 0) + b
        net_rows.append(sorted((j, d) for j, d in delta.items() if d))
    gptr, gsp, gval = csr(net_rows)
    return (
        kf,
        kb,
        rev,
        fptr,
        fsp,
        np.array(fexp, dtype=np.int64),
        bptr,
        bsp,
        np.array(bexp, dtype=np.int64),
        gptr,
        gsp,
        np.array(gval, dtype=float),
    )


def simulate(network: Network, init=None, cfg: SimConfig | None = None) -> Trajectory:
    """Integrate the mass-action ODEs from ``init`` (default: the network's initial state)."""
    cfg = cfg or SimConfig()
    y0 = network.initial_vector() if init is None else np.asarray(init, dtype=float).copy()
    if y0.shape != (network.n_species,):
        raise ValueError(f"expected {network.n_species} initial concentrations, got shape {y0.shape}")
    if not np.all(np.isfinite(y0)) or np.any(y0 < 0):
        raise ValueError("initial concentrations must be finite and non-negative")

    grid = cfg.grid
    status, t_fail, grid_states, n_steps, st, ss = _dopri.integrate(
        y0, float(cfg.t_end), grid, cfg.rel_tol, cfg.abs_tol, int(cfg.max_steps), cfg.keep_steps,
        *_kernel_arrays(network),
    )
    if status == _dopri.MAX_STEPS:
        raise SimulationError(f"max_steps={cfg.max_steps} exceeded", t_fail)
    if status == _dopri.NON_FINITE:
        raise SimulationError("non-finite state", t_fail)
    if status == _dopri.STEP_UNDERFLOW:
        raise SimulationError("step size underflow", t_fail)

    grid_states[0] = y0
    if cfg.keep_steps and len(st):
        times = np.concatenate([grid, st])
        states = np.vstack([grid_states, ss])
        mask = np.concatenate([np.ones(len(grid), bool), np.zeros(len(st), bool)])
        order = np.argsort(times, kind="stable")
        times, states, mask = times[order], states[order], mask[order]
        # drop step endpoints that coincide with grid points
        keep = np.ones(len(times), bool)
        keep[1:] = ~((np.diff(times) == 0) & ~mask[1:])
        times, states, mask = times[keep], states[keep], mask[keep]
    else:
        times, states, mask = grid, grid_states, np.ones(len(grid), bool)

    traj = Trajectory(times, states, tuple(network.species_names), mask, int(n_steps))
    ss_result = detect_steady_state(traj, cfg)
    return Trajectory(times, states, traj.species, mask, int(n_steps), ss_result)


def detect_steady_state(traj: Trajectory, cfg: SimConfig) -> SteadyState:
    """Trailing-window convergence test.

    Converged iff every species moves by at most ``ss_tol`` times the
    largest concentration reached anywhere on the trajectory during the last
    ``ss_window`` time units.
    """
    t = traj.times
    if t[-1] - t[0] < cfg.ss_window:
        raise ValueError(f"trajectory covers {t[-1] - t[0]:g} time units, shorter than ss_window={cfg.ss_window:g}")
    final = traj.states[-1]
    if traj.states.shape[1] == 0:
        return SteadyState(True, final.copy(), 0.0, 0.0)
    tail = traj.states[t >= t[-1] - cfg.ss_window]
    change = float(np.max(np.abs(tail - final)))
    scale = max(float(np.max(np.abs(traj.states))), cfg.abs_tol)
    threshold = cfg.ss_tol * scale
    return SteadyState(change <= threshold, final.copy(), change, threshold)


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class DominanceReport:
    """Pointwise ordering of the output between adjacent sweep trajectories.

    ``worst_positive`` is the largest amount by which a higher-input
    trajectory falls below its lower-input neighbour (0 when the positive
    ordering holds exactly); ``worst_negative`` the mirror quantity.
    """

    tol: float
    worst_positive: float
    worst_negative: float
    positive_at: tuple[int, float] | None  # (pair index, time) of worst_positive
    negative_at: tuple[int, float] | None

    @property
    def positive(self) -> bool:
        return self.worst_positive <= self.tol

    @property
    def negative(self) -> bool:
        return self.worst_negative <= self.tol


@dataclass(frozen=True)
class SweepResult:
    input_values: tuple[float, ...]
    output_at_ss: tuple[float, ...]
    converged: tuple[bool, ...]
    dominance_report: DominanceReport
    trajectories: tuple[Trajectory, ...] | None = field(default=None, repr=False)
    input: int = 0
    output: int = 0


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("CRN_MONO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


def dominance(trajectories: Sequence[Trajectory], output: int, tol: float | None = None, ss_tol: float = 1e-6) -> DominanceReport:
    series = [tr.species_series(output) for tr in trajectories]
    if tol is None:
        scale = max((float(np.max(np.abs(s))) for s in series if s.size), default=0.0)
        tol = ss_tol * scale
    grid = trajectories[0].grid_times if trajectories else np.zeros(0)
    worst_p, worst_n = 0.0, 0.0
    at_p = at_n = None
    for idx in range(len(series) - 1):
        lo, hi = series[idx], series[idx + 1]
        gap = lo - hi  # > 0 means the higher input gives less output
        k = int(np.argmax(gap))
        if gap[k] > worst_p:
            worst_p, at_p = float(gap[k]), (idx, float(grid[k]))
        k = int(np.argmin(gap))
        if -gap[k] > worst_n:
            worst_n, at_n = float(-gap[k]), (idx, float(grid[k]))
    return DominanceReport(tol, worst_p, worst_n, at_p, at_n)


def sweep(
    network: Network,
    input: int,
    values: Sequence[float],
    output: int,
    cfg: SimConfig | None = None,
    *,
    keep_trajectories: bool = True,
    workers: int | None = None,
) -> SweepResult:
    """Simulate once per initial input concentration in ``values``.

    All other species start from ``network.initial``.  Runs are independent
    and may execute on several threads; results keep the order of ``values``.
    """
    cfg = cfg or SimConfig()
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("sweep needs at least one input value")
    if any(v < 0 or not np.isfinite(v) for v in vals):
        raise ValueError("sweep values must be finite and non-negative")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("sweep values must be strictly increasing")
    if not (0 <= input < network.n_species and 0 <= output < network.n_species):
        raise NetworkError("unknown input or output species")

    base = network.initial_vector()

    def run(v: float) -> Trajectory:
        y0 = base.copy()
        y0[input] = v
        try:
            return simulate(network, y0, cfg)
        except (SimulationError, ValueError) as exc:
            raise SweepError(v, exc) from exc

    n_workers = min(_workers(workers), len(vals))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            trajs = list(pool.map(run, vals))
    else:
        trajs = [run(v) for v in vals]

    report = dominance(trajs, output, ss_tol=cfg.ss_tol)
    return SweepResult(
        input_values=tuple(vals),
        output_at_ss=tuple(float(tr.steady_state.state[output]) for tr in trajs),
        converged=tuple(bool(tr.steady_state.converged) for tr in trajs),
        dominance_report=report,
        trajectories=tuple(trajs) if keep_trajectories else None,
        input=input,
        output=output,
    )


class EmpiricalKind(enum.Enum):
    CONSISTENT_POSITIVE = "ConsistentPositive"
    CONSISTENT_NEGATIVE = "ConsistentNegative"
    VIOLATION = "Violation"
    INDETERMINATE = "Indeterminate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EmpiricalResult:
    kind: EmpiricalKind
    report: DominanceReport
    sweep: SweepResult = field(repr=False)
    violated: str | None = None  # "positive" / "negative" for VIOLATION
    pair: tuple[float, float] | None = None  # input values of the offending pair
    time: float | None = None
    gap: float | None = None
    flat: bool = False  # both orderings hold: the output does not react to the input


def check_empirical_monotonicity(
    network: Network,
    input: int,
    output: int,
    values: Sequence[float],
    cfg: SimConfig | None = None,
    expected: str | None = None,
    **sweep_kwargs,
) -> EmpiricalResult:
    """Test the pointwise-in-time ordering of the output across a sweep.

    Without ``expected`` the outcome is whichever ordering holds, or
    ``Indeterminate``.  With ``expected`` set to ``"positive"`` or
    ``"negative"`` a failure of that ordering is reported as ``Violation``
    with the offending pair, time and gap.
    """
    if input == output:
        raise NetworkError("input and output species must be distinct")
    if expected not in (None, "positive", "negative"):
        raise ValueError("expected must be None, 'positive' or 'negative'")
    res = sweep(network, input, values, output, cfg, **sweep_kwargs)
    rep = res.dominance_report
    vals = res.input_values

    def details(which: str):
        worst = rep.worst_positive if which == "positive" else rep.worst_negative
        at = rep.positive_at if which == "positive" else rep.negative_at
        pair = (vals[at[0]], vals[at[0] + 1]) if at else None
        return dict(violated=which, pair=pair, time=at[1] if at else None, gap=worst)

    flat = rep.positive and rep.negative
    if expected == "positive":
        if rep.positive:
            return EmpiricalResult(EmpiricalKind.CONSISTENT_POSITIVE, rep, res, flat=flat)
        return EmpiricalResult(EmpiricalKind.VIOLATION, rep, res, **details("positive"))
    if expected == "negative":
        if rep.negative:
            return EmpiricalResult(EmpiricalKind.CONSISTENT_NEGATIVE, rep, res, flat=flat)
        return EmpiricalResult(EmpiricalKind.VIOLATION, rep, res, **details("negative"))
    if rep.positive:
        return EmpiricalResult(EmpiricalKind.CONSISTENT_POSITIVE, rep, res, flat=flat)
    if rep.negative:
        return EmpiricalResult(EmpiricalKind.CONSISTENT_NEGATIVE, rep, res)
    d = details("positive" if rep.worst_positive <= rep.worst_negative else "negative")
    d.pop("violated")
    return EmpiricalResult(EmpiricalKind.INDETERMINATE, rep, res, **d)


# --------------------------------------------------------------------------
# CSV export


def _f(x: float) -> str:
    return format(float(x), ".17g")


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["input_value", "output_ss", "converged"])
    for v, o, c in zip(result.input_values, result.output_at_ss, result.converged):
        w.writerow([_f(v), _f(o), "true" if c else "false"])
    return buf.getvalue()


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", *traj.species])
    for t, row in zip(traj.times, traj.states):
        w.writerow([_f(t), *(_f(v) for v in row)])
    return buf.getvalue()
