"""Alternating-optimization loop and the benchmark schemes.

One sweep solves the four blocks in order: task split, compute
frequencies, transmit covariance, receive combiners.  Each block holds
the others fixed and is guaranteed not to increase the total energy; a
failed or non-improving block keeps its previous value so the descent
chain never breaks.  Benchmark schemes reuse the same loop with selected
blocks frozen at deterministic or seeded values.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import alloc as alloc_mod
from . import beamforming as bf
from . import model
from .barrier import SolverParams
from .errors import (InfeasibleSubproblem, NumericalFailure, ScenarioInfeasible,
                     ValidationError)
from .linalg import outer_product

SCHEMES = ("proposed", "ft", "rt", "fc", "rc", "rb")
BLOCKS = ("task", "compute", "tx", "rx")
DESCENT_RTOL = 1e-9


@dataclass(frozen=True)
class AOOptions:
    epsilon: float = 1e-4       # relative objective-change threshold
    max_iters: int = 20
    seed: int = 0
    n_samples: int = 100        # Gaussian randomization draws
    solver_params: SolverParams | None = None

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValidationError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.n_samples < 1:
            raise ValidationError("n_samples must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    total_j: float
    energy: model.EnergyBreakdown
    block_status: dict          # block name -> "ok" | "frozen" | "kept (...)" etc.
    block_totals: dict          # block name -> total J right after that block
    wall_s: float


@dataclass
class ConvergenceTrace:
    records: list = field(default_factory=list)
    status: str = "max_iter"    # "converged" | "max_iter"

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total_j for r in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records) - 1


@dataclass
class AOResult:
    alloc: model.AllocationState
    beam: model.BeamformingState
    energy: model.EnergyBreakdown
    trace: ConvergenceTrace
    tx_solves: list             # TxSolution per accepted transmit update

    @property
    def converged(self) -> bool:
        return self.trace.status == "converged"


def initialize_feasible(scenario: model.Scenario
                        ) -> tuple[model.AllocationState, model.BeamformingState]:
    """Deterministic feasible start.

    Combiners are matched to the user steering vectors, the transmit
    vector points at the target with the sensing constraint active, the
    ALAP budget is split equally, and each task split sits at the
    midpoint of its feasible interval.
    """
    geo = model.geometry(scenario)
    n_rx = scenario.n_rx
    w = np.array([model.steering_vector(geo.user_angle[m], n_rx)
                  for m in range(scenario.n_users)])
    a_t = model.steering_vector(geo.target_angle, scenario.n_tx)
    floor = geo.target_dist**2 * scenario.gamma_min
    v0 = np.sqrt(floor) * a_t
    beam = model.BeamformingState(tx_cov=outer_product(v0), rx_vecs=w, tx_vec=v0)
    r = model.rates(scenario, beam)
    fa_init = np.full(scenario.n_users, scenario.alap_f_max_hz / scenario.n_users)
    coef = alloc_mod.task_coefficients(scenario, r, scenario.f_max_hz, fa_init)
    if np.any(coef.lower > coef.upper + alloc_mod.INTERVAL_ATOL):
        m = int(np.argmax(coef.lower - coef.upper))
        raise ScenarioInfeasible(
            f"user {m}: empty task interval "
            f"[{coef.lower[m]:.6g}, {coef.upper[m]:.6g}]")
    l0 = np.clip((coef.lower + coef.upper) / 2.0, coef.lower, coef.upper)
    try:
        local_hz, alap_hz = alloc_mod.solve_compute_allocation(scenario, r, l0)
    except InfeasibleSubproblem as exc:
        raise ScenarioInfeasible(str(exc)) from exc
    alloc = model.AllocationState(l0, local_hz, alap_hz)
    report = model.check_feasibility(scenario, alloc, beam)
    if not report.all_ok:
        names = ", ".join(c.name for c in report.failed())
        raise ScenarioInfeasible(f"initial point violates: {names}")
    return alloc, beam


def _total(scenario, alloc, beam) -> float:
    return model.energy_breakdown(scenario, alloc, beam).total


def run_ao(scenario: model.Scenario, opts: AOOptions | None = None,
           init: tuple | None = None, frozen: frozenset = frozenset()) -> AOResult:
    """Alternating optimization until the relative energy change drops below epsilon."""
    opts = opts or AOOptions()
    alloc, beam = init if init is not None else initialize_feasible(scenario)
    energy = model.energy_breakdown(scenario, alloc, beam)
    trace = ConvergenceTrace()
    trace.records.append(IterationRecord(energy.total, energy, {}, {}, 0.0))
    tx_solves = []
    for i in range(opts.max_iters):
        t_start = time.perf_counter()
        status = {}
        block_totals = {}
        prev_total = trace.records[-1].total_j

        # task split, endpoint of a per-user interval LP
        if "task" in frozen:
            status["task"] = "frozen"
        else:
            r = model.rates(scenario, beam)
            try:
                l = alloc_mod.solve_task_allocation(
                    scenario, r, alloc.local_hz, alloc.alap_hz)
                cand = model.AllocationState(l, alloc.local_hz, alloc.alap_hz)
                if _total(scenario, cand, beam) <= prev_total * (1 + DESCENT_RTOL):
                    alloc = cand
                    status["task"] = "ok"
                else:
                    status["task"] = "reverted"
            except InfeasibleSubproblem as exc:
                status["task"] = f"kept ({exc})"
        block_totals["task"] = _total(scenario, alloc, beam)

        # compute frequencies, optimum at the constraint lower bounds
        if "compute" in frozen:
            status["compute"] = "frozen"
        else:
            r = model.rates(scenario, beam)
            try:
                local_hz, alap_hz = alloc_mod.solve_compute_allocation(
                    scenario, r, alloc.offload_bits)
                cand = model.AllocationState(alloc.offload_bits, local_hz, alap_hz)
                if (_total(scenario, cand, beam)
                        <= block_totals["task"] * (1 + DESCENT_RTOL)):
                    alloc = cand
                    status["compute"] = "ok"
                else:
                    status["compute"] = "reverted"
            except InfeasibleSubproblem as exc:
                status["compute"] = f"kept ({exc})"
        block_totals["compute"] = _total(scenario, alloc, beam)

        # transmit covariance via SDR + SCA
        if "tx" in frozen:
            status["tx"] = "frozen"
        else:
            try:
                g_prev = bf.echo_power(scenario, beam.tx_cov, beam.rx_vecs)
                sol = bf.solve_tx_beamforming(scenario, beam.rx_vecs, alloc,
                                              g_prev, opts.solver_params)
                vec = sol.v_vec if sol.residual_ratio <= bf.RANK_ONE_RATIO else None
                cand = model.BeamformingState(tx_cov=sol.v_cov,
                                              rx_vecs=beam.rx_vecs, tx_vec=vec)
                if (_total(scenario, alloc, cand)
                        <= block_totals["compute"] * (1 + DESCENT_RTOL)):
                    beam = cand
                    tx_solves.append(sol)
                    status["tx"] = "ok"
                else:
                    status["tx"] = "reverted"
            except (InfeasibleSubproblem, NumericalFailure) as exc:
                status["tx"] = f"kept ({type(exc).__name__}: {exc})"
        block_totals["tx"] = _total(scenario, alloc, beam)

        # receive combiners via per-user SDR + SCA + randomization
        if "rx" in frozen:
            status["rx"] = "frozen"
        else:
            try:
                rx = bf.solve_rx_beamforming(
                    scenario, beam.tx_cov, alloc, beam.rx_vecs,
                    opts.solver_params, n_samples=opts.n_samples,
                    seed=opts.seed + 97 * i)
                cand = model.BeamformingState(tx_cov=beam.tx_cov,
                                              rx_vecs=rx.rx_vecs,
                                              tx_vec=beam.tx_vec)
                if (_total(scenario, alloc, cand)
                        <= block_totals["tx"] * (1 + DESCENT_RTOL)):
                    beam = cand
                    status["rx"] = "ok"
                else:
                    status["rx"] = "reverted"
            except (InfeasibleSubproblem, NumericalFailure) as exc:
                status["rx"] = f"kept ({type(exc).__name__}: {exc})"
        block_totals["rx"] = _total(scenario, alloc, beam)

        energy = model.energy_breakdown(scenario, alloc, beam)
        trace.records.append(IterationRecord(
            energy.total, energy, status, block_totals,
            time.perf_counter() - t_start))
        rel = abs(prev_total - energy.total) / max(prev_total, 1e-12)
        if rel < opts.epsilon:
            trace.status = "converged"
            break
    return AOResult(alloc=alloc, beam=beam, energy=energy, trace=trace,
                    tx_solves=tx_solves)


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    nv = np.linalg.norm(v)
    while nv == 0.0:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nv = np.linalg.norm(v)
    return v / nv


def _init_interval(scenario, beam):
    """Feasible task intervals at the deterministic start frequencies."""
    r = model.rates(scenario, beam)
    fa_init = np.full(scenario.n_users, scenario.alap_f_max_hz / scenario.n_users)
    coef = alloc_mod.task_coefficients(scenario, r, scenario.f_max_hz, fa_init)
    if np.any(coef.lower > coef.upper + alloc_mod.INTERVAL_ATOL):
        m = int(np.argmax(coef.lower - coef.upper))
        raise ScenarioInfeasible(
            f"user {m}: empty task interval "
            f"[{coef.lower[m]:.6g}, {coef.upper[m]:.6g}]")
    return r, coef


def _alloc_from_bits(scenario, r, bits):
    try:
        local_hz, alap_hz = alloc_mod.solve_compute_allocation(scenario, r, bits)
    except InfeasibleSubproblem as exc:
        raise ScenarioInfeasible(str(exc)) from exc
    return model.AllocationState(bits, local_hz, alap_hz)


def run_scheme(scenario: model.Scenario, scheme: str,
               opts: AOOptions | None = None) -> AOResult:
    """Run the proposed scheme or one of the five benchmarks.

    ft/rt freeze the task split (midpoint / uniform draw), fc/rc freeze the
    compute frequencies (caps and equal split / uniform draws above the
    lower bounds), rb freezes random sensing-feasible beams; every other
    block is optimized by the same alternating loop.
    """
    opts = opts or AOOptions()
    key = scheme.lower()
    if key not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if key == "proposed":
        return run_ao(scenario, opts)
    rng = np.random.default_rng(opts.seed)

    if key == "rb":
        geo = model.geometry(scenario)
        a_t = model.steering_vector(geo.target_angle, scenario.n_tx)
        floor = geo.target_dist**2 * scenario.gamma_min
        u = _random_unit(rng, scenario.n_tx)
        proj = abs(np.vdot(a_t, u))
        while proj < 1e-9:
            u = _random_unit(rng, scenario.n_tx)
            proj = abs(np.vdot(a_t, u))
        v0 = np.sqrt(floor) * u / proj       # sensing constraint active by construction
        w = np.array([_random_unit(rng, scenario.n_rx)
                      for _ in range(scenario.n_users)])
        beam = model.BeamformingState(tx_cov=outer_product(v0), rx_vecs=w, tx_vec=v0)
        r, coef = _init_interval(scenario, beam)
        bits = np.clip((coef.lower + coef.upper) / 2.0, coef.lower, coef.upper)
        alloc = _alloc_from_bits(scenario, r, bits)
        frozen = frozenset({"tx", "rx"})
    else:
        alloc, beam = initialize_feasible(scenario)
        if key == "ft":
            frozen = frozenset({"task"})     # midpoint split is the initial value
        elif key == "rt":
            r, coef = _init_interval(scenario, beam)
            bits = coef.lower + rng.uniform(size=scenario.n_users) * (coef.upper
                                                                      - coef.lower)
            alloc = _alloc_from_bits(scenario, r, bits)
            frozen = frozenset({"task"})
        elif key == "fc":
            fa = np.full(scenario.n_users,
                         scenario.alap_f_max_hz / scenario.n_users)
            alloc = model.AllocationState(alloc.offload_bits,
                                          scenario.f_max_hz.copy(), fa)
            frozen = frozenset({"compute"})
        else:                                # rc
            r = model.rates(scenario, beam)
            bounds = alloc_mod.compute_bounds(scenario, r, alloc.offload_bits)
            headroom = scenario.alap_f_max_hz - float(np.sum(bounds.alap_lower))
            if headroom < 0:
                raise ScenarioInfeasible("ALAP budget below the mandatory load")
            local = bounds.local_lower + rng.uniform(size=scenario.n_users) * (
                scenario.f_max_hz - bounds.local_lower)
            alap = bounds.alap_lower + rng.uniform(size=scenario.n_users) * (
                headroom / scenario.n_users)
            alloc = model.AllocationState(alloc.offload_bits, local, alap)
            frozen = frozenset({"compute"})

    report = model.check_feasibility(scenario, alloc, beam)
    if not report.all_ok:
        names = ", ".join(c.name for c in report.failed())
        raise ScenarioInfeasible(f"scheme {key}: frozen choice violates: {names}")
    return run_ao(scenario, opts, init=(alloc, beam), frozen=frozen)
