"""Exact per-user solvers for the task-split and compute-frequency blocks.

Both blocks decouple across users.  The task split is a per-user linear
program over an interval, so the optimum is an endpoint selected by the
sign of the marginal offloading cost.  The frequency block has an
objective that is strictly increasing in every variable, so the optimum
sits at the constraint lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSubproblem
from .model import Scenario

INTERVAL_ATOL = 1e-9


@dataclass(frozen=True)
class TaskAllocCoefficients:
    """Marginal offload cost and feasible interval per user."""
    lam: np.ndarray    # J per offloaded bit
    lower: np.ndarray  # bits
    upper: np.ndarray  # bits


def task_coefficients(scenario: Scenario, rates: np.ndarray, local_hz: np.ndarray,
                      alap_hz: np.ndarray) -> TaskAllocCoefficients:
    """Offload-cost coefficients and per-user feasible intervals.

    The interval combines the task bound, the local-time limit under the
    current local frequency, and the offload-time limit under the current
    rate and ALAP frequency.  Users with no offload capacity (zero rate or
    zero ALAP share) are pinned to the local-only point when possible.
    """
    m_users = scenario.n_users
    tau = scenario.slot_s
    lam = np.empty(m_users)
    lower = np.empty(m_users)
    upper = np.empty(m_users)
    for m in range(m_users):
        big_l = scenario.task_bits[m]
        lower[m] = max(0.0, big_l - local_hz[m] * tau / scenario.cycles_per_bit[m])
        if rates[m] > 0 and alap_hz[m] > 0:
            per_bit = 1.0 / rates[m] + scenario.alap_cycles_per_bit / alap_hz[m]
            upper[m] = min(big_l, tau / per_bit)
            lam[m] = (scenario.tx_power_w[m] / rates[m]
                      + scenario.alap_kappa * alap_hz[m] ** 2 * scenario.alap_cycles_per_bit
                      - scenario.kappa[m] * local_hz[m] ** 2 * scenario.cycles_per_bit[m])
        else:
            upper[m] = 0.0
            lam[m] = np.inf  # offloading impossible; force the lower endpoint
    return TaskAllocCoefficients(lam, lower, upper)


def solve_task_allocation(scenario: Scenario, rates: np.ndarray, local_hz: np.ndarray,
                          alap_hz: np.ndarray) -> np.ndarray:
    """Optimal offload bits per user given rates and frequencies."""
    coef = task_coefficients(scenario, rates, local_hz, alap_hz)
    l_opt = np.empty(scenario.n_users)
    for m in range(scenario.n_users):
        if coef.lower[m] > coef.upper[m] + INTERVAL_ATOL:
            raise InfeasibleSubproblem(
                f"user {m}: task interval empty "
                f"[{coef.lower[m]:.6g}, {coef.upper[m]:.6g}]",
                user=m, constraint="task_interval")
        hi = max(coef.lower[m], coef.upper[m])
        # lam > 0 favors local computation; ties break to the lower endpoint
        l_opt[m] = coef.lower[m] if coef.lam[m] >= 0 else hi
    return l_opt


@dataclass(frozen=True)
class ComputeAllocBounds:
    local_lower: np.ndarray
    alap_lower: np.ndarray


def compute_bounds(scenario: Scenario, rates: np.ndarray,
                   offload_bits: np.ndarray) -> ComputeAllocBounds:
    tau = scenario.slot_s
    m_users = scenario.n_users
    local_lower = np.empty(m_users)
    alap_lower = np.empty(m_users)
    for m in range(m_users):
        local_bits = scenario.task_bits[m] - offload_bits[m]
        local_lower[m] = scenario.cycles_per_bit[m] * max(local_bits, 0.0) / tau
        l = offload_bits[m]
        if l > 0:
            if rates[m] <= 0 or tau - l / rates[m] <= 0:
                raise InfeasibleSubproblem(
                    f"user {m}: transmit time exhausts the slot",
                    user=m, constraint="offload_time")
            alap_lower[m] = scenario.alap_cycles_per_bit * l / (tau - l / rates[m])
        else:
            alap_lower[m] = 0.0
    return ComputeAllocBounds(local_lower, alap_lower)


def solve_compute_allocation(scenario: Scenario, rates: np.ndarray,
                             offload_bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimal (local, ALAP) frequencies: the constraint lower bounds."""
    bounds = compute_bounds(scenario, rates, offload_bits)
    for m in range(scenario.n_users):
        if bounds.local_lower[m] > scenario.f_max_hz[m] * (1.0 + 1e-12):
            raise InfeasibleSubproblem(
                f"user {m}: needs {bounds.local_lower[m]:.6g} Hz locally, "
                f"cap {scenario.f_max_hz[m]:.6g}",
                user=m, constraint="local_hz_upper")
    total = float(np.sum(bounds.alap_lower))
    if total > scenario.alap_f_max_hz * (1.0 + 1e-12):
        raise InfeasibleSubproblem(
            f"ALAP budget exceeded: {total:.6g} > {scenario.alap_f_max_hz:.6g}",
            constraint="alap_hz_budget")
    return (np.minimum(bounds.local_lower, scenario.f_max_hz),
            bounds.alap_lower.copy())
