"""Task-split and compute-frequency solvers against brute-force oracles."""

import numpy as np
import pytest

from fdiscc import alloc, model
from fdiscc.errors import InfeasibleSubproblem


def per_user_energy(sc, m, l, r, f, fa):
    """Energy terms of user m that depend on the task split."""
    e_loc = sc.kappa[m] * f**2 * sc.cycles_per_bit[m] * (sc.task_bits[m] - l)
    e_tran = sc.tx_power_w[m] * l / r if r > 0 else np.where(l > 0, np.inf, 0.0)
    e_comp = sc.alap_kappa * fa**2 * sc.alap_cycles_per_bit * l
    return e_loc + e_tran + e_comp


def grid_lp_oracle(sc, m, r, f, fa, n=100_000):
    """Dense grid over the feasible interval of l, minimum objective."""
    lower = max(0.0, sc.task_bits[m] - f * sc.slot_s / sc.cycles_per_bit[m])
    if r > 0 and fa > 0:
        upper = min(sc.task_bits[m],
                    sc.slot_s / (1.0 / r + sc.alap_cycles_per_bit / fa))
    else:
        upper = 0.0
    grid = np.linspace(lower, upper, n)
    vals = per_user_energy(sc, m, grid, r, f, fa)
    k = int(np.argmin(vals))
    return grid[k], vals[k]


def test_task_allocation_worked_example():
    sc = model.Scenario(n_users=1, task_bits=1e5, f_max_hz=4e6, kappa=1e-20)
    r = np.array([4e6])
    f = np.array([4e6])
    fa = np.array([2e7])
    coef = alloc.task_coefficients(sc, r, f, fa)
    assert coef.lower[0] == pytest.approx(2e4)
    assert coef.lam[0] > 0
    l = alloc.solve_task_allocation(sc, r, f, fa)
    assert l[0] == pytest.approx(max(0.0, 1e5 - 8e4))


def test_task_allocation_matches_grid_oracle():
    rng = np.random.default_rng(10)
    for k in range(50):
        m_users = int(rng.integers(1, 5))
        sc = model.Scenario(
            n_users=m_users,
            task_bits=rng.uniform(1e4, 1e5, m_users),
            tx_power_w=rng.uniform(0.01, 0.5, m_users),
            kappa=rng.uniform(0.3e-20, 3e-20, m_users))
        r = rng.uniform(1e5, 5e6, m_users)
        f = rng.uniform(1e5, 4e6, m_users)
        fa = rng.uniform(1e5, 2e7, m_users)
        try:
            l = alloc.solve_task_allocation(sc, r, f, fa)
        except InfeasibleSubproblem as exc:
            m = exc.user
            coef = alloc.task_coefficients(sc, r, f, fa)
            assert coef.lower[m] > coef.upper[m]
            continue
        for m in range(m_users):
            _, best = grid_lp_oracle(sc, m, r[m], f[m], fa[m], n=20_000)
            got = per_user_energy(sc, m, l[m], r[m], f[m], fa[m])
            assert got <= best * (1 + 1e-6) + 1e-15


def test_task_allocation_zero_rate_pins_local():
    sc = model.Scenario(n_users=1, task_bits=5e4)
    l = alloc.solve_task_allocation(sc, np.array([0.0]), np.array([4e6]),
                                    np.array([2e7]))
    assert l[0] == 0.0


def test_task_allocation_empty_interval_raises():
    sc = model.Scenario(n_users=1, task_bits=5e5, f_max_hz=4e6)
    # mandatory offload of 4.2e5 bits but the rate allows far less
    with pytest.raises(InfeasibleSubproblem) as exc:
        alloc.solve_task_allocation(sc, np.array([1e4]), np.array([4e6]),
                                    np.array([2e7]))
    assert exc.value.user == 0


def test_compute_allocation_worked_examples():
    sc = model.Scenario(n_users=1, task_bits=1e5, f_max_hz=4e6)
    f, fa = alloc.solve_compute_allocation(sc, np.array([4e6]), np.array([2e4]))
    assert f[0] == pytest.approx(4e6)           # boundary of the cap
    assert fa[0] == pytest.approx(50 * 2e4 / (2 - 0.005), rel=1e-9)


def test_compute_allocation_matches_grid_oracle():
    rng = np.random.default_rng(11)
    sc = model.Scenario(n_users=1, task_bits=8e4, f_max_hz=4e6)
    for _ in range(20):
        l = rng.uniform(1e4, 7e4)
        r = rng.uniform(2e5, 4e6)
        if sc.slot_s - l / r <= 0:
            continue
        f_star, fa_star = alloc.solve_compute_allocation(
            sc, np.array([r]), np.array([l]))
        mu = sc.kappa[0] * sc.cycles_per_bit[0] * (sc.task_bits[0] - l)
        nu = sc.alap_kappa * sc.alap_cycles_per_bit * l
        best = mu * f_star[0] ** 2 + nu * fa_star[0] ** 2
        # grid over feasible (f, fa); every point should cost at least as much
        fg = np.linspace(f_star[0], sc.f_max_hz[0], 300)
        fag = np.linspace(fa_star[0], sc.alap_f_max_hz, 300)
        grid = mu * fg[:, None] ** 2 + nu * fag[None, :] ** 2
        assert best <= np.min(grid) * (1 + 5e-3)


def test_compute_allocation_zero_offload():
    sc = model.Scenario(n_users=2, task_bits=6e4)
    f, fa = alloc.solve_compute_allocation(sc, np.array([1e6, 0.0]),
                                           np.array([0.0, 0.0]))
    assert np.allclose(f, sc.cycles_per_bit * sc.task_bits / sc.slot_s)
    assert np.allclose(fa, 0.0)


def test_compute_allocation_cap_violations():
    sc = model.Scenario(n_users=1, task_bits=5e5, f_max_hz=4e6)
    with pytest.raises(InfeasibleSubproblem) as exc:
        alloc.solve_compute_allocation(sc, np.array([1e6]), np.array([0.0]))
    assert exc.value.constraint == "local_hz_upper"
    sc2 = model.Scenario(n_users=1, task_bits=6e4, alap_f_max_hz=1e4)
    with pytest.raises(InfeasibleSubproblem) as exc:
        alloc.solve_compute_allocation(sc2, np.array([1e6]), np.array([6e4]))
    assert exc.value.constraint == "alap_hz_budget"
    with pytest.raises(InfeasibleSubproblem) as exc:
        alloc.solve_compute_allocation(sc, np.array([1e4]), np.array([5e4]))
    assert exc.value.constraint == "offload_time"
