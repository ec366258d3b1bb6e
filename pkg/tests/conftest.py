"""Shared fixtures and scenario generators for the test suite."""

import numpy as np
import pytest

from fdiscc import ao, model
from fdiscc.errors import ScenarioInfeasible


def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2.0


def random_psd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a @ a.conj().T) / n


def random_feasible_scenario(seed):
    """Random scenario accepted by the deterministic initializer."""
    rng = np.random.default_rng(seed)
    while True:
        m = int(rng.integers(2, 7))
        pos = np.column_stack([rng.uniform(-180, 180, m), rng.uniform(-40, 40, m)])
        sc = model.Scenario(
            n_users=m, user_positions=pos,
            target_position=np.array([rng.uniform(150, 350), rng.uniform(-50, 50)]),
            tx_power_w=rng.uniform(0.05, 0.2, m),
            task_bits=rng.uniform(2e4, 1e5, m),
            gamma_min=rng.uniform(2e-7, 2e-6))
        try:
            ao.initialize_feasible(sc)
            return sc
        except ScenarioInfeasible:
            seed += 1000
            rng = np.random.default_rng(seed)


def slack_alloc(scenario, factor=4.0):
    """Feasible allocation whose offload-time constraint has slack.

    The default initializer tightens the ALAP frequencies, which collapses
    the beamforming rate windows; scaling them up reopens the windows so
    the barrier paths get exercised.
    """
    alloc, beam = ao.initialize_feasible(scenario)
    alap = np.minimum(alloc.alap_hz * factor,
                      alloc.alap_hz + (scenario.alap_f_max_hz
                                       - alloc.alap_hz.sum()) / scenario.n_users)
    return model.AllocationState(alloc.offload_bits, alloc.local_hz, alap), beam


ACCEPTANCE_LINES = []


def record_criterion(ok, label, detail):
    """Collect one pass/fail line per acceptance criterion."""
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_scenario():
    return model.default_scenario()


@pytest.fixture(scope="session")
def default_result():
    """One converged AO run on the default scenario, shared across tests."""
    return ao.run_ao(model.default_scenario())
