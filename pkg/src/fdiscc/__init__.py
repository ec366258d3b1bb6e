"""Full-duplex aerial-platform ISCC energy minimization toolkit."""

from .ao import AOOptions, AOResult, ConvergenceTrace, SCHEMES, initialize_feasible, run_ao, run_scheme
from .errors import (InfeasibleSubproblem, InfeasibleTiming, NotPSDError,
                     NumericalFailure, ScenarioFileError, ScenarioInfeasible,
                     StartInfeasible, ValidationError)
from .model import (AllocationState, BeamformingState, EnergyBreakdown,
                    Scenario, default_scenario, energy_breakdown, rates)

__version__ = "0.1.0"

__all__ = [
    "AOOptions", "AOResult", "AllocationState", "BeamformingState",
    "ConvergenceTrace", "EnergyBreakdown", "InfeasibleSubproblem",
    "InfeasibleTiming", "NotPSDError", "NumericalFailure", "SCHEMES",
    "Scenario", "ScenarioFileError", "ScenarioInfeasible", "StartInfeasible",
    "ValidationError", "default_scenario", "energy_breakdown",
    "initialize_feasible", "rates", "run_ao", "run_scheme",
]
