"""Scenario-file ingestion, parameter sweeps, and CSV emission.

Scenario files are YAML.  Decibel fields are converted to linear watts at
parse time only; everything downstream stays in SI units.  Sweep rows use
a fixed CSV header so downstream tooling can rely on column order.
"""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass, replace

import numpy as np
import yaml

from . import model
from .ao import SCHEMES, AOOptions, AOResult, run_scheme
from .errors import ScenarioFileError, ValidationError

SWEEP_AXES = ("user_power", "gamma_min", "task_bits", "n_users")
CSV_HEADER = ("axis", "scheme", "seed", "total_energy_j", "e_loc_j", "e_tran_j",
              "e_comp_alap_j", "e_tran_alap_j", "iterations", "converged",
              "wall_ms")

_DB_FIELDS = {
    "noise_dbm": ("noise_w", lambda x: 10.0 ** ((x - 30.0) / 10.0)),
    "target_amp_dbm": ("target_amp_sq", lambda x: 10.0 ** ((x - 30.0) / 10.0)),
    "beta_db": ("beta_ref", lambda x: 10.0 ** (x / 10.0)),
}
_SCENARIO_FIELDS = {
    "n_users", "n_tx", "n_rx", "slot_s", "bandwidth_hz", "beta_ref", "noise_w",
    "target_amp_sq", "gamma_min", "alap_position", "target_position",
    "user_positions", "tx_power_w", "task_bits", "cycles_per_bit", "f_max_hz",
    "kappa", "alap_cycles_per_bit", "alap_f_max_hz", "alap_kappa",
}
_OPTION_FIELDS = {"epsilon", "max_iters", "seed", "n_samples"}


def _parse_scenario(section) -> model.Scenario:
    if section is None:
        return model.default_scenario()
    if not isinstance(section, dict):
        raise ScenarioFileError("scenario", "expected a mapping")
    kwargs = {}
    for key, value in section.items():
        if key in _DB_FIELDS:
            target, conv = _DB_FIELDS[key]
            if target in section:
                raise ScenarioFileError(
                    f"scenario.{key}", f"conflicts with scenario.{target}")
            try:
                kwargs[target] = conv(float(value))
            except (TypeError, ValueError) as exc:
                raise ScenarioFileError(f"scenario.{key}", str(exc)) from exc
        elif key in _SCENARIO_FIELDS:
            kwargs[key] = value
        else:
            raise ScenarioFileError(f"scenario.{key}", "unknown field")
    try:
        return model.Scenario(**kwargs)
    except ValidationError as exc:
        raise ScenarioFileError("scenario", str(exc)) from exc


def _parse_options(section) -> AOOptions:
    if section is None:
        return AOOptions()
    if not isinstance(section, dict):
        raise ScenarioFileError("options", "expected a mapping")
    kwargs = {}
    for key, value in section.items():
        if key not in _OPTION_FIELDS:
            raise ScenarioFileError(f"options.{key}", "unknown field")
        kwargs[key] = value
    try:
        return AOOptions(**kwargs)
    except (ValidationError, TypeError) as exc:
        raise ScenarioFileError("options", str(exc)) from exc


def _parse_sweep(section) -> dict | None:
    if section is None:
        return None
    if not isinstance(section, dict):
        raise ScenarioFileError("sweep", "expected a mapping")
    axis = section.get("axis")
    if axis not in SWEEP_AXES:
        raise ScenarioFileError("sweep.axis", f"expected one of {SWEEP_AXES}")
    values = section.get("values")
    if not isinstance(values, list) or not values:
        raise ScenarioFileError("sweep.values", "expected a non-empty list")
    vals = [float(v) for v in values]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ScenarioFileError("sweep.values", "must be strictly increasing")
    schemes = section.get("schemes", list(SCHEMES))
    if not isinstance(schemes, list) or not schemes:
        raise ScenarioFileError("sweep.schemes", "expected a non-empty list")
    for s in schemes:
        if str(s).lower() not in SCHEMES:
            raise ScenarioFileError("sweep.schemes", f"unknown scheme {s!r}")
    seeds = section.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds:
        raise ScenarioFileError("sweep.seeds", "expected a non-empty list")
    extra = set(section) - {"axis", "values", "schemes", "seeds"}
    if extra:
        raise ScenarioFileError(f"sweep.{sorted(extra)[0]}", "unknown field")
    return {"axis": axis, "values": vals,
            "schemes": [str(s).lower() for s in schemes],
            "seeds": [int(s) for s in seeds]}


def load_scenario(path) -> tuple[model.Scenario, AOOptions, dict | None]:
    """Parse a YAML scenario file into (Scenario, AOOptions, sweep or None)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ScenarioFileError("file", str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ScenarioFileError("file", f"not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ScenarioFileError("file", "top level must be a mapping")
    extra = set(doc) - {"scenario", "options", "sweep"}
    if extra:
        raise ScenarioFileError(sorted(extra)[0], "unknown section")
    return (_parse_scenario(doc.get("scenario")),
            _parse_options(doc.get("options")),
            _parse_sweep(doc.get("sweep")))


def _extend(arr: np.ndarray, k: int) -> np.ndarray:
    m = arr.shape[0]
    if k <= m:
        return arr[:k].copy()
    return np.concatenate([arr, np.full(k - m, arr[-1])])


def apply_axis(scenario: model.Scenario, axis: str, value: float) -> model.Scenario:
    """Clone the scenario with one sweep axis applied to all users."""
    if axis == "user_power":
        return replace(scenario, tx_power_w=float(value))
    if axis == "task_bits":
        return replace(scenario, task_bits=float(value))
    if axis == "gamma_min":
        return replace(scenario, gamma_min=float(value))
    if axis == "n_users":
        k = int(value)
        if k != value or k < 1:
            raise ValidationError("n_users axis values must be positive integers")
        if k <= scenario.n_users:
            pos = scenario.user_positions[:k].copy()
        else:
            pos = model.default_user_positions(k)
        return replace(
            scenario, n_users=k, user_positions=pos,
            tx_power_w=_extend(scenario.tx_power_w, k),
            task_bits=_extend(scenario.task_bits, k),
            cycles_per_bit=_extend(scenario.cycles_per_bit, k),
            f_max_hz=_extend(scenario.f_max_hz, k),
            kappa=_extend(scenario.kappa, k))
    raise ValidationError(f"unknown sweep axis {axis!r}")


@dataclass(frozen=True)
class SweepRow:
    axis: float
    scheme: str
    seed: int
    total_energy_j: float
    e_loc_j: float
    e_tran_j: float
    e_comp_alap_j: float
    e_tran_alap_j: float
    iterations: int
    converged: bool
    wall_ms: float


def _row(axis_value, scheme, seed, result: AOResult, wall_ms: float) -> SweepRow:
    e = result.energy
    return SweepRow(float(axis_value), scheme, int(seed), e.total, e.e_loc,
                    e.e_tran, e.e_comp_alap, e.e_tran_alap,
                    result.trace.iterations, result.converged, wall_ms)


def run_sweep(scenario: model.Scenario, options: AOOptions, axis: str,
              values, schemes, seeds) -> list:
    """Run every (value, scheme, seed) combination and collect rows."""
    rows = []
    for value in values:
        sc = apply_axis(scenario, axis, value)
        for scheme in schemes:
            for seed in seeds:
                opts = replace(options, seed=int(seed))
                t0 = time.perf_counter()
                result = run_scheme(sc, scheme, opts)
                wall_ms = (time.perf_counter() - t0) * 1e3
                rows.append(_row(value, scheme, seed, result, wall_ms))
    rows.sort(key=lambda r: (r.scheme, r.axis, r.seed))
    return rows


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([_fmt(v) for v in (
                r.axis, r.scheme, r.seed, r.total_energy_j, r.e_loc_j,
                r.e_tran_j, r.e_comp_alap_j, r.e_tran_alap_j, r.iterations,
                r.converged, r.wall_ms)])


def read_csv(path) -> list:
    """Round-trip reader for sweep CSV files."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ScenarioFileError("file", f"unexpected CSV header {header}")
        for rec in reader:
            out.append(SweepRow(
                float(rec[0]), rec[1], int(rec[2]), float(rec[3]), float(rec[4]),
                float(rec[5]), float(rec[6]), float(rec[7]), int(rec[8]),
                rec[9] == "true", float(rec[10])))
    return out


def scenario_digest(scenario: model.Scenario) -> str:
    """Stable content hash of every scenario field."""
    h = hashlib.sha256()
    for name in sorted(vars(scenario)):
        value = getattr(scenario, name)
        arr = np.asarray(value, dtype=float if not np.iscomplexobj(value) else complex)
        h.update(name.encode())
        h.update(np.ascontiguousarray(arr).tobytes())
        h.update(str(arr.shape).encode())
    return h.hexdigest()


def emit_convergence(result: AOResult, path, scenario: model.Scenario) -> None:
    """Per-iteration energy trace as CSV with a scenario-hash footer."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,total_energy_j\n")
        for i, total in enumerate(result.trace.totals):
            fh.write(f"{i},{total:.12g}\n")
        fh.write(f"# status: {result.trace.status}\n")
        fh.write(f"# scenario sha256: {scenario_digest(scenario)}\n")
