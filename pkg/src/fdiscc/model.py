"""Physical scenario and the closed-form system quantities.

Geometry convention: both uniform linear arrays lie along the x axis of
the hovering platform.  A ground node's array angle is atan2(x offset,
altitude), so only the x offset steers the array, while the full 3-D
distance sets the path loss.  All quantities are SI: watts, hertz, bits,
seconds, joules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleTiming, ValidationError
from .linalg import as_hermitian, as_vector, outer_product

FEAS_RTOL = 1e-9


def _user_array(value, m: int, name: str) -> np.ndarray:
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        a = np.full(m, float(a))
    if a.shape != (m,):
        raise ValidationError(f"{name}: expected scalar or length-{m} list")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name}: entries must be finite")
    return a


def default_user_positions(m: int) -> np.ndarray:
    """Deterministic ground layout: x evenly spaced in [-150, 150], y = 0."""
    x = np.linspace(-150.0, 150.0, m) if m > 1 else np.array([0.0])
    return np.column_stack([x, np.zeros(m)])


@dataclass(frozen=True)
class Scenario:
    """Immutable problem instance: geometry, radio constants, compute parameters."""

    n_users: int = 4
    n_tx: int = 6
    n_rx: int = 6
    slot_s: float = 2.0
    bandwidth_hz: float = 5e5
    beta_ref: float = 1e-6          # channel power gain at 1 m, linear
    noise_w: float = 1e-14          # receiver noise power
    target_amp_sq: float = 1e-14    # squared echo amplitude, linear power scale
    gamma_min: float = 1e-6         # beampattern-gain threshold before d0^2 scaling
    alap_position: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 100.0]))
    target_position: np.ndarray = field(default_factory=lambda: np.array([250.0, 0.0]))
    user_positions: np.ndarray | None = None
    tx_power_w: np.ndarray | float = 0.1
    task_bits: np.ndarray | float = 6e4
    cycles_per_bit: np.ndarray | float = 100.0
    f_max_hz: np.ndarray | float = 4e6
    kappa: np.ndarray | float = 1e-20
    alap_cycles_per_bit: float = 50.0
    alap_f_max_hz: float = 8e7
    alap_kappa: float = 1e-20

    def __post_init__(self):
        m = int(self.n_users)
        if m < 1:
            raise ValidationError("n_users must be >= 1")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValidationError("antenna counts must be >= 1")
        pos = self.user_positions
        pos = default_user_positions(m) if pos is None else np.asarray(pos, float)
        if pos.shape != (m, 2):
            raise ValidationError(f"user_positions: expected shape ({m}, 2)")
        alap = np.asarray(self.alap_position, float)
        if alap.shape != (3,):
            raise ValidationError("alap_position: expected (x, y, z)")
        if alap[2] <= 0:
            raise ValidationError("alap_position: altitude must be > 0")
        tgt = np.asarray(self.target_position, float)
        if tgt.shape != (2,):
            raise ValidationError("target_position: expected ground (x, y)")
        object.__setattr__(self, "n_users", m)
        object.__setattr__(self, "alap_position", alap)
        object.__setattr__(self, "target_position", tgt)
        object.__setattr__(self, "user_positions", pos)
        for name in ("tx_power_w", "task_bits", "cycles_per_bit", "f_max_hz", "kappa"):
            object.__setattr__(self, name, _user_array(getattr(self, name), m, name))
        for name, v in (
            ("slot_s", self.slot_s), ("bandwidth_hz", self.bandwidth_hz),
            ("beta_ref", self.beta_ref), ("noise_w", self.noise_w),
            ("target_amp_sq", self.target_amp_sq), ("gamma_min", self.gamma_min),
            ("alap_cycles_per_bit", self.alap_cycles_per_bit),
            ("alap_f_max_hz", self.alap_f_max_hz), ("alap_kappa", self.alap_kappa),
        ):
            if not np.isfinite(v) or v <= 0:
                raise ValidationError(f"{name}: must be finite and > 0")
        if np.any(self.tx_power_w <= 0) or np.any(self.f_max_hz <= 0):
            raise ValidationError("per-user powers and frequency caps must be > 0")
        if np.any(self.cycles_per_bit <= 0) or np.any(self.kappa <= 0):
            raise ValidationError("per-user cycle counts and kappa must be > 0")
        if np.any(self.task_bits < 0):
            raise ValidationError("task_bits must be >= 0")
        for arr in (self.user_positions, self.alap_position, self.target_position,
                    self.tx_power_w, self.task_bits, self.cycles_per_bit,
                    self.f_max_hz, self.kappa):
            arr.flags.writeable = False


def default_scenario(n_users: int = 4, **overrides) -> Scenario:
    return Scenario(n_users=n_users, **overrides)


@dataclass(frozen=True)
class Geometry:
    user_dist: np.ndarray
    user_angle: np.ndarray
    target_dist: float
    target_angle: float


def steering_vector(theta: float, n: int) -> np.ndarray:
    """Unit-norm half-wavelength ULA response for angle theta."""
    if n < 1:
        raise ValidationError("steering vector needs n >= 1")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * np.sin(theta)) / np.sqrt(n)


def geometry(scenario: Scenario) -> Geometry:
    alap = scenario.alap_position
    alt = alap[2]
    delta = scenario.user_positions - alap[:2]
    dist = np.sqrt(np.sum(delta**2, axis=1) + alt**2)
    if np.any(dist == 0.0):
        raise ValidationError("user position coincides with the platform")
    angle = np.arctan2(delta[:, 0], alt)
    tdelta = scenario.target_position - alap[:2]
    tdist = float(np.sqrt(np.sum(tdelta**2) + alt**2))
    if tdist == 0.0:
        raise ValidationError("target position coincides with the platform")
    tangle = float(np.arctan2(tdelta[0], alt))
    return Geometry(dist, angle, tdist, tangle)


def channel_vector(scenario: Scenario, m: int) -> np.ndarray:
    """LoS uplink channel sqrt(beta)/d_m times the user's steering vector."""
    geo = geometry(scenario)
    a = steering_vector(geo.user_angle[m], scenario.n_rx)
    return np.sqrt(scenario.beta_ref) / geo.user_dist[m] * a


def channel_matrix(scenario: Scenario) -> np.ndarray:
    """All uplink channels stacked as rows, shape (M, N_r)."""
    geo = geometry(scenario)
    rows = [np.sqrt(scenario.beta_ref) / geo.user_dist[m]
            * steering_vector(geo.user_angle[m], scenario.n_rx)
            for m in range(scenario.n_users)]
    return np.array(rows)


def echo_matrix(scenario: Scenario) -> np.ndarray:
    """Target echo coupling a_r a_t^H between the two arrays."""
    geo = geometry(scenario)
    a_t = steering_vector(geo.target_angle, scenario.n_tx)
    a_r = steering_vector(geo.target_angle, scenario.n_rx)
    return np.outer(a_r, a_t.conj())


@dataclass(frozen=True)
class AllocationState:
    offload_bits: np.ndarray  # l_m
    local_hz: np.ndarray      # f_m
    alap_hz: np.ndarray       # f_m^A

    def __post_init__(self):
        for name in ("offload_bits", "local_hz", "alap_hz"):
            a = np.asarray(getattr(self, name), float)
            object.__setattr__(self, name, a)
            a.flags.writeable = False


@dataclass(frozen=True)
class BeamformingState:
    tx_cov: np.ndarray             # V, (N_t, N_t) Hermitian PSD
    rx_vecs: np.ndarray            # combiners stacked as rows, (M, N_r)
    tx_vec: np.ndarray | None = None  # extracted v, present when near rank one

    def __post_init__(self):
        v_cov = as_hermitian(self.tx_cov, atol=1e-9)
        object.__setattr__(self, "tx_cov", v_cov)
        w = np.asarray(self.rx_vecs, complex)
        if w.ndim != 2:
            raise ValidationError("rx_vecs: expected one combiner per user")
        object.__setattr__(self, "rx_vecs", w)
        if self.tx_vec is not None:
            vec = as_vector(self.tx_vec)
            nv = float(np.linalg.norm(v_cov))
            if nv > 0:
                res = np.linalg.norm(v_cov - outer_product(vec)) / nv
                if res > 1e-3:
                    raise ValidationError("tx_vec does not match tx_cov within 1e-3")
            object.__setattr__(self, "tx_vec", vec)


def receive_sinr(scenario: Scenario, v_cov: np.ndarray, w: np.ndarray, m: int) -> float:
    """Uplink SINR of user m through combiner w, with echo interference."""
    h = channel_matrix(scenario)
    a = echo_matrix(scenario)
    wv = as_vector(w)
    if np.linalg.norm(wv) == 0.0:
        raise ValidationError("combiner must be nonzero")
    gains = np.abs(h @ wv.conj()) ** 2          # |w^H h_j|^2
    num = scenario.tx_power_w[m] * gains[m]
    inter = float(np.sum(np.delete(scenario.tx_power_w * gains, m)))
    echo = scenario.target_amp_sq * float(
        np.real(np.vdot(wv, a @ v_cov @ a.conj().T @ wv)))
    den = inter + max(echo, 0.0) + scenario.noise_w * float(np.linalg.norm(wv) ** 2)
    return float(num / den)


def achievable_rate(scenario: Scenario, v_cov: np.ndarray, w: np.ndarray, m: int) -> float:
    return scenario.bandwidth_hz * float(np.log2(1.0 + receive_sinr(scenario, v_cov, w, m)))


def rates(scenario: Scenario, beam: BeamformingState) -> np.ndarray:
    return np.array([achievable_rate(scenario, beam.tx_cov, beam.rx_vecs[m], m)
                     for m in range(scenario.n_users)])


def phase_times(scenario: Scenario, alloc: AllocationState, r_m: float, m: int
                ) -> tuple[float, float, float]:
    """(local compute, uplink transmit, ALAP compute) durations for user m.

    Each phase is 0 when its workload is 0, even if its resource is 0.
    """
    l = alloc.offload_bits[m]
    local_bits = scenario.task_bits[m] - l
    t_loc = 0.0
    if local_bits > 0:
        if alloc.local_hz[m] <= 0:
            raise InfeasibleTiming(f"user {m}: local bits with zero local frequency")
        t_loc = scenario.cycles_per_bit[m] * local_bits / alloc.local_hz[m]
    t_tran = 0.0
    t_comp = 0.0
    if l > 0:
        if r_m <= 0:
            raise InfeasibleTiming(f"user {m}: offload bits with zero rate")
        if alloc.alap_hz[m] <= 0:
            raise InfeasibleTiming(f"user {m}: offload bits with zero ALAP frequency")
        t_tran = l / r_m
        t_comp = scenario.alap_cycles_per_bit * l / alloc.alap_hz[m]
    return t_loc, t_tran, t_comp


def beampattern_gain(v_cov, theta0: float) -> float:
    """Transmit power concentrated toward theta0: a_t^H V a_t."""
    v = as_hermitian(v_cov, atol=1e-9)
    a = steering_vector(theta0, v.shape[0])
    return float(np.real(np.vdot(a, v @ a)))


@dataclass(frozen=True)
class EnergyBreakdown:
    e_loc: float
    e_tran: float
    e_comp_alap: float
    e_tran_alap: float
    total: float


def energy_breakdown(scenario: Scenario, alloc: AllocationState,
                     beam: BeamformingState) -> EnergyBreakdown:
    """The four energy components and their sum, in joules."""
    r = rates(scenario, beam)
    e_loc = 0.0
    e_tran = 0.0
    e_comp = 0.0
    for m in range(scenario.n_users):
        _, t_tran, _ = phase_times(scenario, alloc, r[m], m)
        e_loc += (scenario.kappa[m] * alloc.local_hz[m] ** 2
                  * scenario.cycles_per_bit[m]
                  * (scenario.task_bits[m] - alloc.offload_bits[m]))
        e_tran += scenario.tx_power_w[m] * t_tran
        e_comp += (scenario.alap_kappa * alloc.alap_hz[m] ** 2
                   * scenario.alap_cycles_per_bit * alloc.offload_bits[m])
    e_tran_alap = scenario.slot_s * float(np.real(np.trace(beam.tx_cov)))
    total = e_loc + e_tran + e_comp + e_tran_alap
    return EnergyBreakdown(e_loc, e_tran, e_comp, e_tran_alap, total)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    slack: float
    ok: bool


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> list:
        return [c for c in self.checks if not c.ok]

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name: str, slack: float, scale: float) -> ConstraintCheck:
    return ConstraintCheck(name, slack, slack >= -FEAS_RTOL * max(scale, 1e-300))


def check_feasibility(scenario: Scenario, alloc: AllocationState,
                      beam: BeamformingState) -> ConstraintReport:
    """Per-constraint slack report; failures are recorded, never raised."""
    geo = geometry(scenario)
    r = rates(scenario, beam)
    tau = scenario.slot_s
    checks = []
    for m in range(scenario.n_users):
        wnorm2 = float(np.linalg.norm(beam.rx_vecs[m]) ** 2)
        checks.append(_check(f"rx_norm[{m}]", 1.0 - wnorm2, 1.0))
        l = alloc.offload_bits[m]
        big_l = scenario.task_bits[m]
        checks.append(_check(f"task_lower[{m}]", l, big_l))
        checks.append(_check(f"task_upper[{m}]", big_l - l, big_l))
        checks.append(_check(f"local_hz_lower[{m}]", alloc.local_hz[m], scenario.f_max_hz[m]))
        checks.append(_check(f"local_hz_upper[{m}]",
                             scenario.f_max_hz[m] - alloc.local_hz[m], scenario.f_max_hz[m]))
        checks.append(_check(f"alap_hz_lower[{m}]", alloc.alap_hz[m], scenario.alap_f_max_hz))
        try:
            t_loc, t_tran, t_comp = phase_times(scenario, alloc, r[m], m)
            checks.append(_check(f"local_time[{m}]", tau - t_loc, tau))
            checks.append(_check(f"offload_time[{m}]", tau - t_tran - t_comp, tau))
        except InfeasibleTiming:
            checks.append(ConstraintCheck(f"local_time[{m}]", -np.inf, False))
            checks.append(ConstraintCheck(f"offload_time[{m}]", -np.inf, False))
    checks.append(_check("alap_hz_budget",
                         scenario.alap_f_max_hz - float(np.sum(alloc.alap_hz)),
                         scenario.alap_f_max_hz))
    floor = geo.target_dist**2 * scenario.gamma_min
    gain = beampattern_gain(beam.tx_cov, geo.target_angle)
    checks.append(_check("sensing_gain", gain - floor, floor))
    return ConstraintReport(tuple(checks))
