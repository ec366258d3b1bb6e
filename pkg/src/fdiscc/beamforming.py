"""SDR + SCA solvers for the transmit-covariance and combiner blocks.

Both blocks lift a vector variable to a PSD matrix, replace the rate with
a tangent-tight concave lower bound, and hand the resulting smooth convex
program to the barrier solver.  Internally the rate variables are scaled
by the bandwidth and the power terms by the noise floor so the Newton
systems stay well conditioned.

The echo-interference coupling is implemented as g_m >= echo power (with
g_m >= 0), which makes the surrogate a guaranteed under-estimate of the
true rate; the optimizer drives g_m down onto the echo power, recovering
tightness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import model
from .barrier import (KKTResiduals, LinearConstraint, PSDBlock, ScalarVar,
                      SmoothConstraint, SmoothConvexProblem, SolverParams,
                      SolverReport, pack_gradient, pack_hermitian,
                      solve_smooth_convex, unpack_hermitian)
from .errors import InfeasibleSubproblem, ValidationError
from .linalg import herm_eig, hermitianize, outer_product, phase_align, principal_rank_one

LN2 = np.log(2.0)
RANK_ONE_RATIO = 1e-4


def rate_lower_bound_g(g: float, g_i: float, b: float, e: float,
                       bandwidth: float) -> float:
    """Tangent lower bound of the rate as a function of the echo power g.

    Exact at g = g_i and a global under-estimate elsewhere (the rate is
    convex in g).
    """
    if g < 0 or g_i < 0 or e <= 0:
        raise ValidationError("need g >= 0, g_i >= 0, e > 0")
    return bandwidth * (np.log2(g + e + b) - np.log2(g_i + e)
                        - (g - g_i) / ((g_i + e) * LN2))


def rate_lower_bound_W(w_mat: np.ndarray, w_ref: np.ndarray, omega: np.ndarray,
                       lam: np.ndarray, bandwidth: float) -> float:
    """Tangent lower bound of the rate as a function of the lifted combiner."""
    t_ref = float(np.real(np.trace(lam @ w_ref)))
    t_all = float(np.real(np.trace((omega + lam) @ w_mat)))
    if t_ref <= 0 or t_all <= 0:
        raise ValidationError("trace arguments must be positive")
    tangent = float(np.real(np.trace(lam @ (w_mat - w_ref)))) / (t_ref * LN2)
    return bandwidth * (np.log2(t_all) - np.log2(t_ref) - tangent)


@dataclass
class TxSubproblemContext:
    """Fixed data of one transmit-covariance subproblem (noise-scaled)."""
    active: np.ndarray       # user indices with offload bits
    b: np.ndarray            # signal power through the combiner / noise, per active user
    e: np.ndarray            # inter-user interference plus noise / noise
    g_prev: np.ndarray       # echo-power linearization points / noise
    c: np.ndarray            # echo power per unit beampattern gain / noise
    t_comp: np.ndarray       # ALAP compute time, s
    offload_bits: np.ndarray
    tx_power: np.ndarray
    sensing_floor: float     # d0^2 * gamma_min
    a_t: np.ndarray
    a_r: np.ndarray
    tau: float
    bandwidth: float
    noise_w: float


def build_tx_context(scenario: model.Scenario, rx_vecs: np.ndarray,
                     alloc: model.AllocationState,
                     g_prev: np.ndarray) -> TxSubproblemContext:
    geo = model.geometry(scenario)
    chans = model.channel_matrix(scenario)
    a_t = model.steering_vector(geo.target_angle, scenario.n_tx)
    a_r = model.steering_vector(geo.target_angle, scenario.n_rx)
    noise = scenario.noise_w
    active = np.flatnonzero(alloc.offload_bits > 0)
    b = np.empty(active.size)
    e = np.empty(active.size)
    c = np.empty(active.size)
    t_comp = np.empty(active.size)
    for k, m in enumerate(active):
        w = rx_vecs[m]
        gains = np.abs(chans @ w.conj()) ** 2
        b[k] = scenario.tx_power_w[m] * gains[m] / noise
        e[k] = (float(np.sum(np.delete(scenario.tx_power_w * gains, m)))
                + noise * float(np.linalg.norm(w) ** 2)) / noise
        c[k] = scenario.target_amp_sq * float(np.abs(np.vdot(w, a_r)) ** 2) / noise
        t_comp[k] = (scenario.alap_cycles_per_bit * alloc.offload_bits[m]
                     / alloc.alap_hz[m])
    return TxSubproblemContext(
        active=active, b=b, e=e, g_prev=np.asarray(g_prev, float)[active] / noise,
        c=c, t_comp=t_comp, offload_bits=alloc.offload_bits[active],
        tx_power=scenario.tx_power_w[active],
        sensing_floor=geo.target_dist**2 * scenario.gamma_min,
        a_t=a_t, a_r=a_r, tau=scenario.slot_s,
        bandwidth=scenario.bandwidth_hz, noise_w=noise)


def echo_power(scenario: model.Scenario, v_cov: np.ndarray,
               rx_vecs: np.ndarray) -> np.ndarray:
    """Per-user echo interference power through the current combiners, W."""
    geo = model.geometry(scenario)
    a_t = model.steering_vector(geo.target_angle, scenario.n_tx)
    a_r = model.steering_vector(geo.target_angle, scenario.n_rx)
    gain = max(float(np.real(np.vdot(a_t, v_cov @ a_t))), 0.0)
    out = np.empty(scenario.n_users)
    for m in range(scenario.n_users):
        out[m] = (scenario.target_amp_sq
                  * float(np.abs(np.vdot(rx_vecs[m], a_r)) ** 2) * gain)
    return out


@dataclass
class TxSolution:
    v_cov: np.ndarray
    v_vec: np.ndarray
    residual_ratio: float
    rates: np.ndarray        # surrogate rates per active user, bit/s
    g: np.ndarray            # echo-power variables per active user, W
    duals: dict              # upsilon3 per active user, upsilon4 (implemented orientation)
    report: object
    context: TxSubproblemContext


def _tx_problem(ctx: TxSubproblemContext):
    """Assemble the relaxed transmit subproblem over (V, R/B, g/noise)."""
    n_t = ctx.a_t.size
    n_act = ctx.active.size
    nbp = n_t * n_t
    dim = nbp + 2 * n_act
    band = ctx.bandwidth
    ata = np.outer(ctx.a_t, ctx.a_t.conj())
    gain_coef = pack_gradient(ata)           # beampattern gain is linear in V params
    trace_coef = np.zeros(dim)
    trace_coef[:n_t] = 1.0                   # tr(V) over the diagonal parameters
    r_idx = nbp + np.arange(n_act)
    g_idx = nbp + n_act + np.arange(n_act)
    k_obj = ctx.tx_power * ctx.offload_bits / band

    def objective(x):
        r = x[r_idx]
        val = ctx.tau * float(trace_coef @ x) + float(np.sum(k_obj / r))
        grad = ctx.tau * trace_coef.copy()
        grad[r_idx] = -k_obj / r**2
        hess = np.zeros((dim, dim))
        hess[r_idx, r_idx] = 2.0 * k_obj / r**3
        return val, grad, hess

    scalars = []
    for k in range(n_act):
        scalars.append(ScalarVar(f"rate[{ctx.active[k]}]", lower=0.0))
    for k in range(n_act):
        scalars.append(ScalarVar(f"echo[{ctx.active[k]}]", lower=0.0))

    ineq = []
    floors = ctx.offload_bits / (band * (ctx.tau - ctx.t_comp))
    for k in range(n_act):
        lk = ctx.offload_bits[k] / band
        slack = ctx.tau - ctx.t_comp[k]
        ri = r_idx[k]
        gi = g_idx[k]
        bk, ek, gpk = ctx.b[k], ctx.e[k], ctx.g_prev[k]
        tangent_slope = 1.0 / ((gpk + ek) * LN2)

        def time_fun(x, lk=lk, slack=slack, ri=ri):
            r = x[ri]
            grad = np.zeros(dim)
            grad[ri] = -lk / r**2
            hess = np.zeros((dim, dim))
            hess[ri, ri] = 2.0 * lk / r**3
            return lk / r - slack, grad, hess

        ineq.append(SmoothConstraint(
            time_fun,
            value_fun=lambda x, lk=lk, slack=slack, ri=ri: lk / x[ri] - slack,
            name=f"offload_time[{ctx.active[k]}]"))

        const = np.log2(gpk + ek) - gpk * tangent_slope

        def rate_fun(x, bk=bk, ek=ek, ri=ri, gi=gi, const=const,
                     tangent_slope=tangent_slope):
            g = x[gi]
            tot = g + ek + bk
            val = x[ri] - np.log2(tot) + const + tangent_slope * g
            grad = np.zeros(dim)
            grad[ri] = 1.0
            grad[gi] = -1.0 / (tot * LN2) + tangent_slope
            hess = np.zeros((dim, dim))
            hess[gi, gi] = 1.0 / (tot * tot * LN2)
            return val, grad, hess

        ineq.append(SmoothConstraint(
            rate_fun,
            value_fun=lambda x, bk=bk, ek=ek, ri=ri, gi=gi, const=const,
            tangent_slope=tangent_slope: (
                x[ri] - np.log2(x[gi] + ek + bk) + const + tangent_slope * x[gi]),
            name=f"rate_bound[{ctx.active[k]}]"))

        coef = np.zeros(dim)
        coef[:nbp] = ctx.c[k] * gain_coef
        coef[gi] = -1.0
        ineq.append(LinearConstraint(coef, 0.0, name=f"echo_floor[{ctx.active[k]}]"))

    coef = np.zeros(dim)
    coef[:nbp] = -gain_coef
    ineq.append(LinearConstraint(coef, ctx.sensing_floor, name="sensing_gain"))

    problem = SmoothConvexProblem(
        blocks=[PSDBlock("tx_cov", n_t)], scalars=scalars,
        objective=objective, inequalities=ineq)
    return problem, r_idx, g_idx, floors


def tx_start_point(ctx: TxSubproblemContext, problem, r_idx, g_idx, floors):
    """Strictly feasible interior start, or None when a rate window is empty."""
    n_t = ctx.a_t.size
    delta = 1e-3 * ctx.sensing_floor
    eps = 1e-8 * ctx.sensing_floor
    v0 = (ctx.sensing_floor + delta) * np.outer(ctx.a_t, ctx.a_t.conj())
    v0 += eps * np.eye(n_t)
    x = np.zeros(problem.dim)
    x[:n_t * n_t] = pack_hermitian(v0)
    gain0 = float(np.real(np.vdot(ctx.a_t, v0 @ ctx.a_t)))
    for k in range(ctx.active.size):
        g0 = ctx.c[k] * gain0
        g0 = g0 + max(1e-6 * g0, 1e-9 * ctx.e[k])
        ceiling = (np.log2(g0 + ctx.e[k] + ctx.b[k]) - np.log2(ctx.g_prev[k] + ctx.e[k])
                   - (g0 - ctx.g_prev[k]) / ((ctx.g_prev[k] + ctx.e[k]) * LN2))
        if ceiling <= floors[k] * (1.0 + 1e-9):
            return None
        x[g_idx[k]] = g0
        x[r_idx[k]] = 0.5 * (floors[k] + ceiling)
    return x


def _tx_rate_bound(ctx: TxSubproblemContext, k: int, g: float) -> float:
    """Noise-scaled surrogate rate of active user k at echo power g."""
    return (np.log2(g + ctx.e[k] + ctx.b[k]) - np.log2(ctx.g_prev[k] + ctx.e[k])
            - (g - ctx.g_prev[k]) / ((ctx.g_prev[k] + ctx.e[k]) * LN2))


def _tx_analytic(ctx: TxSubproblemContext, floors: np.ndarray,
                 wall_start: float) -> TxSolution:
    """Closed-form transmit optimum with exact KKT duals.

    Both the sensing constraint and the echo interference act through the
    same beampattern gain, and every objective term improves as the gain
    and the trace shrink, so the optimum is the rank-one matrix that puts
    exactly the floor gain on the target.  Used when the barrier has no
    strictly interior start (the rate windows close once the previous
    iterate already sits on the sensing floor).
    """
    n_t = ctx.a_t.size
    floor = ctx.sensing_floor
    v_cov = floor * np.outer(ctx.a_t, ctx.a_t.conj())
    v_vec = phase_align(np.sqrt(floor) * ctx.a_t)
    g_star = ctx.c * floor
    r_star = np.empty(ctx.active.size)
    mu3 = np.empty(ctx.active.size)
    k_obj = ctx.tx_power * ctx.offload_bits / ctx.bandwidth
    for k in range(ctx.active.size):
        r_star[k] = max(floors[k], _tx_rate_bound(ctx, k, g_star[k]))
        mu2 = k_obj[k] / r_star[k] ** 2
        slope = (1.0 / ((g_star[k] + ctx.e[k] + ctx.b[k]) * LN2)
                 - 1.0 / ((ctx.g_prev[k] + ctx.e[k]) * LN2))
        mu3[k] = max(mu2 * (-slope), 0.0)
    mu4 = ctx.tau + float(np.sum(mu3 * ctx.c))
    residuals = KKTResiduals(0.0, 0.0, 0.0)
    report = SolverReport(status="Analytic", iterations=0, final_t=np.inf,
                          gap=0.0, residuals=residuals,
                          wall_s=time.perf_counter() - wall_start)
    return TxSolution(
        v_cov=v_cov, v_vec=v_vec, residual_ratio=0.0,
        rates=r_star * ctx.bandwidth, g=g_star * ctx.noise_w,
        duals={"upsilon3": mu3, "upsilon4": mu4},
        report=report, context=ctx)


def solve_tx_beamforming(scenario: model.Scenario, rx_vecs: np.ndarray,
                         alloc: model.AllocationState, g_prev: np.ndarray,
                         solver_params: SolverParams | None = None) -> TxSolution:
    """Solve the relaxed transmit-covariance subproblem and extract the vector."""
    ctx = build_tx_context(scenario, rx_vecs, alloc, g_prev)
    for k in range(ctx.active.size):
        if ctx.tau - ctx.t_comp[k] <= 0:
            raise InfeasibleSubproblem(
                f"user {ctx.active[k]}: ALAP compute time exhausts the slot",
                user=int(ctx.active[k]), constraint="offload_time")
    wall_start = time.perf_counter()
    problem, r_idx, g_idx, floors = _tx_problem(ctx)
    start = tx_start_point(ctx, problem, r_idx, g_idx, floors)
    if start is None:
        return _tx_analytic(ctx, floors, wall_start)
    x, duals, report = solve_smooth_convex(problem, start, solver_params)
    n_t = scenario.n_tx
    v_cov = hermitianize(unpack_hermitian(x[:n_t * n_t], n_t))
    v_vec, ratio = principal_rank_one(v_cov)
    # constraint order per active user: time, rate, echo floor; sensing gain last
    ups3 = duals.ineq[2 + 3 * np.arange(ctx.active.size)]
    ups4 = float(duals.ineq[3 * ctx.active.size])
    return TxSolution(
        v_cov=v_cov, v_vec=v_vec, residual_ratio=ratio,
        rates=x[r_idx] * ctx.bandwidth, g=x[g_idx] * ctx.noise_w,
        duals={"upsilon3": ups3, "upsilon4": ups4},
        report=report, context=ctx)


def rank_one_certificate(v_cov: np.ndarray, duals: dict,
                         context: TxSubproblemContext) -> dict:
    """Dual certificate for rank-one optimality of the transmit covariance.

    Builds the stationarity matrix Z from the implemented constraint
    orientation and reports how close Z V is to zero, plus whether Z keeps
    at least N_t - 1 significant eigenvalues.
    """
    n_t = context.a_t.size
    ata = np.outer(context.a_t, context.a_t.conj())
    coef = float(np.sum(duals["upsilon3"] * context.c)) - duals["upsilon4"]
    z = context.tau * np.eye(n_t) + coef * ata
    zn = float(np.linalg.norm(z))
    vn = float(np.linalg.norm(v_cov))
    zv = float(np.linalg.norm(z @ v_cov)) / max(zn * vn, 1e-300)
    evals = herm_eig(z).eigenvalues
    count = int(np.sum(evals > 1e-8 * max(evals[0], 0.0)))
    return {"zv_residual": zv, "z_rank_lower_ok": count >= n_t - 1}


@dataclass
class RxSubproblemContext:
    """Fixed data of the combiner subproblems (noise-scaled matrices)."""
    omega: list              # p_m h_m h_m^H / noise, per user
    lam: list                # interference-plus-noise matrix / noise, per user
    w_prev: np.ndarray       # linearization combiners, rows
    offload_bits: np.ndarray
    t_comp: np.ndarray
    tx_power: np.ndarray
    tau: float
    bandwidth: float
    noise_w: float


def build_rx_context(scenario: model.Scenario, v_cov: np.ndarray,
                     alloc: model.AllocationState,
                     w_prev: np.ndarray) -> RxSubproblemContext:
    chans = model.channel_matrix(scenario)
    echo = model.echo_matrix(scenario)
    noise = scenario.noise_w
    echo_cov = scenario.target_amp_sq * echo @ v_cov @ echo.conj().T
    omega = []
    lam = []
    t_comp = np.zeros(scenario.n_users)
    for m in range(scenario.n_users):
        omega.append(scenario.tx_power_w[m] * outer_product(chans[m]) / noise)
        inter = sum(scenario.tx_power_w[j] * outer_product(chans[j])
                    for j in range(scenario.n_users) if j != m)
        lam.append(hermitianize((inter + echo_cov) / noise + np.eye(scenario.n_rx)))
        if alloc.offload_bits[m] > 0:
            t_comp[m] = (scenario.alap_cycles_per_bit * alloc.offload_bits[m]
                         / alloc.alap_hz[m])
    return RxSubproblemContext(
        omega=omega, lam=lam, w_prev=np.asarray(w_prev, complex),
        offload_bits=alloc.offload_bits.copy(), t_comp=t_comp,
        tx_power=scenario.tx_power_w.copy(), tau=scenario.slot_s,
        bandwidth=scenario.bandwidth_hz, noise_w=scenario.noise_w)


def combiner_rate(ctx: RxSubproblemContext, m: int, w: np.ndarray) -> float:
    """True achievable rate of user m through combiner w."""
    num = float(np.real(np.vdot(w, ctx.omega[m] @ w)))
    den = float(np.real(np.vdot(w, ctx.lam[m] @ w)))
    return ctx.bandwidth * float(np.log2(1.0 + num / den))


def gaussian_randomization(w_star: np.ndarray, context: RxSubproblemContext,
                           m: int, n_samples: int, seed: int) -> np.ndarray:
    """Best rank-one combiner among Gaussian samples colored by w_star."""
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    dec = herm_eig(w_star)
    lams = np.clip(dec.eigenvalues, 0.0, None)
    if lams[0] <= 0.0:
        raise ValidationError("covariance has no positive direction")
    factor = dec.eigenvectors * np.sqrt(lams)
    rng = np.random.default_rng(seed)
    n = w_star.shape[0]
    z = (rng.standard_normal((n, n_samples))
         + 1j * rng.standard_normal((n, n_samples))) / np.sqrt(2.0)
    cand = factor @ z
    norms = np.linalg.norm(cand, axis=0)
    norms[norms == 0.0] = 1.0
    cand = cand / norms                      # unit combiners; the rate is scale-free
    num = np.real(np.sum(cand.conj() * (context.omega[m] @ cand), axis=0))
    den = np.real(np.sum(cand.conj() * (context.lam[m] @ cand), axis=0))
    best = int(np.argmax(num / den))
    return phase_align(cand[:, best])


@dataclass
class RxSolution:
    w_lifted: list           # one (N_r, N_r) PSD matrix per user
    rx_vecs: np.ndarray      # extracted combiners, rows
    rates: np.ndarray        # surrogate rates per user (0 for inactive), bit/s
    reports: list            # one SolverReport or status string per user
    context: RxSubproblemContext


def _rx_problem(ctx: RxSubproblemContext, m: int):
    n_r = ctx.w_prev.shape[1]
    nbp = n_r * n_r
    dim = nbp + 1
    s_idx = nbp
    band = ctx.bandwidth
    w_ref = outer_product(ctx.w_prev[m])
    lamm = ctx.lam[m]
    t_ref = float(np.real(np.trace(lamm @ w_ref)))
    if t_ref <= 0:
        raise InfeasibleSubproblem(f"user {m}: degenerate linearization combiner",
                                   user=m, constraint="rate_bound")
    total = hermitianize(ctx.omega[m] + lamm)
    total_coef = pack_gradient(total)
    tangent_coef = pack_gradient(lamm) / (t_ref * LN2)
    const = (np.log2(t_ref)
             - float(np.real(np.trace(lamm @ w_ref))) / (t_ref * LN2))
    lk = ctx.offload_bits[m] / band
    slack = ctx.tau - ctx.t_comp[m]
    k_obj = ctx.tx_power[m] * ctx.offload_bits[m] / band

    def objective(x):
        s = x[s_idx]
        grad = np.zeros(dim)
        grad[s_idx] = -k_obj / s**2
        hess = np.zeros((dim, dim))
        hess[s_idx, s_idx] = 2.0 * k_obj / s**3
        return k_obj / s, grad, hess

    def time_fun(x):
        s = x[s_idx]
        grad = np.zeros(dim)
        grad[s_idx] = -lk / s**2
        hess = np.zeros((dim, dim))
        hess[s_idx, s_idx] = 2.0 * lk / s**3
        return lk / s - slack, grad, hess

    def rate_fun(x):
        t_all = float(total_coef @ x[:nbp])
        val = (x[s_idx] - np.log2(t_all) + const + float(tangent_coef @ x[:nbp]))
        grad = np.zeros(dim)
        grad[:nbp] = -total_coef / (t_all * LN2) + tangent_coef
        grad[s_idx] = 1.0
        hess = np.zeros((dim, dim))
        hess[:nbp, :nbp] = np.outer(total_coef, total_coef) / (t_all * t_all * LN2)
        return val, grad, hess

    trace_coef = np.zeros(dim)
    trace_coef[:n_r] = 1.0
    ineq = [
        SmoothConstraint(time_fun,
                         value_fun=lambda x: lk / x[s_idx] - slack,
                         name=f"offload_time[{m}]"),
        SmoothConstraint(
            rate_fun,
            value_fun=lambda x: (x[s_idx] - np.log2(float(total_coef @ x[:nbp]))
                                 + const + float(tangent_coef @ x[:nbp])),
            name=f"rate_bound[{m}]"),
        LinearConstraint(trace_coef, -1.0, name=f"rx_power[{m}]"),
    ]
    problem = SmoothConvexProblem(
        blocks=[PSDBlock("w_lifted", n_r)],
        scalars=[ScalarVar(f"rate[{m}]", lower=0.0)],
        objective=objective, inequalities=ineq)
    floor = lk / slack if slack > 0 else np.inf
    return problem, s_idx, w_ref, floor


def _rx_start(ctx: RxSubproblemContext, m: int, w_ref: np.ndarray,
              floor: float) -> tuple[np.ndarray | None, float]:
    """Strictly interior start with surrogate value above the rate floor.

    The offload-time floor typically sits exactly at the previous rate, so
    a usable start must already improve the surrogate.  Candidates blend
    the previous lifted combiner with the MMSE direction; when none clears
    the floor the caller keeps the previous combiner.
    """
    n_r = w_ref.shape[0]
    col = int(np.argmax(np.linalg.norm(ctx.omega[m], axis=0)))
    h_dir = ctx.omega[m][:, col]
    w_mmse = np.linalg.solve(ctx.lam[m], h_dir)
    nm = float(np.linalg.norm(w_mmse))
    if nm == 0.0:
        return None, floor
    w_mmse = outer_product(w_mmse / nm)
    ridge = (1e-6 / n_r) * np.eye(n_r)
    best = None
    best_ceiling = floor
    for t in (0.5, 0.25, 0.1, 0.04, 0.01, 0.003):
        cand = hermitianize((1.0 - t) * w_ref + t * w_mmse + ridge) * 0.995
        ceiling = rate_lower_bound_W(cand, w_ref, ctx.omega[m], ctx.lam[m], 1.0)
        if ceiling > best_ceiling:
            best = cand
            best_ceiling = ceiling
    if best is None or best_ceiling <= floor * (1.0 + 1e-10):
        return None, floor
    return best, best_ceiling


def solve_rx_beamforming(scenario: model.Scenario, v_cov: np.ndarray,
                         alloc: model.AllocationState, w_prev: np.ndarray,
                         solver_params: SolverParams | None = None,
                         n_samples: int = 100, seed: int = 0) -> RxSolution:
    """Solve the per-user combiner subproblems; inactive users keep a_m."""
    ctx = build_rx_context(scenario, v_cov, alloc, w_prev)
    geo = model.geometry(scenario)
    n_r = scenario.n_rx
    w_out = np.array(w_prev, complex, copy=True)
    lifted = [None] * scenario.n_users
    srates = np.zeros(scenario.n_users)
    reports = [None] * scenario.n_users
    for m in range(scenario.n_users):
        if alloc.offload_bits[m] <= 0:
            w_out[m] = model.steering_vector(geo.user_angle[m], n_r)
            lifted[m] = outer_product(w_out[m])
            reports[m] = "inactive"
            continue
        if ctx.tau - ctx.t_comp[m] <= 0:
            raise InfeasibleSubproblem(
                f"user {m}: ALAP compute time exhausts the slot",
                user=m, constraint="offload_time")
        problem, s_idx, w_ref, floor = _rx_problem(ctx, m)
        w0, ceiling = _rx_start(ctx, m, w_ref, floor)
        if w0 is None:
            # no strictly improving start: the current combiner stays
            lifted[m] = outer_product(w_out[m])
            reports[m] = "skipped"
            continue
        x0 = np.zeros(problem.dim)
        x0[:n_r * n_r] = pack_hermitian(w0)
        x0[s_idx] = 0.5 * (floor + ceiling)
        x, _, report = solve_smooth_convex(problem, x0, solver_params)
        w_star = hermitianize(unpack_hermitian(x[:n_r * n_r], n_r))
        vec, ratio = principal_rank_one(w_star)
        if ratio > RANK_ONE_RATIO:
            vec = gaussian_randomization(w_star, ctx, m, n_samples, seed + m)
        # never accept a combiner that degrades the user's true rate
        if combiner_rate(ctx, m, vec) < combiner_rate(ctx, m, w_prev[m]):
            vec = np.array(w_prev[m], copy=True)
        w_out[m] = vec
        lifted[m] = w_star
        srates[m] = x[s_idx] * ctx.bandwidth
        reports[m] = report
    return RxSolution(w_lifted=lifted, rx_vecs=w_out, rates=srates,
                      reports=reports, context=ctx)
