"""Barrier interior-point solver for small smooth convex programs.

Problems mix Hermitian PSD matrix blocks with scalar variables, smooth
convex inequality constraints, and optional linear equality constraints.
Each Hermitian n x n block is parameterized by n^2 reals (n diagonal
entries, then interleaved re/im pairs for the upper off-diagonal entries)
so symmetry holds by construction.  The solver follows the central path
of t*f(x) - sum log(-g_k) - sum log det(block) with damped Newton steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NumericalFailure, StartInfeasible, ValidationError


@lru_cache(maxsize=None)
def hermitian_basis(n: int) -> np.ndarray:
    """Real basis of n x n Hermitian matrices matching the parameter order."""
    mats = []
    for i in range(n):
        b = np.zeros((n, n), dtype=complex)
        b[i, i] = 1.0
        mats.append(b)
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = 1.0
            b[j, i] = 1.0
            mats.append(b)
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = 1j
            b[j, i] = -1j
            mats.append(b)
    out = np.stack(mats)
    out.flags.writeable = False
    return out


def unpack_hermitian(x: np.ndarray, n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[np.diag_indices(n)] = x[:n]
    iu = np.triu_indices(n, 1)
    vals = x[n::2] + 1j * x[n + 1::2]
    m[iu] = vals
    m[(iu[1], iu[0])] = vals.conj()
    return m


def pack_hermitian(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    iu = np.triu_indices(n, 1)
    x = np.empty(n * n)
    x[:n] = np.real(np.diag(m))
    x[n::2] = np.real(m[iu])
    x[n + 1::2] = np.imag(m[iu])
    return x


def pack_gradient(c: np.ndarray) -> np.ndarray:
    """Gradient of x -> Re tr(C V(x)) in block parameters, for Hermitian C."""
    n = c.shape[0]
    iu = np.triu_indices(n, 1)
    g = np.empty(n * n)
    g[:n] = np.real(np.diag(c))
    g[n::2] = 2.0 * np.real(c[iu])
    g[n + 1::2] = 2.0 * np.imag(c[iu])
    return g


@dataclass(frozen=True)
class PSDBlock:
    name: str
    dim: int


@dataclass(frozen=True)
class ScalarVar:
    name: str
    lower: float | None = None
    upper: float | None = None


class LinearConstraint:
    """g(x) = coef . x + offset <= 0."""

    def __init__(self, coef, offset: float, name: str = ""):
        self.coef = np.asarray(coef, float)
        self.offset = float(offset)
        self.name = name

    def value(self, x: np.ndarray) -> float:
        return float(self.coef @ x + self.offset)

    def derivatives(self, x: np.ndarray):
        return self.value(x), self.coef, None


class SmoothConstraint:
    """g(x) <= 0 with callback-supplied derivatives.

    fun(x) must return (value, gradient, hessian_or_None); value_fun, when
    given, is a cheaper value-only path used during line searches.
    """

    def __init__(self, fun, value_fun=None, name: str = ""):
        self._fun = fun
        self._value_fun = value_fun
        self.name = name

    def value(self, x: np.ndarray) -> float:
        if self._value_fun is not None:
            return float(self._value_fun(x))
        return float(self._fun(x)[0])

    def derivatives(self, x: np.ndarray):
        return self._fun(x)


@dataclass
class SmoothConvexProblem:
    blocks: list
    scalars: list
    objective: object               # x -> (value, gradient, hessian)
    inequalities: list = field(default_factory=list)
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None

    def __post_init__(self):
        self.n_block_params = sum(b.dim * b.dim for b in self.blocks)
        self.dim = self.n_block_params + len(self.scalars)
        offsets = []
        off = 0
        for b in self.blocks:
            offsets.append(slice(off, off + b.dim * b.dim))
            off += b.dim * b.dim
        self._block_slices = offsets
        bounds = []
        for i, s in enumerate(self.scalars):
            idx = self.n_block_params + i
            if s.lower is not None:
                coef = np.zeros(self.dim)
                coef[idx] = -1.0
                bounds.append(LinearConstraint(coef, s.lower, name=f"{s.name}>= {s.lower}"))
            if s.upper is not None:
                coef = np.zeros(self.dim)
                coef[idx] = 1.0
                bounds.append(LinearConstraint(coef, -s.upper, name=f"{s.name}<= {s.upper}"))
        self._all_ineq = list(self.inequalities) + bounds
        if (self.eq_matrix is None) != (self.eq_rhs is None):
            raise ValidationError("equality matrix and rhs must come together")

    def block_slice(self, i: int) -> slice:
        return self._block_slices[i]

    def scalar_index(self, i: int) -> int:
        return self.n_block_params + i

    def all_inequalities(self) -> list:
        return self._all_ineq

    def block_matrices(self, x: np.ndarray) -> list:
        return [unpack_hermitian(x[self.block_slice(i)], b.dim)
                for i, b in enumerate(self.blocks)]


@dataclass(frozen=True)
class SolverParams:
    mu0: float = 1.0
    mu_shrink: float = 0.2
    newton_tol: float = 1e-8
    max_outer: int = 60
    max_newton: int = 50
    final_gap: float = 1e-7
    armijo: float = 1e-4
    step_shrink: float = 0.5
    kkt_tol: float = 1e-6

    def __post_init__(self):
        if min(self.mu0, self.newton_tol, self.final_gap) <= 0:
            raise ValidationError("solver parameters must be positive")
        if not 0 < self.mu_shrink < 1 or not 0 < self.step_shrink < 1:
            raise ValidationError("shrink factors must lie in (0, 1)")


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def within(self, tol: float) -> bool:
        return max(self.stationarity, self.primal, self.complementarity) <= tol


@dataclass
class SolverReport:
    status: str                     # Optimal | MaxIter | NumericalFailure
    iterations: int
    final_t: float
    gap: float
    residuals: KKTResiduals | None
    wall_s: float


@dataclass
class Duals:
    ineq: np.ndarray                # one multiplier per all_inequalities() entry
    blocks: list                    # one Hermitian PSD matrix per block


def _chol_pd(m: np.ndarray) -> np.ndarray | None:
    """Cholesky factor if strictly positive definite, else None."""
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def _barrier_value(problem: SmoothConvexProblem, x: np.ndarray) -> float | None:
    """Barrier part of the merit function; None when x is outside the domain."""
    phi = 0.0
    for g in problem.all_inequalities():
        s = -g.value(x)
        if s <= 0.0:
            return None
        phi -= np.log(s)
    for i, b in enumerate(problem.blocks):
        low = _chol_pd(unpack_hermitian(x[problem.block_slice(i)], b.dim))
        if low is None:
            return None
        phi -= 2.0 * float(np.sum(np.log(np.real(np.diag(low)))))
    return phi


def _newton_system(problem: SmoothConvexProblem, x: np.ndarray, t: float):
    fval, fgrad, fhess = problem.objective(x)
    grad = t * np.asarray(fgrad, float)
    hess = t * np.asarray(fhess, float).copy()
    for g in problem.all_inequalities():
        v, gg, gh = g.derivatives(x)
        s = -v
        grad += gg / s
        hess += np.outer(gg, gg) / (s * s)
        if gh is not None:
            hess += gh / s
    for i, b in enumerate(problem.blocks):
        sl = problem.block_slice(i)
        vmat = unpack_hermitian(x[sl], b.dim)
        vinv = np.linalg.inv(vmat)
        vinv = (vinv + vinv.conj().T) / 2.0
        basis = hermitian_basis(b.dim)
        grad[sl] -= pack_gradient(vinv)
        tmats = np.einsum("ab,pbc,cd->pad", vinv, basis, vinv)
        hess[np.ix_(range(sl.start, sl.stop), range(sl.start, sl.stop))] += np.real(
            np.einsum("pij,qji->pq", tmats, basis))
    return float(fval), grad, hess


def _solve_step(hess: np.ndarray, grad: np.ndarray,
                eq_a: np.ndarray | None) -> np.ndarray | None:
    reg = 0.0
    scale = 1.0 + float(np.linalg.norm(hess))
    for _ in range(6):
        h = hess + reg * np.eye(hess.shape[0]) if reg else hess
        try:
            if eq_a is None:
                step = np.linalg.solve(h, -grad)
            else:
                k = eq_a.shape[0]
                kkt = np.block([[h, eq_a.T], [eq_a, np.zeros((k, k))]])
                rhs = np.concatenate([-grad, np.zeros(k)])
                step = np.linalg.solve(kkt, rhs)[: grad.size]
            if np.all(np.isfinite(step)):
                return step
        except np.linalg.LinAlgError:
            pass
        reg = 1e-12 * scale if reg == 0.0 else reg * 100.0
    return None


def solve_smooth_convex(problem: SmoothConvexProblem, start: np.ndarray,
                        params: SolverParams | None = None
                        ) -> tuple[np.ndarray, Duals, SolverReport]:
    """Path-following barrier minimization from a strictly feasible start."""
    params = params or SolverParams()
    t0 = time.perf_counter()
    x = np.asarray(start, float).copy()
    if x.shape != (problem.dim,):
        raise ValidationError(f"start point has wrong dimension {x.shape}")
    if problem.eq_matrix is not None:
        if np.linalg.norm(problem.eq_matrix @ x - problem.eq_rhs) > 1e-9:
            raise StartInfeasible("start violates the equality constraints")
    if _barrier_value(problem, x) is None:
        raise StartInfeasible("start point is not strictly feasible")

    m_total = len(problem.all_inequalities()) + sum(b.dim for b in problem.blocks)
    t = params.mu0
    iterations = 0
    for _ in range(params.max_outer):
        fval, grad, hess = _newton_system(problem, x, t)
        psi = t * fval + _barrier_value(problem, x)
        for _ in range(params.max_newton):
            step = _solve_step(hess, grad, problem.eq_matrix)
            if step is None:
                raise NumericalFailure("Newton system unsolvable", point=x)
            decrement2 = float(-grad @ step)
            if decrement2 / 2.0 <= params.newton_tol:
                break
            slope = float(grad @ step)
            alpha = 1.0
            accepted = False
            while alpha > 1e-16:
                x_new = x + alpha * step
                bar = _barrier_value(problem, x_new)
                if bar is not None:
                    psi_new = t * problem.objective(x_new)[0] + bar
                    if psi_new <= psi + params.armijo * alpha * slope:
                        accepted = True
                        break
                alpha *= params.step_shrink
            if not accepted:
                if decrement2 / 2.0 <= 1e3 * params.newton_tol:
                    break  # effectively centered; move to the next stage
                raise NumericalFailure(
                    "line search failed before centering", point=x)
            x = x_new
            psi = psi_new
            iterations += 1
            fval, grad, hess = _newton_system(problem, x, t)
        if m_total / t <= params.final_gap:
            break
        t /= params.mu_shrink

    duals = _barrier_duals(problem, x, t)
    residuals = kkt_residuals(problem, x, duals)
    gap = m_total / t
    status = "Optimal" if (gap <= params.final_gap
                           and residuals.within(params.kkt_tol)) else "MaxIter"
    report = SolverReport(status=status, iterations=iterations, final_t=t,
                          gap=gap, residuals=residuals,
                          wall_s=time.perf_counter() - t0)
    return x, duals, report


def _barrier_duals(problem: SmoothConvexProblem, x: np.ndarray, t: float) -> Duals:
    mus = np.array([1.0 / (t * (-g.value(x))) for g in problem.all_inequalities()])
    zs = []
    for i, b in enumerate(problem.blocks):
        vinv = np.linalg.inv(unpack_hermitian(x[problem.block_slice(i)], b.dim))
        zs.append((vinv + vinv.conj().T) / (2.0 * t))
    return Duals(ineq=mus, blocks=zs)


def kkt_residuals(problem: SmoothConvexProblem, point: np.ndarray,
                  duals: Duals) -> KKTResiduals:
    """First-order optimality residuals at (point, duals).

    Stationarity is normalized by (1 + ||grad f||); primal feasibility is
    the worst constraint violation; complementarity sums |mu_k g_k| plus
    the block pairings <Z, V>.
    """
    x = np.asarray(point, float)
    _, fgrad, _ = problem.objective(x)
    resid = np.asarray(fgrad, float).copy()
    comp = 0.0
    primal = 0.0
    for g, mu in zip(problem.all_inequalities(), duals.ineq):
        v, gg, _ = g.derivatives(x)
        resid += mu * gg
        comp += abs(mu * v)
        primal = max(primal, v)
    for i, (b, z) in enumerate(zip(problem.blocks, duals.blocks)):
        sl = problem.block_slice(i)
        vmat = unpack_hermitian(x[sl], b.dim)
        resid[sl] -= pack_gradient(z)
        comp += abs(float(np.real(np.trace(z @ vmat))))
        primal = max(primal, -float(np.min(np.linalg.eigvalsh(vmat))))
    if problem.eq_matrix is not None:
        primal = max(primal, float(np.max(np.abs(problem.eq_matrix @ x - problem.eq_rhs))))
        # absorb the equality duals: least-squares nu, residual in the nullspace
        nu = np.linalg.lstsq(problem.eq_matrix.T, resid, rcond=None)[0]
        resid = resid - problem.eq_matrix.T @ nu
    stat = float(np.linalg.norm(resid)) / (1.0 + float(np.linalg.norm(fgrad)))
    return KKTResiduals(stationarity=stat, primal=max(primal, 0.0),
                        complementarity=comp)


def check_derivatives(problem: SmoothConvexProblem, x: np.ndarray,
                      step: float = 1e-6) -> float:
    """Worst relative error of supplied gradients/Hessians vs central differences."""
    x = np.asarray(x, float)
    worst = 0.0

    def probe(fun, grad, hess):
        nonlocal worst
        n = x.size
        for i in range(n):
            h = step * (1.0 + abs(x[i]))
            e = np.zeros(n)
            e[i] = h
            d_val = (fun(x + e) - fun(x - e)) / (2.0 * h)
            scale = max(1.0, abs(grad[i]), abs(d_val))
            worst = max(worst, abs(d_val - grad[i]) / scale)
            if hess is not None:
                _, gp, _ = derivs(x + e)
                _, gm, _ = derivs(x - e)
                d_row = (gp - gm) / (2.0 * h)
                row_scale = max(1.0, float(np.max(np.abs(hess[i]))),
                                float(np.max(np.abs(d_row))))
                worst = max(worst, float(np.max(np.abs(d_row - hess[i]))) / row_scale)

    derivs = problem.objective
    val, grad, hess = derivs(x)
    probe(lambda y: problem.objective(y)[0], np.asarray(grad, float),
          np.asarray(hess, float))
    for g in problem.inequalities:
        if isinstance(g, LinearConstraint):
            continue
        derivs = g.derivatives
        _, grad, hess = derivs(x)
        probe(lambda y, gg=g: gg.value(y), np.asarray(grad, float),
              None if hess is None else np.asarray(hess, float))
    return worst
