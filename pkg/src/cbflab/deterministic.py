"""Time integration of the damped momentum equation and the singleton finder.

Scheme: the Stokes part is handled exactly by an exponential integrating
factor in Fourier space; advection, damping and the Darcy term go through an
explicit two-stage Runge-Kutta (Heun) stage, so the overall order is two and
there is no stiff diffusive step restriction.  An advective CFL guard aborts
instead of sub-stepping, which keeps trajectories bit-reproducible for a
given (initial data, h).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .conditions import ConditionReport, check_singleton_condition, default_regime
from .errors import BlowUpError, CFLViolationError, ValidationError
from .fields import SpectralVelocity, random_field
from .grid import TorusGrid
from .operators import (
    bilinear_kernel,
    damping_kernel,
    h_norm_kernel,
    inner_h_kernel,
    lr_norm_kernel,
    v_norm_kernel,
)
from .params import EstimateConstants, PhysicsParams

logger = logging.getLogger(__name__)

DEFAULT_CFL_SAFETY = 0.4
DEFAULT_BLOWUP_GUARD = 1.0e6


@dataclass
class Trajectory:
    """Per-step norm series plus field snapshots at sample times."""

    grid: TorusGrid
    h: float
    t: np.ndarray
    h_norm: np.ndarray
    v_norm: np.ndarray
    f_dot_u: np.ndarray
    lr_norm: np.ndarray | None
    r: float
    sample_times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    last_drift: float = 0.0

    @property
    def final_state(self) -> SpectralVelocity:
        return self.states[-1]

    def rows(self, residual: np.ndarray | None = None):
        """CSV rows (t, h_norm, v_norm, lr_norm, energy_residual)."""
        lr = self.lr_norm if self.lr_norm is not None else np.zeros_like(self.t)
        res = residual if residual is not None else np.zeros_like(self.t)
        for i in range(len(self.t)):
            yield (self.t[i], self.h_norm[i], self.v_norm[i], lr[i], res[i])


def _deterministic_rhs(grid, params, f_coeffs):
    """Right-hand side f - B(u) - beta C(u) - darcy u, with a CFL diagnostic.

    Terms that are identically zero are skipped rather than added, so reduced
    settings (beta = 0, f = 0, darcy = 0) execute exactly the arithmetic of
    the reduced equation.
    """
    beta, r, darcy = params.beta, params.r, params.darcy

    def rhs(coeffs):
        adv, vmax = bilinear_kernel(grid, coeffs)
        out = -adv
        if beta != 0.0:
            out -= beta * damping_kernel(grid, coeffs, r)
        if darcy != 0.0:
            out -= darcy * coeffs
        if f_coeffs is not None:
            out += f_coeffs
        return out, vmax

    return rhs


def integrating_factor(grid: TorusGrid, mu: float, h: float) -> np.ndarray:
    return np.exp(-(mu * grid.lambda1 * h) * grid.k2)


def drive(
    grid: TorusGrid,
    u0_coeffs: np.ndarray,
    rhs,
    mu: float,
    h: float,
    n_steps: int,
    *,
    sample_every: int = 0,
    record_lr: float | None = None,
    cfl_safety: float = DEFAULT_CFL_SAFETY,
    blowup_guard: float = DEFAULT_BLOWUP_GUARD,
    t0: float = 0.0,
    f_coeffs: np.ndarray | None = None,
):
    """Integrating-factor Heun loop shared by every solver in the package.

    ``rhs(coeffs, step_index)`` returns (tendency, vmax); it is evaluated at
    the step's left endpoint for both stages, so any time dependence is
    treated as frozen within a step.  Returns a Trajectory whose states hold
    the initial state, every ``sample_every``-th step and the final state.
    """
    if h <= 0:
        raise ValidationError(f"solver.h: step must be positive, got {h}")
    ex = integrating_factor(grid, mu, h)
    u = np.array(u0_coeffs)
    n_rec = n_steps + 1
    t_arr = t0 + h * np.arange(n_rec)
    hn = np.empty(n_rec)
    vn = np.empty(n_rec)
    fu = np.empty(n_rec)
    lr = np.empty(n_rec) if record_lr is not None else None

    traj = Trajectory(
        grid=grid, h=h, t=t_arr, h_norm=hn, v_norm=vn, f_dot_u=fu,
        lr_norm=lr, r=record_lr if record_lr is not None else 0.0,
    )

    def record(i, coeffs):
        hn[i] = h_norm_kernel(grid, coeffs)
        vn[i] = v_norm_kernel(grid, coeffs)
        fu[i] = 0.0 if f_coeffs is None else inner_h_kernel(grid, f_coeffs, coeffs)
        if lr is not None:
            lr[i] = lr_norm_kernel(grid, coeffs, record_lr)

    def snapshot(i, coeffs):
        traj.sample_times.append(float(t_arr[i]))
        traj.states.append(SpectralVelocity(grid, np.array(coeffs)))

    record(0, u)
    snapshot(0, u)
    dx_limit = cfl_safety * grid.dx
    prev = None
    for n in range(n_steps):
        g1, vmax = rhs(u, n)
        if vmax > 0.0 and h > dx_limit / vmax:
            raise CFLViolationError(
                f"step {h} exceeds CFL bound {dx_limit / vmax:.3e} "
                f"at t = {t_arr[n]:.6g} (max |u| = {vmax:.6g})"
            )
        mid = ex * (u + h * g1)
        g2, _ = rhs(mid, n)
        prev = u
        u = ex * (u + (0.5 * h) * g1) + (0.5 * h) * g2
        i = n + 1
        record(i, u)
        if not np.isfinite(hn[i]) or hn[i] > blowup_guard:
            raise BlowUpError(
                f"blow-up detected at t = {t_arr[i]:.6g}: |u|_H = {hn[i]:.6g}",
                t=float(t_arr[i]),
                h_norm=float(hn[i]),
            )
        if sample_every and i % sample_every == 0 and i != n_steps:
            snapshot(i, u)
    snapshot(n_steps, u)
    if prev is not None:
        traj.last_drift = h_norm_kernel(grid, u - prev) / h
    return traj


def simulate(
    u0: SpectralVelocity,
    params: PhysicsParams,
    T: float,
    h: float,
    *,
    sample_every: int = 0,
    record_lr: bool = False,
    cfl_safety: float = DEFAULT_CFL_SAFETY,
    blowup_guard: float = DEFAULT_BLOWUP_GUARD,
) -> Trajectory:
    """Integrate the deterministic system over [0, T]."""
    grid = u0.grid
    params.validate_for_dim(grid.dim)
    if params.forcing is not None:
        u0.same_grid(params.forcing)
    n_steps = int(round(T / h))
    if abs(n_steps * h - T) > 1e-9 * max(1.0, T) or n_steps < 1:
        raise ValidationError(f"solver.T: horizon {T} is not a positive multiple of h = {h}")
    f_coeffs = None if params.forcing is None else params.forcing.coeffs
    rhs_u = _deterministic_rhs(grid, params, f_coeffs)
    return drive(
        grid,
        u0.coeffs,
        lambda c, n: rhs_u(c),
        params.mu,
        h,
        n_steps,
        sample_every=sample_every,
        record_lr=params.r if record_lr else None,
        cfl_safety=cfl_safety,
        blowup_guard=blowup_guard,
        f_coeffs=f_coeffs,
    )


def _cumtrapz(y: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * h * (y[1:] + y[:-1]))
    return out


def energy_residual(traj: Trajectory, params: PhysicsParams) -> np.ndarray:
    """Defect in the energy balance
    |u(t)|_H^2 + 2 mu int |u|_V^2 + 2 beta int |u|_{L^{r+1}}^{r+1}
      - |u(0)|_H^2 - 2 int (f, u),
    with the time integrals by trapezoidal quadrature on the step grid."""
    if params.beta != 0.0 and traj.lr_norm is None:
        raise ValidationError("trajectory lacks the L^{r+1} record needed for beta > 0")
    lhs = traj.h_norm**2 + 2.0 * params.mu * _cumtrapz(traj.v_norm**2, traj.h)
    if params.beta != 0.0:
        lhs = lhs + 2.0 * params.beta * _cumtrapz(
            traj.lr_norm ** (params.r + 1.0), traj.h
        )
    if params.darcy != 0.0:
        lhs = lhs + 2.0 * params.darcy * _cumtrapz(traj.h_norm**2, traj.h)
    rhs = traj.h_norm[0] ** 2 + 2.0 * _cumtrapz(traj.f_dot_u, traj.h)
    return lhs - rhs


def probe_field(grid: TorusGrid, seed: int) -> SpectralVelocity:
    """Reproducible unit-H-norm probe with a |k|^-2 spectrum up to N/4."""
    return random_field(grid, seed, h_norm=1.0, kmax=grid.N / 4.0, spectral_slope=-2.0)


@dataclass
class SingletonResult:
    a_star: SpectralVelocity
    converged: bool
    contraction_log: list
    condition: ConditionReport | None
    probe_seeds: list
    t_final: float


def find_singleton(
    params: PhysicsParams,
    grid: TorusGrid,
    tol: float = 1.0e-8,
    maxT: float = 200.0,
    n_probes: int = 3,
    *,
    h: float = 0.01,
    check_every: float = 1.0,
    base_seed: int = 1000,
    constants: EstimateConstants | None = None,
    regime: str | None = None,
    allow_unverified: bool = False,
    cfl_safety: float = DEFAULT_CFL_SAFETY,
) -> SingletonResult:
    """
    Contract several independent trajectories onto the attractor point.

    Probes start from reproducible random data and run until every pairwise
    H-distance and the discrete drift |u(t+h) - u(t)|_H / h fall below
    ``tol``, or until ``maxT``.  The contraction log records
    (t, max pairwise distance, max drift) at every check time.
    """
    if n_probes < 2:
        raise ValidationError(f"n_probes: need at least 2, got {n_probes}")
    params.validate_for_dim(grid.dim)
    condition = None
    if params.darcy == 0.0:
        condition = check_singleton_condition(
            params, grid, constants, regime or default_regime(params, grid)
        )
        if not condition.holds:
            msg = (
                f"singleton condition fails for {condition.regime}: "
                f"varrho = {condition.varrho:.6g}"
            )
            if not allow_unverified:
                raise ValidationError(msg + " (pass allow_unverified=True to override)")
            logger.warning("%s; proceeding anyway", msg)
    elif not allow_unverified:
        raise ValidationError(
            "singleton conditions assume darcy = 0 "
            "(pass allow_unverified=True to override)"
        )

    seeds = [base_seed + i for i in range(n_probes)]
    logger.info("singleton probes with seeds %s", seeds)
    states = [probe_field(grid, s).coeffs for s in seeds]
    f_coeffs = None if params.forcing is None else params.forcing.coeffs
    rhs_u = _deterministic_rhs(grid, params, f_coeffs)

    chunk_steps = max(1, int(round(check_every / h)))
    n_chunks = max(1, int(np.ceil(maxT / (chunk_steps * h))))
    log = []
    converged = False
    t = 0.0
    for _ in range(n_chunks):
        drifts = []
        new_states = []
        for c in states:
            traj = drive(
                grid, c, lambda x, n: rhs_u(x), params.mu, h, chunk_steps,
                cfl_safety=cfl_safety, f_coeffs=f_coeffs,
            )
            new_states.append(traj.final_state.coeffs)
            drifts.append(traj.last_drift)
        states = new_states
        t += chunk_steps * h
        dmax = max(
            h_norm_kernel(grid, states[i] - states[j])
            for i in range(n_probes)
            for j in range(i + 1, n_probes)
        )
        drift = max(drifts)
        log.append((t, dmax, drift))
        if dmax < tol and drift < tol:
            converged = True
            break

    a_star = SpectralVelocity(grid, states[0])
    if not converged:
        logger.warning(
            "singleton search hit maxT = %s without contraction (dist %.3e, drift %.3e)",
            maxT, log[-1][1], log[-1][2],
        )
    return SingletonResult(
        a_star=a_star,
        converged=converged,
        contraction_log=log,
        condition=condition,
        probe_seeds=seeds,
        t_final=t,
    )
