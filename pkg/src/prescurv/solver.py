"""Damped-Newton solver and homotopy continuation for the nodal curvature equation.

The residual at each node is sigma_k/sigma_l of the Newton-tensor eigenvalues
minus the homotopy value f^t.  Newton uses a dense central-difference
Jacobian (one-sided where a perturbation exits the admissibility cone) and a
backtracking line search that accepts a step only if the iterate stays
admissible, stays inside the guarded annulus, and decreases the residual.
Continuation marches t from the round solution at t = 0 to t = 1 with step
halving on failure and doubling after consecutive easy solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AdmissibilityError,
    AssumptionFailure,
    ConeViolation,
    ContinuationBreakdown,
    DomainViolation,
    NewtonFailure,
)
from .geometry import compute_geometry
from .mesh import ScalarField, SphereMesh, field_from_flat
from .problem import ProblemSpec, blend_f_t, check_assumptions

GUARD_FRACTION = 0.05  # hard annulus guard widens (r1, r2) by this fraction of the width


@dataclass(frozen=True)
class SolverOptions:
    newton_tol: float = 1e-10      # residual max-norm
    max_newton: int = 30
    t_step_init: float = 0.1
    t_step_min: float = 1e-3
    damping: float = 0.5           # backtracking factor
    max_halvings: int = 20
    jacobian_fd_scale: float = 1e-6  # step = scale * (1 + |r_j|)

    def __post_init__(self):
        for name in ("newton_tol", "max_newton", "t_step_init", "t_step_min",
                     "damping", "max_halvings", "jacobian_fd_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t_step_min > self.t_step_init:
            raise ValueError("t_step_min must not exceed t_step_init")


@dataclass(frozen=True)
class NewtonStats:
    iterations: int
    residual_norm: float
    halvings: int = 0


@dataclass(frozen=True)
class ContinuationState:
    t: float
    r_field: ScalarField
    newton_iters: int
    residual_norm: float
    admissible: bool = True


def residual(spec: ProblemSpec, mesh: SphereMesh, t: float, r_field: ScalarField) -> ScalarField:
    """Nodal residual sigma_k/sigma_l(mu) - f^t; raises on cone or domain exit."""
    geom = compute_geometry(mesh, r_field, spec.profile)
    ratio, ok = geom.quotient_ratio(spec.q)
    if not np.all(ok):
        node = int(np.argmin(ok.ravel()))
        raise ConeViolation(f"Newton eigenvalues left the cone at node {node}", node=node)
    ft = blend_f_t(spec, t, geom.r, mesh.theta_grid(), mesh.phi_grid(), geom.nu_r)
    return ScalarField(mesh, ratio - ft)


def _residual_vec(spec, mesh, t, rvec):
    return residual(spec, mesh, t, field_from_flat(mesh, rvec)).flat()


def jacobian_fd(spec: ProblemSpec, mesh: SphereMesh, t: float, r_field: ScalarField,
                opts: SolverOptions = SolverOptions()) -> np.ndarray:
    """Dense finite-difference Jacobian of the nodal residual.

    Central differences; falls back to one-sided when a perturbation exits
    the admissibility cone or the radius domain.
    """
    rvec = r_field.flat().copy()
    n = rvec.size
    jac = np.empty((n, n))
    base = None
    for j in range(n):
        h = opts.jacobian_fd_scale * (1.0 + abs(rvec[j]))
        saved = rvec[j]
        try:
            rvec[j] = saved + h
            plus = _residual_vec(spec, mesh, t, rvec)
        except (ConeViolation, DomainViolation):
            plus = None
        try:
            rvec[j] = saved - h
            minus = _residual_vec(spec, mesh, t, rvec)
        except (ConeViolation, DomainViolation):
            minus = None
        rvec[j] = saved
        if plus is not None and minus is not None:
            jac[:, j] = (plus - minus) / (2.0 * h)
        elif plus is not None or minus is not None:
            if base is None:
                base = _residual_vec(spec, mesh, t, rvec)
            if plus is not None:
                jac[:, j] = (plus - base) / h
            else:
                jac[:, j] = (base - minus) / h
        else:
            raise AdmissibilityError(
                f"Jacobian column {j}: both one-sided perturbations inadmissible"
            )
    return jac


def _guard_bounds(spec: ProblemSpec):
    guard = GUARD_FRACTION * (spec.r2 - spec.r1)
    return spec.r1 - guard, spec.r2 + guard


def _check_guard(spec, rvec):
    lo, hi = _guard_bounds(spec)
    if rvec.min() <= lo or rvec.max() >= hi:
        raise AdmissibilityError(
            f"iterate left the guarded annulus ({lo:.6g}, {hi:.6g})"
        )


def newton_solve(spec: ProblemSpec, mesh: SphereMesh, t: float, r_init: ScalarField,
                 opts: SolverOptions = SolverOptions()):
    """Damped Newton for the nodal equation at fixed t.

    Returns (solution field, NewtonStats).  Every accepted iterate is
    admissible and inside the guarded annulus; backtracking halves the step
    until admissibility and residual decrease both hold.
    """
    rvec = r_init.flat().copy()
    _check_guard(spec, rvec)
    res = _residual_vec(spec, mesh, t, rvec)  # raises if r_init inadmissible
    norm = float(np.abs(res).max())
    halvings_total = 0
    for it in range(opts.max_newton):
        if norm <= opts.newton_tol:
            return field_from_flat(mesh, rvec), NewtonStats(it, norm, halvings_total)
        jac = jacobian_fd(spec, mesh, t, field_from_flat(mesh, rvec), opts)
        step = np.linalg.solve(jac, -res)
        scale = 1.0
        for k in range(opts.max_halvings + 1):
            trial = rvec + scale * step
            try:
                _check_guard(spec, trial)
                trial_res = _residual_vec(spec, mesh, t, trial)
            except (ConeViolation, DomainViolation, AdmissibilityError):
                scale *= opts.damping
                continue
            trial_norm = float(np.abs(trial_res).max())
            if trial_norm < norm:
                rvec, res, norm = trial, trial_res, trial_norm
                halvings_total += k
                break
            scale *= opts.damping
        else:
            raise NewtonFailure(
                f"line search failed after {opts.max_halvings} halvings at t={t:g}"
            )
    if norm <= opts.newton_tol:
        return field_from_flat(mesh, rvec), NewtonStats(opts.max_newton, norm, halvings_total)
    raise NewtonFailure(f"no convergence in {opts.max_newton} iterations at t={t:g} (|res|={norm:.3e})")


def continuation_solve(spec: ProblemSpec, mesh: SphereMesh,
                       opts: SolverOptions = SolverOptions(),
                       force: bool = False,
                       r_init: Optional[ScalarField] = None):
    """March the homotopy from the round solution at t = 0 to t = 1.

    Refuses to run when the assumption check fails beyond boundary cases,
    unless `force` is set.  Raises ContinuationBreakdown (carrying the last
    good state and the failed t-interval) when the t-step underflows.
    Returns (final state, history of accepted states).
    """
    report = check_assumptions(spec)
    hard_failures = [res.name for res in report.results
                     if not (res.passed or res.boundary_case)]
    if hard_failures and not force:
        raise AssumptionFailure(
            f"assumption check failed: {', '.join(hard_failures)}", report=report
        )

    if r_init is None:
        r_init = field_from_flat(mesh, np.full(mesh.n_nodes, spec.phi_rm))
    sol, stats = newton_solve(spec, mesh, 0.0, r_init, opts)
    state = ContinuationState(0.0, sol, stats.iterations, stats.residual_norm)
    history = [state]

    dt = opts.t_step_init
    t = 0.0
    easy_streak = 0
    while t < 1.0:
        t_try = 1.0 if t + dt >= 1.0 - 1e-12 else t + dt
        try:
            sol_try, stats = newton_solve(spec, mesh, t_try, sol, opts)
        except (NewtonFailure, AdmissibilityError, ConeViolation, DomainViolation):
            dt *= 0.5
            if dt < opts.t_step_min:
                raise ContinuationBreakdown(
                    f"t-step underflow below {opts.t_step_min:g} in [{t:g}, {t_try:g}]",
                    last_good=state,
                    failed_interval=(t, t_try),
                    history=history,
                )
            continue
        t, sol = t_try, sol_try
        state = ContinuationState(t, sol, stats.iterations, stats.residual_norm)
        history.append(state)
        if stats.iterations <= 4:
            easy_streak += 1
        else:
            easy_streak = 0
        if easy_streak >= 2:
            dt = min(2.0 * dt, opts.t_step_init)
            easy_streak = 0
    return state, history


def total_newton_iterations(history) -> int:
    return sum(s.newton_iters for s in history)
