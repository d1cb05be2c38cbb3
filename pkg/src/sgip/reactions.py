"""Reaction kinetics r(u) and the per-bin time integrators.

The logistic and linear kinetics have exact one-step solutions; everything
else goes through Newton-based backward Euler or Crank-Nicolson.  All rate
functions accept scalars or arrays, and the field-level integrator is a pure
per-bin map (bins never interact), so it can be partitioned freely.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import DensityField, SgipError, field_total_mass

log = logging.getLogger(__name__)


class ReactionError(SgipError):
    """Reaction integration failed (non-convergence or invalid state)."""

    def __init__(self, message, last_iterate=None, residual=None, bin_index=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.bin_index = bin_index


# ---------------------------------------------------------------------------
# Kinetics


class ReactionModel:
    """Base class for reaction kinetics; subclasses define rate and slope."""

    def rate(self, u):
        raise NotImplementedError

    def rate_derivative(self, u):
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(ReactionModel):
    """r(u) = coeff * u, exponential growth or decay."""

    coeff: float = 1.0

    def rate(self, u):
        return self.coeff * np.asarray(u, dtype=np.float64)

    def rate_derivative(self, u):
        return np.full_like(np.asarray(u, dtype=np.float64), self.coeff)


@dataclass(frozen=True)
class FKPP(ReactionModel):
    """Logistic kinetics r(u) = u(1 - u)."""

    def rate(self, u):
        u = np.asarray(u, dtype=np.float64)
        return u * (1.0 - u)

    def rate_derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        return 1.0 - 2.0 * u


@dataclass(frozen=True)
class Cubic(ReactionModel):
    """r(u) = u^2 (1 - u)."""

    def rate(self, u):
        u = np.asarray(u, dtype=np.float64)
        return u * u * (1.0 - u)

    def rate_derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        return u * (2.0 - 3.0 * u)


@dataclass(frozen=True)
class Arrhenius(ReactionModel):
    """r(u) = exp(-E/u) (1 - u) with activation energy E > 0.

    The exponential has an essential singularity at u = 0; the continuous
    limit gives r(0) = 0 and r'(0) = 0, and both are extended by 0 for u < 0
    so that Newton iterates never overflow.
    """

    activation_energy: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.activation_energy) and self.activation_energy > 0):
            raise ValueError(f"activation energy must be > 0, got {self.activation_energy}")

    def rate(self, u):
        u = np.asarray(u, dtype=np.float64)
        safe = np.where(u > 0.0, u, 1.0)
        return np.where(u > 0.0, np.exp(-self.activation_energy / safe) * (1.0 - u), 0.0)

    def rate_derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        safe = np.where(u > 0.0, u, 1.0)
        e = self.activation_energy
        deriv = np.exp(-e / safe) * (e * (1.0 - u) / (safe * safe) - 1.0)
        return np.where(u > 0.0, deriv, 0.0)


@dataclass(frozen=True)
class Polynomial(ReactionModel):
    """r(u) = sum_k coeffs[k] * u^k, coefficients in increasing degree."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.coeffs))
        if len(c) == 0 or not all(np.isfinite(c)):
            raise ValueError("polynomial needs at least one finite coefficient")
        object.__setattr__(self, "coeffs", c)

    def rate(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def rate_derivative(self, u):
        u = np.asarray(u, dtype=np.float64)
        dcoeffs = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(u, dcoeffs)


def rate(model: ReactionModel, u):
    return model.rate(u)


def rate_derivative(model: ReactionModel, u):
    return model.rate_derivative(u)


# ---------------------------------------------------------------------------
# Integrator schemes


@dataclass(frozen=True)
class ClosedForm:
    """Exact one-step integration; valid for FKPP and Linear only."""


@dataclass(frozen=True)
class BackwardEuler:
    tol: float = 1e-12
    max_iter: int = 50
    u_max: float = 1.0

    def __post_init__(self):
        _check_newton_params(self.tol, self.max_iter)


@dataclass(frozen=True)
class CrankNicolson:
    tol: float = 1e-12
    max_iter: int = 50
    u_max: float = 1.0

    def __post_init__(self):
        _check_newton_params(self.tol, self.max_iter)


IntegratorScheme = ClosedForm | BackwardEuler | CrankNicolson


def _check_newton_params(tol, max_iter):
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValueError(f"max_iter must be an integer >= 1, got {max_iter}")


# ---------------------------------------------------------------------------
# Single-bin integration


def react_closed_form(model: ReactionModel, u_star, dt: float):
    """Exact reaction step for FKPP (logistic formula) or Linear kinetics."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    u = np.asarray(u_star, dtype=np.float64)
    if isinstance(model, FKPP):
        growth = np.exp(dt)
        denom = 1.0 + u * (growth - 1.0)
        if np.any(denom <= 0.0):
            raise ReactionError("logistic denominator <= 0 (u_star < 0 is outside the domain)")
        out = u * growth / denom
    elif isinstance(model, Linear):
        out = u * np.exp(model.coeff * dt)
    else:
        raise ReactionError(f"no closed-form solution for {type(model).__name__}")
    return out if out.ndim else float(out)


def _newton_implicit(model, u_star, dt, weight, tol, max_iter):
    """Solve u - u_star - dt * (weight*r(u) + (1-weight)*r(u_star)) = 0.

    Vectorized Newton started at u_star; ``weight`` is 1 for backward Euler
    and 1/2 for Crank-Nicolson.  Returns the unclamped roots; raises with the
    first offending flat index when any component fails to converge.
    """
    u_star = np.asarray(u_star, dtype=np.float64)
    explicit = (1.0 - weight) * np.asarray(model.rate(u_star), dtype=np.float64)
    u = u_star.copy()
    residual = u - u_star - dt * (weight * np.asarray(model.rate(u)) + explicit)
    for _ in range(int(max_iter)):
        active = np.abs(residual) > tol
        if not active.any():
            return u
        slope = 1.0 - dt * weight * np.asarray(model.rate_derivative(u))
        # A vanishing slope means the implicit equation lost its root along
        # this branch; poison the iterate so the failure surfaces below.
        slope = np.where(slope == 0.0, np.nan, slope)
        u = np.where(active, u - residual / slope, u)
        if not np.all(np.isfinite(u)):
            bad = int(np.flatnonzero(~np.isfinite(np.atleast_1d(u)))[0])
            raise ReactionError(
                f"Newton iterate became non-finite at bin {bad}", bin_index=bad
            )
        residual = u - u_star - dt * (weight * np.asarray(model.rate(u)) + explicit)
    bad = int(np.argmax(np.abs(np.atleast_1d(residual))))
    bad_res = float(np.atleast_1d(residual)[bad])
    raise ReactionError(
        f"Newton failed to reach tol={tol} within {max_iter} iterations "
        f"(worst bin {bad}, residual {bad_res:.3e})",
        last_iterate=np.atleast_1d(u)[bad],
        residual=bad_res,
        bin_index=bad,
    )


def _clamp(u, u_max):
    clamped = np.clip(u, 0.0, u_max)
    n_clamped = int(np.count_nonzero(clamped != u)) if np.ndim(u) else int(clamped != u)
    if n_clamped:
        log.debug("implicit reaction step clamped %d value(s) into [0, %g]", n_clamped, u_max)
    return clamped


def react_backward_euler(
    model: ReactionModel, u_star, dt: float, tol: float = 1e-12, max_iter: int = 50,
    u_max: float = 1.0,
):
    """Backward-Euler reaction step solved by Newton from ``u_star``.

    The root reached from ``u_star`` is returned, clamped into [0, u_max].
    """
    _check_newton_params(tol, max_iter)
    u = _newton_implicit(model, u_star, dt, 1.0, tol, max_iter)
    out = _clamp(u, u_max)
    return out if np.ndim(out) else float(out)


def react_crank_nicolson(
    model: ReactionModel, u_star, dt: float, tol: float = 1e-12, max_iter: int = 50,
    u_max: float = 1.0,
):
    """Crank-Nicolson reaction step (trapezoidal), Newton from ``u_star``."""
    _check_newton_params(tol, max_iter)
    u = _newton_implicit(model, u_star, dt, 0.5, tol, max_iter)
    out = _clamp(u, u_max)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# Field-level integration


def react_values(values: np.ndarray, model: ReactionModel, scheme: IntegratorScheme,
                 dt: float) -> np.ndarray:
    """Apply one reaction step to a raw value array (per-bin, vectorized)."""
    if isinstance(scheme, ClosedForm):
        if not isinstance(model, (FKPP, Linear)):
            raise ReactionError(
                f"ClosedForm integration requires FKPP or Linear kinetics, "
                f"got {type(model).__name__}"
            )
        return react_closed_form(model, values, dt)
    if isinstance(scheme, BackwardEuler):
        return react_backward_euler(model, values, dt, scheme.tol, scheme.max_iter,
                                    scheme.u_max)
    if isinstance(scheme, CrankNicolson):
        return react_crank_nicolson(model, values, dt, scheme.tol, scheme.max_iter,
                                    scheme.u_max)
    raise TypeError(f"unknown integrator scheme {scheme!r}")


def integrate_reaction_field(
    field: DensityField, model: ReactionModel, scheme: IntegratorScheme, dt: float
) -> tuple[DensityField, float]:
    """Integrate the reaction ODE independently in every bin.

    Returns the updated field (same time stamp; the driver owns the clock)
    and the total mass after reaction.
    """
    new_values = react_values(field.values, model, scheme, dt)
    out = DensityField(field.grid, new_values, field.time)
    return out, field_total_mass(out)
