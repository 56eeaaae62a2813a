"""Equation of state of a near-critical fluid with entropy-dependent capillarity.

The volumetric internal energy of the homogeneous fluid is a quartic
expansion about the critical point (rho = rho_c, s = 0),

    rho*alpha(rho, s) = (B / 2A^2) * [ (A*(rho - rho_c)^2 + rho*s)^2
                                       + (rho*s)^2 ]
                        + mu_c*rho + T_c*rho*s - p_c,

so that the critical state reproduces temperature T_c, chemical potential
mu_c and pressure p_c.  The inhomogeneous part of the energy is the
positive-definite quadratic form (1/2)*(C*|grad rho|^2 + 2*D*grad rho.grad s
+ E*|grad s|^2); admissibility of the coefficients (C > 0, C*E - D^2 > 0)
is enforced at construction.

Two chemical-potential routes are provided on purpose.  The full route
differentiates the energy directly, mu = d(rho*alpha)/drho - s*T0.  The
cubic route is the closed form valid on the slaved-entropy manifold,
mu = mu_c + B*(rho - rho_c)^3 - A*(T_c - T0)*(rho - rho_c).  Their exact
agreement on that manifold is an algebraic identity and is what makes the
two bulk densities rho_c +/- sqrt(A*(T_c - T0)/B) exact coexistence states;
the test suite checks the identity to near round-off.

All thermodynamic functions broadcast over numpy arrays in rho and s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import IndefiniteGradientForm, InvalidConfig, NonPositiveConstant

__all__ = [
    "FluidParams",
    "ThermoState",
    "BulkConditions",
    "validate_params",
    "bulk_conditions",
    "bulk_energy",
    "bulk_energy_partials",
    "bulk_energy_hessian",
    "temperature",
    "enthalpy",
    "pressure",
    "chemical_potential_full",
    "chemical_potential_cubic",
    "entropy_slave",
]


@dataclass(frozen=True)
class FluidParams:
    """Material constants in reduced units (defaults: the reference set)."""

    A: float = 1.0        # curvature of the EOS in density, > 0
    B: float = 1.0        # quartic stiffness of the EOS, > 0
    rho_c: float = 1.0    # critical density, > 0
    T_c: float = 1.0      # critical temperature, > 0
    mu_c: float = 0.0     # chemical potential at the critical point
    p_c: float = 0.0      # pressure at the critical point
    C: float = 1.0        # density-gradient stiffness, > 0
    D: float = 0.2        # density-entropy gradient coupling
    E: float = 1.0        # entropy-gradient stiffness

    def __post_init__(self):
        for name in ("A", "B", "rho_c", "T_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveConstant(f"{name} must be finite and > 0, got {value!r}")
        for name in ("mu_c", "p_c", "C", "D", "E"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidConfig(f"{name} must be finite, got {value!r}")
        if self.C <= 0.0:
            raise IndefiniteGradientForm(f"C must be > 0, got {self.C!r}")
        if self.C * self.E - self.D * self.D <= 0.0:
            raise IndefiniteGradientForm(
                f"gradient energy must be positive definite: "
                f"C*E - D^2 = {self.C * self.E - self.D * self.D!r} <= 0"
            )


def validate_params(raw: Mapping[str, float]) -> FluidParams:
    """Build FluidParams from a mapping, rejecting unknown keys.

    Missing keys fall back to the reference reduced-unit values.  Strict key
    checking exists so a typo in a physics constant fails loudly instead of
    silently running with a default.
    """
    known = set(FluidParams.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise InvalidConfig(f"unknown parameter key(s): {', '.join(unknown)}")
    return FluidParams(**{k: float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class ThermoState:
    """A homogeneous thermodynamic state (specific entropy gauge: s_c = 0)."""

    rho: float  # mass density, > 0
    s: float    # specific entropy

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"rho must be finite and > 0, got {self.rho!r}")
        if not math.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s!r}")


@dataclass(frozen=True)
class BulkConditions:
    """Imposed environment of an equilibrium profile.

    T0 is the uniform temperature of the planar interface problem, mu1 the
    chemical-potential constant of the profile equation (equal to mu_c unless
    explicitly overridden) and delta_t = T_c - T0 >= 0 the undercooling,
    cached because every closed form is written in it.
    """

    T0: float
    mu1: float
    delta_t: float

    def __post_init__(self):
        for name in ("T0", "mu1", "delta_t"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")
        if self.delta_t < 0.0:
            raise InvalidConfig(
                f"temperatures above critical are not modeled: delta_t = {self.delta_t!r} < 0"
            )


def bulk_conditions(p: FluidParams, *, delta_t: float | None = None,
                    T0: float | None = None, mu1: float | None = None) -> BulkConditions:
    """Construct BulkConditions from either the undercooling or T0 directly."""
    if (delta_t is None) == (T0 is None):
        raise InvalidConfig("specify exactly one of delta_t or T0")
    if delta_t is None:
        delta_t = p.T_c - float(T0)
    else:
        delta_t = float(delta_t)
        T0 = p.T_c - delta_t
    return BulkConditions(T0=float(T0), mu1=p.mu_c if mu1 is None else float(mu1),
                          delta_t=delta_t)


# ---------------------------------------------------------------------------
# Bulk energy and its derivatives.  Everything below is written in terms of
# m = rho - rho_c, eta = rho*s and W = A*m^2 + eta, which keeps the algebra
# identical to the hand derivation used for the frozen test values.
# ---------------------------------------------------------------------------

def bulk_energy(p: FluidParams, rho, s):
    """Volumetric internal energy rho*alpha of the homogeneous fluid."""
    m = rho - p.rho_c
    eta = rho * s
    W = p.A * m * m + eta
    return (p.B / (2.0 * p.A**2)) * (W * W + eta * eta) + p.mu_c * rho + p.T_c * eta - p.p_c


def bulk_energy_partials(p: FluidParams, rho, s):
    """Partial derivatives (d/drho, d/ds) of rho*alpha at fixed other variable."""
    m = rho - p.rho_c
    eta = rho * s
    W = p.A * m * m + eta
    coef = p.B / p.A**2
    d_rho = coef * (W * (2.0 * p.A * m + s) + eta * s) + p.mu_c + p.T_c * s
    d_s = coef * rho * (W + eta) + p.T_c * rho
    return d_rho, d_s


def bulk_energy_hessian(p: FluidParams, rho, s):
    """Second partials (d2/drho2, d2/drho ds, d2/ds2) of rho*alpha.

    Needed analytically by the Newton solver of the coupled profile system;
    checked against finite differences in the tests.
    """
    m = rho - p.rho_c
    eta = rho * s
    W = p.A * m * m + eta
    coef = p.B / p.A**2
    g = 2.0 * p.A * m + s
    h_rr = coef * (g * g + 2.0 * p.A * W + s * s)
    h_rs = coef * (rho * g + W + 2.0 * eta) + p.T_c
    h_ss = 2.0 * coef * rho * rho
    return h_rr, h_rs, h_ss


def temperature(p: FluidParams, rho, s):
    """Absolute temperature T = (1/rho) d(rho*alpha)/ds."""
    m = rho - p.rho_c
    return (p.B / p.A**2) * (p.A * m * m + 2.0 * rho * s) + p.T_c


def enthalpy(p: FluidParams, rho, s):
    """Specific enthalpy h0 = alpha + rho*(d alpha/d rho) = d(rho*alpha)/drho."""
    return bulk_energy_partials(p, rho, s)[0]


def pressure(p: FluidParams, rho, s):
    """Thermodynamic pressure of the bulk, P = rho*h0 - rho*alpha."""
    return rho * enthalpy(p, rho, s) - bulk_energy(p, rho, s)


def chemical_potential_full(p: FluidParams, rho, s, T0):
    """Chemical potential at imposed temperature, mu = h0 - s*T0."""
    return enthalpy(p, rho, s) - s * T0


def chemical_potential_cubic(p: FluidParams, rho, delta_t):
    """Closed-form chemical potential on the slaved-entropy manifold.

    mu = mu_c + B*(rho - rho_c)^3 - A*(T_c - T0)*(rho - rho_c).  The minus
    sign on the undercooling term is what produces the two symmetric bulk
    roots below T_c; it is the sign consistent with the profile equation.
    """
    m = rho - p.rho_c
    return p.mu_c + p.B * m**3 - p.A * delta_t * m


def entropy_slave(p: FluidParams, rho, delta_t):
    """Entropy enslaved to the density by the condition T(rho, s) = T0.

    Solves 2*rho*s = (A^2/B)*(T0 - T_c) - A*(rho - rho_c)^2 for s, which
    inverts temperature() exactly (an identity, not an approximation).
    """
    m = rho - p.rho_c
    return (-(p.A**2 / p.B) * delta_t - p.A * m * m) / (2.0 * rho)
