"""Acceleration waves running tangentially along the interface.

A weak discontinuity moving through the interfacial layer carries jumps
(lambda_1, lambda_2, lambda_3) in the normal derivatives of density,
entropy and temperature.  Compatibility of mass, momentum and energy
balances across the moving surface reduces to a 3x3 homogeneous linear
system; nontrivial jumps exist only where its determinant vanishes, which
pins the celerity v.  The determinant is linear in v^2, so the closed form

    v^2 = (C E - D^2) * g^2 / (C * rho)

with g^2 the squared tangential entropy gradient follows by one cofactor
expansion.  This module assembles the system, finds the root numerically
without using the closed form, and evaluates both on the dividing surface
of an equilibrium profile where everything reduces to functions of the
undercooling alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eos import BulkConditions, FluidParams
from .errors import InvalidConfig, ModelError, RootNotBracketed

__all__ = [
    "WaveLocus",
    "JumpSystem",
    "CelerityResult",
    "jump_matrix",
    "celerity_general",
    "celerity_by_determinant",
    "celerity_at_critical_density",
    "dividing_surface_locus",
    "dividing_surface_density_gradient",
]

_JUMP_NOTE = "lambda_1 = [d rho/dn], lambda_2 = [d s/dn] (jumps in normal derivatives)"


@dataclass(frozen=True)
class WaveLocus:
    """Local state a wave propagates through.

    grad_s_normal is the component of grad s along the wave normal,
    grad_s_tg_sq the squared magnitude of its tangential part.
    """

    rho: float
    grad_s_normal: float
    grad_s_tg_sq: float

    def __post_init__(self):
        vals = (self.rho, self.grad_s_normal, self.grad_s_tg_sq)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidConfig(f"wave locus entries must be finite, got {vals}")
        if self.rho <= 0.0:
            raise InvalidConfig(f"locus density must be > 0, got {self.rho}")
        if self.grad_s_tg_sq < 0.0:
            raise InvalidConfig(
                f"squared tangential gradient must be >= 0, got {self.grad_s_tg_sq}")

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "grad_s_normal": self.grad_s_normal,
            "grad_s_tg_sq": self.grad_s_tg_sq,
        }


@dataclass(frozen=True, eq=False)
class JumpSystem:
    """Assembled 3x3 jump compatibility matrix at a candidate celerity."""

    matrix: np.ndarray
    v: float

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (3, 3):
            raise ValueError("jump matrix must be 3x3")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class CelerityResult:
    """Celerity and normalized jump amplitudes of a tangential wave."""

    v: float
    lam: tuple[float, float, float]
    jump_interpretation: str = field(default=_JUMP_NOTE)
    # the constraint C*lam1 + D*lam2 = 0 is the jump of the capillary flux
    # divergence; it holds for every wave, so enforce it at construction
    _constraint_coeffs: tuple[float, float] = field(default=(0.0, 0.0), repr=False)

    def __post_init__(self):
        if not self.v >= 0.0:
            raise ValueError("celerity must be reported as the nonnegative root")
        c, d = self._constraint_coeffs
        if c != 0.0 or d != 0.0:
            l1, l2, _ = self.lam
            resid = abs(c * l1 + d * l2)
            scale = max(1.0, abs(c * l1), abs(d * l2))
            if resid > 1e-12 * scale:
                raise ValueError(
                    f"amplitudes violate C*lam1 + D*lam2 = 0 (residual {resid:.3e})")

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "v_mirror": -self.v,
            "v_squared": self.v * self.v,
            "lambda1": self.lam[0],
            "lambda2": self.lam[1],
            "lambda3": self.lam[2],
            "jump_interpretation": self.jump_interpretation,
        }


def jump_matrix(p: FluidParams, locus: WaveLocus, v: float) -> JumpSystem:
    """Assemble the compatibility system at candidate celerity v.

    Rows: capillary-flux jump [C, D, 0]; energy-flux jump [D a, E a, rho];
    tangential momentum jump [D g2, E g2 - rho v^2, 0], with a the normal
    and g2 the squared tangential entropy gradient.
    """
    a = locus.grad_s_normal
    g2 = locus.grad_s_tg_sq
    mat = np.array([
        [p.C, p.D, 0.0],
        [p.D * a, p.E * a, locus.rho],
        [p.D * g2, p.E * g2 - locus.rho * v * v, 0.0],
    ])
    return JumpSystem(matrix=mat, v=float(v))


def _amplitudes_closed(p: FluidParams, locus: WaveLocus) -> tuple[float, float, float]:
    lam1 = -p.D / p.C
    lam3 = -(locus.grad_s_normal / locus.rho) * (p.E - p.D * p.D / p.C)
    return (lam1, 1.0, lam3)


def celerity_general(p: FluidParams, locus: WaveLocus) -> CelerityResult:
    """Closed-form celerity v = sqrt((CE - D^2) g^2 / (C rho)) with amplitudes.

    Amplitudes are normalized to lam2 = 1: lam1 = -D/C from the first row,
    lam3 from the second.  The jump vector is tangential to the wave
    surface, so these waves transport no mass through their own front.
    """
    g2 = locus.grad_s_tg_sq
    v = math.sqrt((p.C * p.E - p.D * p.D) * g2 / (p.C * locus.rho))
    return CelerityResult(v=v, lam=_amplitudes_closed(p, locus),
                          _constraint_coeffs=(p.C, p.D))


def _bisect(f, lo: float, hi: float, max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise RootNotBracketed(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f = {flo:.3e}, {fhi:.3e}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo <= 1e-16 * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def celerity_by_determinant(p: FluidParams, locus: WaveLocus) -> CelerityResult:
    """Celerity as a numeric determinant root, amplitudes from the null space.

    Independent of the closed form except for the bracket width: bisection
    runs on [0, 10 * v_closed], where the determinant provably changes sign.
    The amplitude vector is the right singular direction of the smallest
    singular value; the gap to the next singular value certifies that the
    matrix really drops to rank 2 at the root.
    """
    g2 = locus.grad_s_tg_sq
    if g2 <= 0.0:
        raise InvalidConfig("determinant root-finding requires grad_s_tg_sq > 0")
    v_hi = 10.0 * math.sqrt((p.C * p.E - p.D * p.D) * g2 / (p.C * locus.rho))

    def det_at(v: float) -> float:
        return jump_matrix(p, locus, v).determinant()

    v_root = _bisect(det_at, 0.0, v_hi)
    mat = jump_matrix(p, locus, v_root).matrix
    _, sing, vt = np.linalg.svd(mat)
    if not sing[1] > 1e3 * sing[2]:
        raise ModelError(
            "jump matrix at the determinant root is not numerically rank 2 "
            f"(singular values {sing})")
    vec = vt[2]
    if vec[1] != 0.0:
        vec = vec / vec[1]
    return CelerityResult(v=v_root, lam=(float(vec[0]), float(vec[1]), float(vec[2])),
                          _constraint_coeffs=(p.C, p.D))


def dividing_surface_density_gradient(p: FluidParams, bc: BulkConditions) -> float:
    """Tangential density-gradient magnitude at rho = rho_c.

    The first integral of the profile equation gives
    C |grad rho|^2 = (A^2 / 2B) delta_t^2 at the dividing surface, and the
    wave normal is orthogonal to grad rho there, so all of it is tangential.
    """
    return p.A * bc.delta_t / math.sqrt(2.0 * p.B * p.C)


def dividing_surface_locus(p: FluidParams, bc: BulkConditions) -> WaveLocus:
    """Wave locus on the rho = rho_c surface of an equilibrium interface.

    The slaved entropy varies along grad rho with slope
    (A^2 / (2 B rho_c^2)) delta_t at the dividing surface, so grad s is
    parallel to grad rho: its normal component vanishes and its tangential
    square is the slope squared times the density-gradient square.
    """
    slope = p.A * p.A * bc.delta_t / (2.0 * p.B * p.rho_c * p.rho_c)
    grad_rho_tg = dividing_surface_density_gradient(p, bc)
    return WaveLocus(rho=p.rho_c, grad_s_normal=0.0,
                     grad_s_tg_sq=(slope * grad_rho_tg) ** 2)


def celerity_at_critical_density(p: FluidParams, bc: BulkConditions) -> CelerityResult:
    """Celerity on the dividing surface straight from the undercooling.

    v^2 = (CE - D^2) A^6 delta_t^4 / (8 C^2 B^3 rho_c^5): quadratic in
    delta_t, so the wave slows to rest exactly at the critical point.
    """
    num = (p.C * p.E - p.D * p.D) * p.A ** 6 * bc.delta_t ** 4
    den = 8.0 * p.C ** 2 * p.B ** 3 * p.rho_c ** 5
    v = math.sqrt(num / den)
    locus = dividing_surface_locus(p, bc)
    return CelerityResult(v=v, lam=_amplitudes_closed(p, locus),
                          _constraint_coeffs=(p.C, p.D))
