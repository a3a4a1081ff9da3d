"""Physical parameters of the rotating condensate and derived quantities.

The model is a two-dimensional condensate in an anisotropic harmonic trap,
rotated at speed ``omega`` and with coupling constant ``epsilon``.  The trap
profile is ``a(x) = a0 - x1^2 - lam^2 x2^2`` with the default depth ``a0``
tied to the anisotropy so that the positive part of ``a`` integrates to one.
Rotation deforms the effective bulk into the ellipse where

    p(x) = alpha_eo - x1^2 - lambda_eo^2 x2^2 > 0,

with closed-form deformed coefficients ``alpha_eo`` and ``lambda_eo``; this
module evaluates all of these closed forms and validates the speed regime in
which the energy functional stays bounded below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeViolation

__all__ = [
    "PhysicalParams",
    "DerivedParams",
    "RegimeReport",
    "derive_params",
    "trap_profile",
    "check_regime",
    "default_a0",
]


def default_a0(lam: float) -> float:
    """Trap depth for which the positive part of the trap profile has unit mass."""
    return math.sqrt(2.0 * lam / math.pi)


@dataclass(frozen=True)
class PhysicalParams:
    """Primitive parameters: coupling, rotation speed, anisotropy, regime constant.

    ``a0=None`` requests the normalized default ``sqrt(2*lam/pi)``; passing an
    explicit value marks the instance as customized and the unit-mass
    normalization of the trap profile no longer holds.
    """

    epsilon: float
    omega: float
    lam: float = 1.0
    m_cap: float | None = None
    a0: float | None = None
    a0_custom: bool = field(init=False, default=False)

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise RegimeViolation(f"lam must lie in (0, 1], got {self.lam}")
        if self.epsilon <= 0.0:
            raise RegimeViolation(f"epsilon must be positive, got {self.epsilon}")
        if self.omega < 0.0:
            raise RegimeViolation(f"omega must be nonnegative, got {self.omega}")
        if self.m_cap is None:
            object.__setattr__(self, "m_cap", self.lam)
        if not (0.0 < self.m_cap < 2.0 * self.lam):
            raise RegimeViolation(
                f"m_cap must lie in (0, 2*lam) = (0, {2 * self.lam}), got {self.m_cap}"
            )
        if self.a0 is None:
            object.__setattr__(self, "a0", default_a0(self.lam))
        else:
            object.__setattr__(self, "a0_custom", True)
        if self.epsilon * self.omega >= 2.0 * self.lam:
            raise RegimeViolation(
                "epsilon*omega = {:.6g} >= 2*lam = {:.6g}: no minimizer exists "
                "(energy unbounded below)".format(self.epsilon * self.omega, 2 * self.lam)
            )

    @property
    def eps_omega(self) -> float:
        return self.epsilon * self.omega


@dataclass(frozen=True)
class DerivedParams:
    """Rotation-deformed bulk coefficients and the lattice length scales.

    ``alpha_eo``/``lambda_eo`` define the deformed bulk profile
    ``p(x) = alpha_eo - |x|_{lambda_eo}^2``; ``a0_tilde``/``lambda_tilde_sq``
    are the rescaled trap coefficients of the unconstrained problem; ``ell``
    is the vortex-lattice pitch scale and ``h_ex = 1/ell^2`` the effective
    field seen by the unit-cell problem.  ``h_ex * ell**2 == 1`` exactly;
    for ``omega == 0`` there is no lattice scale and ``ell = inf, h_ex = 0``.
    """

    alpha_eo: float
    lambda_eo: float
    a0_tilde: float
    lambda_tilde_sq: float
    ell: float
    h_ex: float
    log_eps: float

    @property
    def sqrt_alpha(self) -> float:
        """Semi-axis of the deformed bulk along the first coordinate."""
        return math.sqrt(self.alpha_eo)

    @property
    def bulk_axes(self) -> tuple[float, float]:
        """Full diameters (conjugate, transverse) of the deformed bulk ellipse."""
        r = self.sqrt_alpha
        return 2.0 * r, 2.0 * r / self.lambda_eo


def derive_params(p: PhysicalParams) -> DerivedParams:
    """Evaluate every closed-form derived quantity for the given parameters.

    Raises ``RegimeViolation`` when ``epsilon*omega >= 2*lam`` (the
    constructor of ``PhysicalParams`` already refuses such parameters, so
    this can only trigger on hand-built instances).
    """
    eo = p.epsilon * p.omega
    if eo >= 2.0 * p.lam:
        raise RegimeViolation(
            f"epsilon*omega = {eo:.6g} >= 2*lam = {2 * p.lam:.6g}"
        )
    one_minus = 1.0 - eo**2 / 4.0
    ratio = (1.0 - eo**2 / (4.0 * p.lam**2)) / one_minus
    alpha_eo = p.a0 * ratio**0.25
    lambda_eo = p.lam * math.sqrt(ratio)
    a0_tilde = p.a0 / one_minus
    lambda_tilde_sq = (p.lam**2 - eo**2 / 4.0) / one_minus
    log_eps = abs(math.log(p.epsilon))
    if p.omega > 0.0:
        h_ex = math.sqrt(p.omega * log_eps)
        ell = 1.0 / math.sqrt(h_ex)
    else:
        h_ex = 0.0
        ell = math.inf
    return DerivedParams(
        alpha_eo=alpha_eo,
        lambda_eo=lambda_eo,
        a0_tilde=a0_tilde,
        lambda_tilde_sq=lambda_tilde_sq,
        ell=ell,
        h_ex=h_ex,
        log_eps=log_eps,
    )


def elliptic_radius_sq(x1, x2, lam: float):
    """``|x|_lam^2 = x1^2 + lam^2 x2^2`` (vectorized)."""
    return x1 * x1 + (lam * lam) * (x2 * x2)


def trap_profile(x, p: PhysicalParams, d: DerivedParams | None = None, kind: str = "a"):
    """Closed-form potentials evaluated at ``x = (x1, x2)``.

    kind="a"    : bare trap profile  a0 - |x|_lam^2
    kind="p_eo" : deformed bulk profile  alpha_eo - |x|_{lambda_eo}^2
    kind="V_eo" : centrifugally corrected trap  a(x) + (eps*omega)^2 |x|^2 / 4

    ``x`` may be a pair of scalars or a pair of broadcastable arrays.
    """
    x1, x2 = np.asarray(x[0], dtype=float), np.asarray(x[1], dtype=float)
    if kind == "a":
        return p.a0 - elliptic_radius_sq(x1, x2, p.lam)
    if kind == "p_eo":
        if d is None:
            d = derive_params(p)
        return d.alpha_eo - elliptic_radius_sq(x1, x2, d.lambda_eo)
    if kind == "V_eo":
        eo = p.epsilon * p.omega
        return (
            p.a0
            - elliptic_radius_sq(x1, x2, p.lam)
            + (eo**2 / 4.0) * (x1 * x1 + x2 * x2)
        )
    raise ValueError(f"unknown trap profile kind {kind!r}")


@dataclass(frozen=True)
class RegimeReport:
    """Advisory report on the asymptotic speed window."""

    omega: float
    lower: float
    upper: float
    lower_ok: bool
    upper_ok: bool
    lower_margin: float
    upper_margin: float
    ultra_speed_ratio: float

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    def summary(self) -> str:
        state = "pass" if self.ok else "fail"
        return (
            f"regime {state}: {self.lower:.4g} <= omega={self.omega:.4g} <= "
            f"{self.upper:.4g}, omega/|ln eps| = {self.ultra_speed_ratio:.4g}"
        )


def check_regime(p: PhysicalParams, b_factor: float = 2.0) -> RegimeReport:
    """Check ``b_factor*|ln eps| <= omega <= m_cap/eps`` with margins.

    Advisory only: the asymptotic energy law is meaningful when the
    ultra-speed ratio ``omega/|ln eps|`` is large.
    """
    log_eps = abs(math.log(p.epsilon))
    lower = b_factor * log_eps
    upper = p.m_cap / p.epsilon
    return RegimeReport(
        omega=p.omega,
        lower=lower,
        upper=upper,
        lower_ok=p.omega >= lower,
        upper_ok=p.omega <= upper,
        lower_margin=p.omega - lower,
        upper_margin=upper - p.omega,
        ultra_speed_ratio=p.omega / log_eps if log_eps > 0 else math.inf,
    )
