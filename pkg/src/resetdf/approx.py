"""Closed-form parameter laws and low/high-frequency harmonic estimates.

These are the cheap formulas used for tuning: the reset factor F, the gain
corrections alpha (first order) and kappa (second order), the damping
choice beta = 1/(2 kappa) that cancels low-frequency harmonics of GSORE,
the largest usable gamma for a phase target, and the harmonic proxy sigma.
"""

from dataclasses import dataclass
import math

from .reset_elements import CgLpDesign
from .errors import InfeasibleError, ParameterError

__all__ = ['factor_F', 'alpha_choice', 'kappa_choice', 'beta_choice',
           'gamma_max', 'sigma', 'design_cglp', 'approx_eval', 'ApproxReport',
           'KINDS', 'FORE_LEAD_LIMIT_DEG']

#: Largest asymptotic phase lead of a first-order CgLp, atan(4/pi), degrees.
FORE_LEAD_LIMIT_DEG = math.degrees(math.atan(4 / math.pi))

KINDS = ('GFORE', 'GSORE', 'CgLp-FORE', 'CgLp-SORE')


def factor_F(gamma):
    """``(4/pi) (1 - gamma) / (1 + gamma)``; unbounded at gamma = -1."""
    if not -1 <= gamma <= 1:
        raise ParameterError(f"gamma must lie in (-1, 1], got {gamma}")
    if gamma == -1:
        raise ParameterError("F is unbounded at gamma = -1")
    return 4 / math.pi * (1 - gamma) / (1 + gamma)


def alpha_choice(gamma):
    """GFORE corner correction giving unity high-frequency CgLp gain."""
    return 1 / math.sqrt(1 + factor_F(gamma) ** 2)


def kappa_choice(gamma):
    """GSORE corner correction giving unity high-frequency CgLp gain."""
    return (1 + factor_F(gamma) ** 2) ** -0.25


def beta_choice(kappa):
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    return 1 / (2 * kappa)


def gamma_max(phi):
    """Largest gamma whose first-order CgLp reaches `phi` degrees of lead.

    Only meaningful for first-order CgLp; the asymptotic lead there is
    ``atan(F)``, so `phi` must stay below ``atan(4/pi)`` (about 51.85 deg).
    """
    if not 0 < phi < FORE_LEAD_LIMIT_DEG:
        raise InfeasibleError(
            f"no gamma in (-1, 1) reaches {phi} deg of lead; first-order "
            f"CgLp saturates at {FORE_LEAD_LIMIT_DEG:.2f} deg",
            max_lead=FORE_LEAD_LIMIT_DEG)
    F = math.tan(math.radians(phi))
    return (4 / math.pi - F) / (4 / math.pi + F)


def sigma(design):
    """Low-frequency harmonic proxy ``(1 - gamma) / (corr * omega_r)^2``.

    `omega_r` must be in rad/s; the result is in (rad/s)^-2.
    """
    return (1 - design.gamma) / (design.gain_corr * design.omega_r) ** 2


def design_cglp(order, gamma, omega_r, omega_f, zeta=1.0):
    """CgLp design with alpha/kappa for unity gain and beta = 1/(2 kappa)."""
    if order == 1:
        return CgLpDesign(1, gamma, omega_r, omega_f, alpha_choice(gamma))
    kappa = kappa_choice(gamma)
    return CgLpDesign(2, gamma, omega_r, omega_f, kappa, beta_choice(kappa),
                      zeta)


@dataclass(frozen=True)
class ApproxReport:
    """Simplified-formula prediction for one element, regime and order.

    `phase` is in radians and None where the formula gives only a
    magnitude.  `formula` names the expression used.
    """
    kind: str
    regime: str
    n: int
    magnitude: float
    phase: float = None
    formula: str = ''

    @property
    def value(self):
        """Complex prediction; requires a phase."""
        if self.phase is None:
            raise ValueError(f"{self.formula} predicts magnitude only")
        return self.magnitude * complex(math.cos(self.phase),
                                        math.sin(self.phase))


def approx_eval(kind, regime, n, design, omega, check_regime=True):
    """Simplified DF/HOSIDF prediction for `kind` at `omega` rad/s.

    `kind` is one of 'GFORE', 'GSORE', 'CgLp-FORE', 'CgLp-SORE'; the bare
    reset elements use the corresponding fields of `design`.  `regime` is
    'lf' (omega <= omega_r/10) or 'hf' (omega >= 10 omega_r).
    """
    if kind not in KINDS:
        raise ParameterError(f"unknown element kind {kind!r}")
    if regime not in ('lf', 'hf'):
        raise ParameterError(f"regime must be 'lf' or 'hf', got {regime!r}")
    if int(n) != n or n < 1:
        raise ParameterError(f"harmonic order must be a positive integer, got {n}")
    order = 1 if kind.endswith('FORE') else 2
    if design.order != order:
        raise ParameterError(f"{kind} needs an order-{order} design")
    wr = design.omega_r
    if check_regime:
        if regime == 'lf' and omega > wr / 10:
            raise ParameterError(f"lf formulas need omega <= {wr / 10:.6g}")
        if regime == 'hf' and omega < 10 * wr:
            raise ParameterError(f"hf formulas need omega >= {10 * wr:.6g}")
    key = f"{kind}.{regime}.{'n1' if n == 1 else 'odd' if n % 2 else 'even'}"
    if n > 1 and n % 2 == 0:
        return ApproxReport(kind, regime, n, 0.0, 0.0, key)

    g = design.gamma
    corr = design.gain_corr
    F = factor_F(g)
    cglp = kind.startswith('CgLp')
    if regime == 'lf':
        if n == 1:
            return ApproxReport(kind, regime, n, 1.0, 0.0, key)
        scale = 2 * (1 - g) / math.pi * omega**2 / (corr * wr) ** 2
        if order == 2:
            scale *= abs(4 * corr**2 * design.beta**2 - 1)
        return ApproxReport(kind, regime, n, scale, None, key)

    root = math.sqrt(1 + F**2)
    if order == 1:
        if cglp:
            table = {True: (corr * root, math.atan(F)),
                     False: (corr * F, None)}
        else:
            table = {True: (root * corr * wr / omega,
                            -math.pi / 2 + math.atan(F)),
                     False: (F * corr * wr / (n * omega), None)}
    else:
        if cglp:
            table = {True: (corr**2 * root, math.pi + math.atan(F)),
                     False: (corr**2 * F, None)}
        else:
            table = {True: (root * (corr * wr / omega) ** 2, math.atan(F)),
                     False: ((corr * wr / (n * omega)) ** 2 * F, None)}
    mag, phase = table[n == 1]
    return ApproxReport(kind, regime, n, mag, phase, key)
