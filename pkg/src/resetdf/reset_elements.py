"""Reset controllers, linear SISO elements and their series composition.

All frequencies are in rad/s.  A reset controller flows as the linear
system ``(A, B, C, D)`` and jumps ``x <- A_rho x`` whenever its input
crosses zero.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import signal

from .errors import ParameterError, UnsupportedTopologyError
from .numkit import as_matrix, mat_solve

__all__ = ['ResetController', 'LinearElement', 'CgLpDesign', 'SeriesChain',
           'make_gfore', 'make_gsore', 'make_clegg', 'make_lead', 'make_pid',
           'make_cglp']


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ResetController:
    """SISO reset controller in state-space form.

    Attributes
    ----------
    A, B, C : ndarray
        Base-linear matrices of shape (n, n), (n, 1) and (1, n).
    D : float
        Direct feedthrough.
    A_rho : ndarray
        Diagonal (n, n) reset matrix with entries in [-1, 1].
    name : str
        Label used in reports.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    A_rho: np.ndarray
    name: str = 'reset'

    def __post_init__(self):
        A = as_matrix(self.A, square=True)
        n = A.shape[0]
        B = as_matrix(self.B).reshape(-1, 1) if np.size(self.B) == n else None
        C = as_matrix(self.C).reshape(1, -1) if np.size(self.C) == n else None
        if B is None or C is None:
            raise ParameterError(
                f"B and C must have {n} entries to match A ({n}x{n})")
        A_rho = as_matrix(self.A_rho, square=True)
        if A_rho.shape != (n, n):
            raise ParameterError(f"A_rho must be {n}x{n}")
        if np.any(A_rho != np.diag(np.diag(A_rho))):
            raise ParameterError("A_rho must be diagonal")
        if np.any(np.abs(np.diag(A_rho)) > 1):
            raise ParameterError(
                f"reset gains must lie in [-1, 1], got {np.diag(A_rho)}")
        if not math.isfinite(self.D):
            raise ParameterError("D must be finite")
        object.__setattr__(self, 'A', _frozen(A))
        object.__setattr__(self, 'B', _frozen(B))
        object.__setattr__(self, 'C', _frozen(C))
        object.__setattr__(self, 'D', float(self.D))
        object.__setattr__(self, 'A_rho', _frozen(A_rho))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def is_linear(self):
        """True when A_rho is the identity, i.e. resets do nothing."""
        return bool(np.all(np.diag(self.A_rho) == 1.0))

    def linear_response(self, s):
        """Base-linear transfer function ``C (sI - A)^-1 B + D`` at `s`."""
        M = s * np.eye(self.n) - self.A
        return (self.C @ mat_solve(M, self.B)).item() + self.D

    def scaled(self, k):
        """Return the controller with its output multiplied by `k`."""
        return ResetController(self.A, self.B, k * self.C, k * self.D,
                               self.A_rho, self.name)


@dataclass(frozen=True)
class LinearElement:
    """Rational transfer function ``num(s) / den(s)``.

    Coefficients are in descending powers of `s`, as in numpy.polyval.
    """
    num: np.ndarray
    den: np.ndarray
    name: str = 'linear'

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, float)), 'f')
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, float)), 'f')
        if den.size == 0:
            raise ParameterError("denominator is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ParameterError("coefficients must be finite")
        object.__setattr__(self, 'num', _frozen(num))
        object.__setattr__(self, 'den', _frozen(den))

    @property
    def is_proper(self):
        return self.num.size <= self.den.size

    @property
    def is_strictly_proper(self):
        return self.num.size < self.den.size or not np.any(self.num)

    def __call__(self, s):
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def scaled(self, k):
        return LinearElement(k * self.num, self.den, self.name)

    def state_space(self):
        """Controllable-canonical realization ``(A, B, C, D)``."""
        if not self.is_proper:
            raise ParameterError(f"{self.name} is improper; no realization")
        if self.den.size == 1:
            return (np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                    float(self.num[-1] / self.den[0]))
        A, B, C, D = signal.tf2ss(self.num, self.den)
        return A, B, C, float(D.item())


@dataclass(frozen=True)
class CgLpDesign:
    """One CgLp configuration.

    `gain_corr` holds alpha for first-order designs and kappa for second
    order.  `beta` and `zeta` only apply to second-order designs.
    """
    order: int
    gamma: float
    omega_r: float
    omega_f: float
    gain_corr: float
    beta: float = None
    zeta: float = None

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ParameterError(f"order must be 1 or 2, got {self.order}")
        if not -1 <= self.gamma <= 1:
            raise ParameterError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if not self.omega_f > self.omega_r > 0:
            raise ParameterError(
                f"need omega_f > omega_r > 0, got omega_r={self.omega_r}, "
                f"omega_f={self.omega_f}")
        if not self.gain_corr > 0:
            raise ParameterError("gain correction must be positive")
        if self.order == 2 and not (self.beta and self.beta > 0
                                    and self.zeta and self.zeta > 0):
            raise ParameterError("second-order design needs beta, zeta > 0")


@dataclass(frozen=True)
class SeriesChain:
    """Ordered series connection; at most one element may reset."""
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        elements = tuple(self.elements)
        for el in elements:
            if not isinstance(el, (ResetController, LinearElement)):
                raise ParameterError(f"unsupported element {el!r}")
        if sum(isinstance(el, ResetController) for el in elements) > 1:
            raise UnsupportedTopologyError(
                "a series chain may hold at most one reset element")
        object.__setattr__(self, 'elements', elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def then(self, *others):
        """Append elements (or whole chains) downstream."""
        out = list(self.elements)
        for o in others:
            out.extend(o.elements if isinstance(o, SeriesChain) else [o])
        return SeriesChain(tuple(out))

    @property
    def reset_index(self):
        for i, el in enumerate(self.elements):
            if isinstance(el, ResetController):
                return i
        return None

    @property
    def reset_element(self):
        i = self.reset_index
        return None if i is None else self.elements[i]

    def split(self):
        """Return (upstream linear elements, reset element, downstream)."""
        i = self.reset_index
        if i is None:
            return self.elements, None, ()
        return self.elements[:i], self.elements[i], self.elements[i + 1:]


def _check_gamma(gamma):
    if not -1 <= gamma <= 1:
        raise ParameterError(f"gamma must lie in [-1, 1], got {gamma}")


def make_gfore(omega_r, gamma, alpha):
    """Generalized first-order reset element with corner `omega_r`."""
    _check_gamma(gamma)
    if not omega_r > 0 or not alpha > 0:
        raise ParameterError("omega_r and alpha must be positive")
    w = alpha * omega_r
    return ResetController([[-w]], [[w]], [[1.0]], 0.0, [[gamma]], 'GFORE')


def make_gsore(omega_r, gamma, kappa, beta):
    """Generalized second-order reset element.

    Base-linear part is ``1 / ((s/(kappa w_r))^2 + 2 beta s/w_r + 1)`` and
    both states are reset by `gamma`.
    """
    _check_gamma(gamma)
    if not (omega_r > 0 and kappa > 0 and beta > 0):
        raise ParameterError("omega_r, kappa and beta must be positive")
    wk2 = (kappa * omega_r) ** 2
    A = [[0.0, 1.0], [-wk2, -2 * beta * kappa**2 * omega_r]]
    return ResetController(A, [[0.0], [wk2]], [[1.0, 0.0]], 0.0,
                           gamma * np.eye(2), 'GSORE')


def make_clegg():
    """Clegg integrator: an integrator reset to zero at input crossings."""
    return ResetController([[0.0]], [[1.0]], [[1.0]], 0.0, [[0.0]], 'Clegg')


def make_lead(order, omega_r, omega_f, zeta=None):
    """Linear lead filter matching a first- or second-order reset element.

    The second-order denominator has unit damping, ``(s/w_f)^2 + 2 s/w_f + 1``.
    """
    if not omega_f >= omega_r > 0:
        raise ParameterError("need omega_f >= omega_r > 0")
    if order == 1:
        return LinearElement([1 / omega_r, 1.0], [1 / omega_f, 1.0], 'lead1')
    if order == 2:
        if zeta is None or not zeta > 0:
            raise ParameterError("second-order lead needs zeta > 0")
        return LinearElement([1 / omega_r**2, 2 * zeta / omega_r, 1.0],
                             [1 / omega_f**2, 2 / omega_f, 1.0], 'lead2')
    raise ParameterError(f"order must be 1 or 2, got {order}")


def make_pid(kp, omega_i, omega_f):
    """PI controller with a first-order low-pass roll-off.

    ``kp * (1 + omega_i/s) / (s/omega_f + 1)``; both corners in rad/s.
    """
    if not (kp > 0 and omega_i > 0 and omega_f > 0):
        raise ParameterError("kp, omega_i and omega_f must be positive")
    num = kp * np.array([1.0, omega_i])
    den = np.polymul([1.0, 0.0], [1 / omega_f, 1.0])
    return LinearElement(num, den, 'PID')


def make_cglp(design):
    """Reset lag element followed by the lead filter of the same order."""
    d = design
    if d.order == 1:
        reset = make_gfore(d.omega_r, d.gamma, d.gain_corr)
        lead = make_lead(1, d.omega_r, d.omega_f)
    else:
        reset = make_gsore(d.omega_r, d.gamma, d.gain_corr, d.beta)
        lead = make_lead(2, d.omega_r, d.omega_f, d.zeta)
    return SeriesChain((reset, lead))
