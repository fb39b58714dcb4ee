"""Analytic describing functions and higher-order harmonics of reset systems.

For a sinusoidal input ``sin(w t)`` the steady-state output of a reset
controller is ``sum_n Im(G_n(w) exp(j n w t))``.  `describing_function`
returns ``G_n`` in closed form; `chain_harmonic` propagates it through a
series chain containing linear elements.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .reset_elements import LinearElement, ResetController, SeriesChain
from .errors import (DFUndefinedError, MarginalPointError, ParameterError,
                     ResetDFError, SingularMatrixError)
from .numkit import mat_exp, mat_inv, mat_solve

__all__ = ['HosidfKernels', 'HarmonicResponse', 'kernels',
           'describing_function', 'chain_harmonic', 'sensitivity_df',
           'sweep', 'log_grid', 'as_chain', 'DEFAULT_ORDERS']

DEFAULT_ORDERS = (1, 3, 5, 7, 9)


@dataclass(frozen=True)
class HosidfKernels:
    """Matrix kernels of the HOSIDF formula at one frequency."""
    omega: float
    Lambda: np.ndarray
    Delta: np.ndarray
    Delta_r: np.ndarray
    Gamma_r: np.ndarray
    Theta_D: np.ndarray


def kernels(ctrl, omega):
    """Evaluate the HOSIDF kernels of `ctrl` at `omega` rad/s.

    Raises
    ------
    DFUndefinedError
        If ``Lambda`` or ``Delta_r`` is (numerically) singular, i.e. the
        reset sequence has no unique periodic solution at this frequency.
    """
    if not omega > 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    A, A_rho = ctrl.A, ctrl.A_rho
    ident = np.eye(ctrl.n)
    Lambda = omega**2 * ident + A @ A
    E = mat_exp((math.pi / omega) * A)
    Delta = ident + E
    Delta_r = ident + A_rho @ E
    try:
        Lambda_inv = mat_inv(Lambda, omega)
        Gamma_r = mat_solve(Delta_r, A_rho @ Delta @ Lambda_inv, omega)
    except SingularMatrixError as exc:
        raise DFUndefinedError(
            "describing function undefined; no unique periodic reset "
            "sequence", omega) from exc
    Theta_D = (-2 * omega**2 / math.pi) * Delta @ (Gamma_r - Lambda_inv)
    if ctrl.is_linear:
        # Exact zero instead of cancellation noise when nothing resets.
        Theta_D = np.zeros_like(Theta_D)
    return HosidfKernels(omega, Lambda, Delta, Delta_r, Gamma_r, Theta_D)


def describing_function(ctrl, omega, n=1, kern=None):
    """Complex gain from input frequency `omega` to output harmonic `n`.

    Parameters
    ----------
    ctrl : ResetController
    omega : float
        Input frequency in rad/s.
    n : int
        Harmonic order; even orders return exactly 0.
    kern : HosidfKernels, optional
        Precomputed kernels at `omega`, reused across orders.

    Returns
    -------
    complex
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"harmonic order must be a positive integer, got {n}")
    if n > 1 and n % 2 == 0:
        return 0j
    if kern is None:
        kern = kernels(ctrl, omega)
    ident = np.eye(ctrl.n)
    M = 1j * n * omega * ident - ctrl.A
    if n == 1:
        v = (ident + 1j * kern.Theta_D) @ ctrl.B
        return (ctrl.C @ mat_solve(M, v, omega)).item() + ctrl.D
    v = (1j * kern.Theta_D) @ ctrl.B
    return (ctrl.C @ mat_solve(M, v, omega)).item()


def as_chain(obj):
    """Wrap a single element in a `SeriesChain`; chains pass through."""
    if isinstance(obj, SeriesChain):
        return obj
    if isinstance(obj, (ResetController, LinearElement)):
        return SeriesChain((obj,))
    return SeriesChain(tuple(obj))


def _linear_at(elements, s):
    out = 1 + 0j
    for el in elements:
        out *= el(s) if isinstance(el, LinearElement) else el.linear_response(s)
    return out


def chain_harmonic(chain, omega, n=1, kern=None):
    """Harmonic `n` of a series chain driven by ``sin(omega t)``.

    Upstream linear elements only rescale and time-shift the sinusoid that
    reaches the reset element, so they enter as ``|U| exp(j n arg U)`` with
    ``U`` their response at ``j omega``.  Downstream elements act on the
    harmonic itself and are evaluated at ``j n omega``.
    """
    chain = as_chain(chain)
    up, reset, down = chain.split()
    if reset is None:
        return _linear_at(up, 1j * omega) if n == 1 else 0j
    Gn = describing_function(reset, omega, n, kern)
    if Gn == 0:
        return 0j
    U = _linear_at(up, 1j * omega)
    if U == 0:
        return 0j
    up_factor = abs(U) * (U / abs(U)) ** n
    return up_factor * Gn * _linear_at(down, 1j * n * omega)


def sensitivity_df(chain, omega):
    """First-harmonic sensitivity ``1 / (1 + L_1(j omega))``."""
    L1 = chain_harmonic(chain, omega, 1)
    den = 1 + L1
    if abs(den) < 1e-12 * max(1.0, abs(L1)):
        raise MarginalPointError(
            f"open loop passes through -1 at omega={omega:.6g} rad/s")
    return 1 / den


def log_grid(omega_min, omega_max, points_per_decade=1000):
    """Log-spaced grid with `points_per_decade` points per decade."""
    if not omega_max > omega_min > 0:
        raise ParameterError("need omega_max > omega_min > 0")
    decades = math.log10(omega_max / omega_min)
    num = max(2, int(math.ceil(decades * points_per_decade)) + 1)
    return np.geomspace(omega_min, omega_max, num)


@dataclass(frozen=True)
class HarmonicResponse:
    """Table of ``G_n(omega)`` over a frequency grid.

    ``values[i, k]`` belongs to ``omega[i]`` and ``orders[k]``.  Points that
    failed to evaluate hold NaN and have an entry in `errors`.
    """
    omega: np.ndarray
    orders: tuple
    values: np.ndarray
    errors: dict = field(default_factory=dict)

    def __getitem__(self, n):
        return self.values[:, self.orders.index(n)]

    def magnitude_db(self, n):
        with np.errstate(divide='ignore'):
            return 20 * np.log10(np.abs(self[n]))

    def phase_deg(self, n):
        return np.degrees(np.angle(self[n]))


def sweep(obj, grid, orders=DEFAULT_ORDERS):
    """Evaluate harmonics of an element or chain over `grid` (rad/s).

    Per-point failures are recorded in ``errors[(i, n)]`` instead of
    aborting the sweep.
    """
    chain = as_chain(obj)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or \
            np.any(np.diff(grid) <= 0):
        raise ParameterError("grid must be positive and strictly ascending")
    orders = tuple(int(n) for n in orders)
    values = np.full((grid.size, len(orders)), np.nan + 0j)
    errors = {}
    reset = chain.reset_element
    for i, w in enumerate(grid):
        kern = None
        if reset is not None:
            try:
                kern = kernels(reset, w)
            except ResetDFError as exc:
                for n in orders:
                    errors[(i, n)] = str(exc)
                continue
        for k, n in enumerate(orders):
            try:
                values[i, k] = chain_harmonic(chain, w, n, kern)
            except ResetDFError as exc:
                errors[(i, n)] = str(exc)
    values.setflags(write=False)
    return HarmonicResponse(grid, orders, values, errors)
