"""Cross-check of analytic harmonics against the time-domain simulator.

Each case drives one element with a sinusoid, lets it settle, extracts
the harmonics from the simulated output and compares them with
`chain_harmonic`.  The contract is 2 % relative magnitude and 2 deg of
phase wherever the analytic magnitude exceeds 1e-8, and extracted even
harmonics below 1e-6.
"""

from dataclasses import dataclass
import math

import numpy as np

from .approx import alpha_choice, beta_choice, design_cglp, kappa_choice
from .reset_elements import make_cglp, make_clegg, make_gfore, make_gsore
from .hosidf import as_chain, chain_harmonic
from .simulator import SimConfig, extract_harmonics, simulate_element
from .numkit import mat_exp

__all__ = ['OracleCase', 'OracleRow', 'oracle_elements', 'oracle_cases',
           'settle_periods', 'samples_per_period', 'run_case',
           'run_validation', 'MAG_TOL', 'PHASE_TOL_DEG', 'EVEN_TOL',
           'MAG_FLOOR']

MAG_TOL = 0.02
PHASE_TOL_DEG = 2.0
EVEN_TOL = 1e-6
MAG_FLOOR = 1e-8
ORDERS = (1, 3, 5)


@dataclass(frozen=True)
class OracleCase:
    label: str
    element: object
    omega: float
    omega_r: float


@dataclass(frozen=True)
class OracleRow:
    """Comparison of one (element, omega, n) triple."""
    label: str
    omega: float
    n: int
    analytic: complex
    simulated: complex
    rel_error: float
    phase_error_deg: float
    passed: bool


def oracle_elements(omega_r=1.0):
    """The built-in element set, keyed by label.

    The CgLp lead poles sit at 20 omega_r, keeping the stiffness of the
    simulation moderate over the grid.
    """
    out = {'Clegg': make_clegg()}
    for g in (-0.3, 0.0, 0.3):
        out[f'GFORE(g={g:g})'] = make_gfore(omega_r, g, alpha_choice(g))
    for g in (0.0, 0.2):
        k = kappa_choice(g)
        out[f'GSORE(g={g:g})'] = make_gsore(omega_r, g, k, beta_choice(k))
    out['CgLp-FORE(g=0)'] = make_cglp(design_cglp(1, 0.0, omega_r,
                                                  20 * omega_r))
    out['CgLp-SORE(g=0.1)'] = make_cglp(design_cglp(2, 0.1, omega_r,
                                                    20 * omega_r, 1.0))
    return out


def oracle_cases(omega_r=1.0, points=12):
    """Every element at `points` log-spaced frequencies in [w_r/10, 10 w_r]."""
    grid = np.geomspace(omega_r / 10, 10 * omega_r, points)
    return [OracleCase(label, el, float(w), omega_r)
            for label, el in oracle_elements(omega_r).items() for w in grid]


def _state_matrices(element):
    chain = as_chain(element)
    reset = chain.reset_element
    linear_poles = []
    for el in chain.elements:
        if el is not reset and el.den.size > 1:
            linear_poles.extend(np.roots(el.den))
    return reset, np.array(linear_poles)


def settle_periods(element, omega, tol=1e-10, lo=2, hi=200):
    """Periods needed for the start-up transient to fall below `tol`.

    The reset state contracts by the spectral radius of
    ``A_rho exp(A pi/omega)`` every half period; linear parts decay with
    their slowest pole.
    """
    reset, poles = _state_matrices(element)
    period = 2 * math.pi / omega
    need = lo
    if reset is not None:
        M = reset.A_rho @ mat_exp((math.pi / omega) * reset.A)
        rho = max(abs(np.linalg.eigvals(M)))
        if rho >= 1:
            return hi
        if rho > 0:
            need = max(need, math.ceil(math.log(tol) / (2 * math.log(rho))))
    if poles.size:
        decay = -max(poles.real)
        if decay <= 0:
            return hi
        need = max(need, math.ceil(-math.log(tol) / (decay * period)))
    return int(min(need, hi))


def samples_per_period(element, omega, base=2000, h_lambda=0.05):
    """Steps per period keeping ``dt * |fastest eigenvalue|`` at `h_lambda`.

    Always even, so that half a period is a whole number of steps.
    """
    chain = as_chain(element)
    fastest = 0.0
    for el in chain.elements:
        if hasattr(el, 'A_rho'):
            if el.A.size:
                fastest = max(fastest, max(abs(np.linalg.eigvals(el.A))))
        elif el.den.size > 1:
            fastest = max(fastest, max(abs(np.roots(el.den))))
    period = 2 * math.pi / omega
    n = int(max(base, math.ceil(period * fastest / h_lambda)))
    return n + n % 2


def _phase_err(a, b):
    d = math.degrees(np.angle(b / a))
    return abs(d)


def run_case(case, orders=ORDERS):
    """Simulate one case and compare orders `orders` plus order 2."""
    w = case.omega
    f = w / (2 * math.pi)
    N = samples_per_period(case.element, w)
    settle = settle_periods(case.element, w)
    h = 1 / (f * N)
    # Half-step phase shift puts the input zeros between samples, which
    # keeps the DFT of the discontinuous output second-order accurate.
    cfg = SimConfig.for_frequency(f, N, settle, 4, ref_phase=-w * h / 2)
    result = simulate_element(case.element, cfg)
    sim = extract_harmonics(result, orders=tuple(orders) + (2,))
    rows = []
    for n in orders:
        g = chain_harmonic(case.element, w, n)
        s = sim[n]
        if abs(g) > MAG_FLOOR:
            rel = abs(abs(s) - abs(g)) / abs(g)
            ph = _phase_err(g, s)
            ok = rel <= MAG_TOL and ph <= PHASE_TOL_DEG
        else:
            rel, ph = abs(s - g), 0.0
            ok = True
        rows.append(OracleRow(case.label, w, n, g, s, rel, ph, bool(ok)))
    even = sim[2]
    rows.append(OracleRow(case.label, w, 2, 0j, even, abs(even), 0.0,
                          bool(abs(even) < EVEN_TOL)))
    return rows


def run_validation(cases=None, orders=ORDERS):
    """Run `cases` (default: the full built-in grid) and return all rows."""
    cases = oracle_cases() if cases is None else cases
    rows = []
    for case in cases:
        rows.extend(run_case(case, orders))
    return rows
