"""CgLp tuning: hit a phase-lead target at crossover with minimal harmonics.

For every candidate reset gain gamma the corner frequency omega_r is pushed
as high as possible while the exact first-harmonic CgLp phase at the
crossover frequency still reaches the target.  Candidates are then ranked
by the low-frequency harmonic proxy sigma, and the gamma grid can be
refined around the winner.

Frequencies in `TuningProblem` are in Hz, like the tables they are usually
taken from; everything returned is in rad/s.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy import optimize

from .approx import (FORE_LEAD_LIMIT_DEG, alpha_choice, beta_choice,
                     gamma_max, kappa_choice, sigma)
from .reset_elements import CgLpDesign, make_cglp
from .errors import InfeasibleError, ParameterError, ResetDFError
from .hosidf import as_chain, chain_harmonic

__all__ = ['TuningProblem', 'CandidateResult', 'TuningTable', 'phase_at',
           'find_omega_r', 'enumerate_candidates', 'refine', 'tune',
           'zeta_flatness_search', 'normalize_loop_gain', 'DEFAULT_ZETAS']

TWO_PI = 2 * math.pi
DEFAULT_ZETAS = tuple(np.round(np.arange(0.6, 1.5001, 0.1), 10))

# Downward scan for the highest phase crossing: omega_r in
# [omega_c / SCAN_SPAN, omega_c], SCAN_DENSITY points per decade.
SCAN_SPAN = 1000.0
SCAN_DENSITY = 200
# Second-order feasibility probe sits this far below crossover.
SORE_PROBE_RATIO = 50.0


@dataclass(frozen=True)
class TuningProblem:
    """Phase-lead target and candidate reset gains.

    Attributes
    ----------
    order : int
        1 for CgLp-FORE, 2 for CgLp-SORE.
    phi_target : float
        Required phase lead at crossover, degrees.
    omega_c : float
        Crossover (bandwidth) frequency, Hz.
    gamma_candidates : tuple of float
        Reset gains to try, each in (-1, 1].
    omega_f : float
        Lead-filter pole corner, Hz.  Kept well above crossover so that the
        lead filter itself adds little lag there.
    rounds : int
        Refinement rounds after the first enumeration.
    phase_tol : float
        Accepted |achieved - target| phase error, degrees.
    zeta : float or None
        Lead-filter zero damping for order 2; None selects it per
        candidate by the gain-flatness search.
    zeta_candidates : tuple of float
        Grid for the flatness search.
    """
    order: int
    phi_target: float
    omega_c: float
    gamma_candidates: tuple
    omega_f: float = 1e4
    rounds: int = 0
    phase_tol: float = 0.1
    zeta: float = None
    zeta_candidates: tuple = DEFAULT_ZETAS

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ParameterError(f"order must be 1 or 2, got {self.order}")
        if not self.phi_target > 0:
            raise ParameterError("phi_target must be positive")
        if not self.omega_f > self.omega_c > 0:
            raise ParameterError("need omega_f > omega_c > 0")
        gammas = tuple(float(g) for g in self.gamma_candidates)
        if not gammas:
            raise ParameterError("gamma_candidates is empty")
        for g in gammas:
            if not -1 < g <= 1:
                raise ParameterError(f"gamma {g} outside (-1, 1]")
        object.__setattr__(self, 'gamma_candidates', gammas)
        if int(self.rounds) != self.rounds or self.rounds < 0:
            raise ParameterError("rounds must be a non-negative integer")
        if not self.phase_tol > 0:
            raise ParameterError("phase_tol must be positive")
        if self.zeta is not None and not self.zeta > 0:
            raise ParameterError("zeta must be positive")
        if not self.zeta_candidates:
            raise ParameterError("zeta_candidates is empty")

    @property
    def wc(self):
        """Crossover in rad/s."""
        return TWO_PI * self.omega_c

    @property
    def wf(self):
        """Lead-filter corner in rad/s."""
        return TWO_PI * self.omega_f


@dataclass(frozen=True)
class CandidateResult:
    """One tuned row: ``a = omega_c / omega_r`` (a pure ratio)."""
    gamma: float
    omega_r: float
    a: float
    gain_corr: float
    beta: float
    zeta: float
    achieved_phase: float
    sigma: float
    design: CgLpDesign = field(repr=False, compare=False)


@dataclass(frozen=True)
class TuningTable:
    """Feasible candidates sorted by sigma plus the rejected gammas."""
    candidates: tuple
    rejected: dict

    @property
    def best(self):
        return self.candidates[0]


def _design(problem, gamma, omega_r, zeta):
    if problem.order == 1:
        return CgLpDesign(1, gamma, omega_r, problem.wf, alpha_choice(gamma))
    kappa = kappa_choice(gamma)
    return CgLpDesign(2, gamma, omega_r, problem.wf, kappa,
                      beta_choice(kappa), zeta)


def phase_at(design, omega_c):
    """First-harmonic phase of the CgLp chain at `omega_c` rad/s, degrees."""
    return math.degrees(np.angle(chain_harmonic(make_cglp(design), omega_c)))


def _phase_or_nan(problem, gamma, omega_r, zeta):
    try:
        return phase_at(_design(problem, gamma, omega_r, zeta), problem.wc)
    except ResetDFError:
        return math.nan


def _check_feasible(problem, gamma, zeta):
    phi = problem.phi_target
    if problem.order == 1:
        if phi >= FORE_LEAD_LIMIT_DEG:
            raise InfeasibleError(
                f"gamma={gamma:g}: {phi} deg exceeds the first-order limit "
                f"{FORE_LEAD_LIMIT_DEG:.2f} deg", gamma=gamma,
                max_lead=FORE_LEAD_LIMIT_DEG)
        g_max = gamma_max(phi)
        if gamma > g_max:
            lead = math.degrees(math.atan(
                4 / math.pi * (1 - gamma) / (1 + gamma)))
            raise InfeasibleError(
                f"gamma={gamma:g} exceeds gamma_max={g_max:.4f}; asymptotic "
                f"lead is {lead:.2f} deg", gamma=gamma, max_lead=lead)
    else:
        lead = _phase_or_nan(problem, gamma, problem.wc / SORE_PROBE_RATIO,
                             zeta)
        if not lead >= phi:
            raise InfeasibleError(
                f"gamma={gamma:g}: lead at omega_r = omega_c/"
                f"{SORE_PROBE_RATIO:g} is only {lead:.2f} deg", gamma=gamma,
                max_lead=lead)


def find_omega_r(gamma, problem, zeta=None):
    """Largest omega_r (rad/s) putting the CgLp phase at the target.

    The phase at crossover is scanned on a dense log grid from
    ``omega_c`` downward; the first (highest) sign change of
    ``phase - phi_target`` is refined by bisection to 1e-4 relative.
    The dense scan makes the result independent of whether the phase is
    monotone in omega_r.

    Raises
    ------
    InfeasibleError
        If no omega_r in ``[omega_c/1000, omega_c]`` reaches the target.
    """
    zeta = problem.zeta if zeta is None else zeta
    if problem.order == 2 and zeta is None:
        zeta = 1.0
    _check_feasible(problem, gamma, zeta)
    wc = problem.wc
    n = int(math.log10(SCAN_SPAN) * SCAN_DENSITY) + 1
    grid = wc * np.logspace(0, -math.log10(SCAN_SPAN), n)
    phi = problem.phi_target

    def excess(wr):
        return _phase_or_nan(problem, gamma, wr, zeta) - phi

    prev_w, prev_v = grid[0], excess(grid[0])
    if prev_v >= 0:
        raise ParameterError(
            f"gamma={gamma:g}: lead at omega_r = omega_c already exceeds "
            f"{phi} deg; lower omega_r is not needed")
    best_lead = prev_v
    for w in grid[1:]:
        v = excess(w)
        if math.isfinite(v):
            best_lead = max(best_lead, v) if math.isfinite(best_lead) else v
        if math.isfinite(v) and math.isfinite(prev_v) and v >= 0 > prev_v:
            return optimize.bisect(excess, w, prev_w, rtol=1e-4,
                                   xtol=1e-12 * wc)
        prev_w, prev_v = w, v
    raise InfeasibleError(
        f"gamma={gamma:g}: largest lead found is {best_lead + phi:.2f} deg "
        f"< {phi} deg", gamma=gamma, max_lead=best_lead + phi)


def zeta_flatness_search(design, candidates=DEFAULT_ZETAS, points=60):
    """Lead damping that keeps the CgLp gain closest to unity.

    Minimizes ``max |20 log10 |G_1(w)||`` over ``[omega_r/10, omega_f/2]``
    (`points` log-spaced samples per decade).  Ties go to the first
    candidate.
    """
    candidates = tuple(candidates)
    if not candidates:
        raise ParameterError("candidate list is empty")
    if design.order != 2:
        raise ParameterError("zeta only applies to second-order designs")
    lo, hi = design.omega_r / 10, design.omega_f / 2
    num = max(2, int(math.ceil(math.log10(hi / lo) * points)) + 1)
    grid = np.geomspace(lo, hi, num)
    best, best_cost = None, math.inf
    for z in candidates:
        chain = make_cglp(replace(design, zeta=float(z)))
        cost = 0.0
        for w in grid:
            try:
                cost = max(cost, abs(20 * math.log10(
                    abs(chain_harmonic(chain, w)))))
            except ResetDFError:
                continue
        if cost < best_cost:
            best, best_cost = float(z), cost
    return best


def _tune_one(problem, gamma):
    zeta = problem.zeta
    if problem.order == 2 and zeta is None:
        # Alternate omega_r and zeta until zeta settles.
        zeta = 1.0
        for _ in range(6):
            wr = find_omega_r(gamma, problem, zeta)
            z_new = zeta_flatness_search(
                _design(problem, gamma, wr, zeta), problem.zeta_candidates)
            if z_new == zeta:
                break
            zeta = z_new
    wr = find_omega_r(gamma, problem, zeta)
    design = _design(problem, gamma, wr, zeta)
    phase = phase_at(design, problem.wc)
    if abs(phase - problem.phi_target) > problem.phase_tol:
        raise InfeasibleError(
            f"gamma={gamma:g}: bisection ended {phase:.3f} deg away from the "
            f"target", gamma=gamma)
    return CandidateResult(gamma, wr, problem.wc / wr, design.gain_corr,
                           design.beta, design.zeta, phase, sigma(design),
                           design)


def enumerate_candidates(problem, gammas=None):
    """Tune every candidate gamma and sort the feasible rows by sigma.

    Returns
    -------
    TuningTable
        Rejected gammas map to the reason.

    Raises
    ------
    InfeasibleError
        If no candidate is feasible.
    """
    gammas = problem.gamma_candidates if gammas is None else tuple(gammas)
    rows, rejected = [], {}
    for g in gammas:
        try:
            rows.append(_tune_one(problem, g))
        except (InfeasibleError, ParameterError) as exc:
            rejected[g] = str(exc)
    if not rows:
        raise InfeasibleError(
            "no feasible gamma: " + "; ".join(rejected.values()),
            rejected=rejected)
    rows.sort(key=lambda r: (r.sigma, -r.gamma))
    return TuningTable(tuple(rows), rejected)


def refine(problem, previous, rounds=None, points=5):
    """Re-grid gamma around the current best and re-tune.

    Each round spans ``best +/- delta`` with `points` values, where delta
    is half the spacing to the nearest tried neighbour.  Stops after
    `rounds` rounds (default ``problem.rounds``) or when the best sigma
    improves by less than 1 %.  Rows from all rounds are pooled, so the
    best sigma never increases.
    """
    rounds = problem.rounds if rounds is None else rounds
    table = previous
    tried = sorted(set(problem.gamma_candidates)
                   | {r.gamma for r in previous.candidates})
    for _ in range(rounds):
        g0 = table.best.gamma
        gaps = [abs(g - g0) for g in tried if g != g0]
        delta = 0.5 * min(gaps) if gaps else 0.05
        lo, hi = max(g0 - delta, -1 + 1e-6), min(g0 + delta, 1.0)
        if problem.order == 1 and problem.phi_target < FORE_LEAD_LIMIT_DEG:
            hi = min(hi, gamma_max(problem.phi_target))
        new = [float(g) for g in np.round(np.linspace(lo, hi, points), 12)
               if all(abs(g - t) > 1e-12 for t in tried)]
        if not new:
            break
        tried = sorted(set(tried) | set(new))
        try:
            fresh = enumerate_candidates(problem, new)
        except InfeasibleError:
            break
        rows = sorted(table.candidates + fresh.candidates,
                      key=lambda r: (r.sigma, -r.gamma))
        old_best = table.best.sigma
        table = TuningTable(tuple(rows), {**table.rejected, **fresh.rejected})
        if old_best - table.best.sigma < 0.01 * old_best:
            break
    return table


def tune(problem):
    """Enumerate and then refine for ``problem.rounds`` rounds."""
    return refine(problem, enumerate_candidates(problem))


def normalize_loop_gain(chain, omega_c):
    """Gain that makes the first-harmonic open loop unity at `omega_c` rad/s."""
    mag = abs(chain_harmonic(as_chain(chain), omega_c))
    if not mag > 0 or not math.isfinite(mag):
        raise ParameterError(
            f"open loop response at {omega_c:.6g} rad/s is {mag}; cannot "
            f"normalize")
    return 1.0 / mag
