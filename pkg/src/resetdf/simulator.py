"""Time-domain simulation of reset systems.

Flow dynamics are integrated with fixed-step RK4.  When the reset trigger
changes sign inside a step the crossing instant is refined by bisection,
the state jumps ``x <- A_rho x`` there and integration resumes from the
crossing.  A sample that falls exactly on a crossing may hold either the
pre- or the post-jump state.  Besides open-loop runs used as an oracle for the analytic
HOSIDF, the module runs unity-feedback tracking experiments and computes
the describing-function prediction of the RMS tracking error.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .reset_elements import LinearElement, ResetController
from .errors import DivergenceError, ParameterError
from .hosidf import as_chain, sensitivity_df
from .numkit import Signal, single_bin_dft

__all__ = ['Sinusoid', 'SimConfig', 'SimResult', 'simulate_element',
           'simulate_closed_loop', 'extract_harmonics', 'make_plant',
           'expected_rms_error', 'deviation_ratio', 'OVERFLOW_GUARD',
           'ZERO_BAND']

OVERFLOW_GUARD = 1e12
#: Trigger values below this magnitude count as sitting on the surface.
ZERO_BAND = 1e-15


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2 pi frequency t + phase)``; frequency in Hz."""
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t
                                       + self.phase)


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step simulation settings.

    Attributes
    ----------
    dt : float
        Integration step in seconds; at most 1/(200 ref_frequency).
    duration : float
        Simulated time in seconds; must cover `settle_periods` plus at
        least four analysis periods of the reference.
    settle_periods : int
        Reference periods discarded before analysis.
    ref_amplitude, ref_frequency, ref_phase : float
        Reference (or input) sinusoid; frequency in Hz, phase in rad.
    quantizer_step : float or None
        Resolution of the measured output in closed loop; None disables.
    """
    dt: float
    duration: float
    settle_periods: int = 2
    ref_amplitude: float = 1.0
    ref_frequency: float = 1.0
    ref_phase: float = 0.0
    quantizer_step: float = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if not self.ref_frequency > 0:
            raise ParameterError("reference frequency must be positive")
        if self.settle_periods < 0:
            raise ParameterError("settle_periods must be >= 0")
        if self.dt > 1 / (200 * self.ref_frequency) * (1 + 1e-9):
            raise ParameterError(
                f"dt={self.dt:g} s exceeds 1/(200 f_ref) = "
                f"{1 / (200 * self.ref_frequency):g} s")
        period = 1 / self.ref_frequency
        if self.duration < (self.settle_periods + 4) * period * (1 - 1e-9):
            raise ParameterError(
                "duration must cover settle_periods + 4 analysis periods")
        if self.quantizer_step is not None and not self.quantizer_step > 0:
            raise ParameterError("quantizer_step must be positive or None")

    @property
    def reference(self):
        return Sinusoid(self.ref_amplitude, self.ref_frequency, self.ref_phase)

    @property
    def settle_time(self):
        return self.settle_periods / self.ref_frequency

    @classmethod
    def for_frequency(cls, frequency, samples_per_period=2000,
                      settle_periods=2, analysis_periods=4, **kw):
        """Config whose step divides the reference period exactly."""
        dt = 1 / (frequency * samples_per_period)
        duration = (settle_periods + analysis_periods) / frequency
        return cls(dt=dt, duration=duration, settle_periods=settle_periods,
                   ref_frequency=frequency, **kw)


@dataclass(frozen=True)
class SimResult:
    """Sampled trajectories of one simulation run.

    For open-loop element runs `reference` and `error` both hold the
    element input and `control` and `output` its output.
    """
    time: np.ndarray
    reference: np.ndarray
    error: np.ndarray
    control: np.ndarray
    output: np.ndarray
    reset_times: np.ndarray
    rms_error: float
    config: SimConfig
    harmonics: dict = field(default_factory=dict)

    @property
    def dt(self):
        return self.config.dt

    @property
    def analysis_mask(self):
        cfg = self.config
        t0 = cfg.settle_time
        period = 1 / cfg.ref_frequency
        periods = math.floor((self.time[-1] - t0) / period + 1e-9)
        t1 = t0 + periods * period
        eps = 1e-9 * cfg.dt
        return (self.time >= t0 - eps) & (self.time < t1 - eps)


def _rk4_maps(A, B, h):
    """Linear maps of one RK4 step of ``x' = A x + B w``.

    Returns ``(Phi, P0, Ph, P1)`` with
    ``x+ = Phi x + P0 w(t) + Ph w(t + h/2) + P1 w(t + h)``.
    """
    n = A.shape[0]
    hA = h * A
    ident = np.eye(n)
    A2 = hA @ hA
    A3 = A2 @ hA
    Phi = ident + hA + A2 / 2 + A3 / 6 + A3 @ hA / 24
    hB = h * B
    P0 = (hB / 6 + hA @ hB / 6 + A2 @ hB / 12 + A3 @ hB / 24)
    Ph = (2 * hB / 3 + hA @ hB / 3 + A2 @ hB / 12)
    P1 = hB / 6
    return Phi, P0, Ph, P1


@dataclass(frozen=True)
class _HybridSystem:
    """Linear flow with input vector w, resets on a scalar trigger."""
    A: np.ndarray
    B: np.ndarray
    trig_c: np.ndarray
    trig_d: np.ndarray
    J: np.ndarray


def _series(elements):
    """Stack a series chain into one state space ``(A, B, C, D, offsets)``.

    `offsets[i]` is the first state index of element `i`.  Also returns
    the row vectors (c, d) giving each element's input in terms of the
    stacked state and the chain input.
    """
    blocks = []
    for el in elements:
        if isinstance(el, ResetController):
            blocks.append((el.A, el.B, el.C, el.D))
        else:
            A, B, C, D = el.state_space()
            blocks.append((np.asarray(A, float), np.asarray(B, float),
                           np.asarray(C, float), D))
    n = sum(b[0].shape[0] for b in blocks)
    A = np.zeros((n, n))
    B = np.zeros((n, 1))
    c = np.zeros((1, n))      # current signal = c z + d * input
    d = 1.0
    inputs = []
    offsets = []
    i = 0
    for Ai, Bi, Ci, Di in blocks:
        k = Ai.shape[0]
        offsets.append(i)
        inputs.append((c.copy(), d))
        A[i:i + k, i:i + k] = Ai
        A[i:i + k, :] += Bi @ c
        B[i:i + k, :] += Bi * d
        c_new = Di * c
        c_new[:, i:i + k] += Ci
        c, d = c_new, Di * d
        i += k
    return A, B, c, d, offsets, inputs


def _jump_matrix(elements, offsets, n):
    J = np.eye(n)
    for el, i in zip(elements, offsets):
        if isinstance(el, ResetController):
            J[i:i + el.n, i:i + el.n] = el.A_rho
    return J


def _sign(v):
    return 0 if abs(v) < ZERO_BAND else (1 if v > 0 else -1)


def _integrate(sys, w_fn, dt, n_steps, held_fn=None):
    """Run the hybrid system from rest on the grid ``k * dt``.

    `w_fn(t)` returns the exogenous input(s) as an array of shape
    (len(t), m_w).  `held_fn(z)`, when given, returns inputs that are
    sampled from the state at the start of each step and held over it;
    they occupy the trailing columns of `B`.
    """
    n = sys.A.shape[0]
    t = dt * np.arange(n_steps + 1)
    w_grid = np.atleast_2d(w_fn(t).T).T
    w_half = np.atleast_2d(w_fn(t[:-1] + dt / 2).T).T
    m_w = w_grid.shape[1]
    B_w, B_h = sys.B[:, :m_w], sys.B[:, m_w:]
    Phi, P0, Ph, P1 = _rk4_maps(sys.A, B_w, dt)
    held_maps = _rk4_maps(sys.A, B_h, dt)[1:] if held_fn else None
    Hsum = sum(held_maps) if held_fn else None
    c = sys.trig_c.ravel()
    d = sys.trig_d.ravel()

    # Forcing from the exogenous input and trigger offsets, all steps at once.
    F = w_grid[:-1] @ P0.T + w_half @ Ph.T + w_grid[1:] @ P1.T
    trig_w = w_grid @ d

    Z = np.empty((n_steps + 1, n))
    held_log = np.zeros((n_steps + 1, B_h.shape[1]))
    z = np.zeros(n)
    Z[0] = z
    resets = []
    last = _sign(c @ z + trig_w[0])

    def substep(z0, t0, tau, held):
        Phi_s, Q0, Qh, Q1 = _rk4_maps(sys.A, B_w, tau)
        w3 = np.atleast_2d(w_fn(np.array([t0, t0 + tau / 2, t0 + tau])).T).T
        z1 = Phi_s @ z0 + Q0 @ w3[0] + Qh @ w3[1] + Q1 @ w3[2]
        if held_fn:
            H0, Hh, H1 = _rk4_maps(sys.A, B_h, tau)[1:]
            z1 = z1 + (H0 + Hh + H1) @ held
        return z1

    def trigger(z1, t1):
        return c @ z1 + d @ np.atleast_2d(w_fn(np.array([t1])).T).T[0]

    held = None
    for k in range(n_steps):
        z_next = Phi @ z + F[k]
        if held_fn:
            held = held_fn(z)
            held_log[k] = held
            z_next += Hsum @ held
        s_next = _sign(c @ z_next + trig_w[k + 1])
        if last != 0 and s_next == -last:
            lo, hi = 0.0, dt
            tol = dt * 1e-6
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if _sign(trigger(substep(z, t[k], mid, held), t[k] + mid)) \
                        == last:
                    lo = mid
                else:
                    hi = mid
            tau = 0.5 * (lo + hi)
            z_star = sys.J @ substep(z, t[k], tau, held)
            resets.append(t[k] + tau)
            z_next = substep(z_star, t[k] + tau, dt - tau, held)
            s_next = _sign(trigger(z_next, t[k + 1]))
        elif last != 0 and s_next == 0:
            z_next = sys.J @ z_next
            resets.append(t[k + 1])
        last = s_next
        z = z_next
        Z[k + 1] = z
        if k % 64 == 63 or k == n_steps - 1:
            if not np.abs(Z[k - 63 if k >= 63 else 0:k + 2]).max() < OVERFLOW_GUARD:
                bad = int(np.argmax(~(np.abs(Z[:k + 2]) < OVERFLOW_GUARD).all(axis=1)))
                raise DivergenceError(
                    f"state norm exceeded {OVERFLOW_GUARD:g} at "
                    f"t={t[bad]:.6g} s", last_stable_time=float(t[bad - 1]))
    if held_fn:
        held_log[n_steps] = held_fn(z)
    return t, Z, w_grid, held_log, np.array(resets)


def _check_stability(A, allow_unstable):
    if A.size and not allow_unstable:
        re = np.linalg.eigvals(A).real
        if np.any(re > 1e-9 * max(1.0, np.abs(A).max())):
            raise ParameterError(
                "base-linear dynamics are unstable; pass allow_unstable=True")


def _rms(x, mask):
    return float(np.sqrt(np.mean(x[mask] ** 2))) if mask.any() else 0.0


def simulate_element(element, cfg, input_fn=None, allow_unstable=False):
    """Drive a reset element (or open-loop chain) with a sinusoid.

    Parameters
    ----------
    element : ResetController, LinearElement or SeriesChain
    cfg : SimConfig
        The input is ``cfg.reference`` unless `input_fn` is given.
    input_fn : callable, optional
        Vectorized ``e(t)``.
    allow_unstable : bool
        Skip the base-linear stability check.

    Returns
    -------
    SimResult
    """
    chain = as_chain(element)
    A, B, C, D, offsets, inputs = _series(chain.elements)
    _check_stability(A, allow_unstable)
    idx = chain.reset_index
    if idx is None:
        trig_c, trig_d = np.zeros((1, A.shape[0])), np.zeros(1)
    else:
        trig_c, trig_d = inputs[idx][0], np.array([inputs[idx][1]])
    J = _jump_matrix(chain.elements, offsets, A.shape[0])
    sys = _HybridSystem(A, B, trig_c, trig_d, J)
    e_fn = input_fn or cfg.reference
    n_steps = int(round(cfg.duration / cfg.dt))
    t, Z, w, _, resets = _integrate(sys, lambda tt: e_fn(tt)[:, None],
                                    cfg.dt, n_steps)
    e = w[:, 0]
    u = Z @ C.ravel() + D * e
    result = SimResult(t, e, e, u, u, resets, 0.0, cfg)
    return _with_rms(result, e)


def _with_rms(result, err):
    rms = _rms(err, result.analysis_mask)
    return SimResult(result.time, result.reference, result.error,
                     result.control, result.output, result.reset_times, rms,
                     result.config, result.harmonics)


def extract_harmonics(result, base_f=None, orders=(1, 3, 5), signal='control'):
    """Harmonic coefficients normalized to the driving sinusoid.

    Each returned value is directly comparable to ``G_n(2 pi base_f)``:
    the single-bin coefficient at ``n * base_f`` divided by
    ``amplitude * exp(j n phase)`` of the reference.

    Returns
    -------
    dict
        ``{n: complex}``.
    """
    cfg = result.config
    f = cfg.ref_frequency if base_f is None else base_f
    x = getattr(result, signal)
    sig = Signal(cfg.dt, x)
    period = 1 / f
    if result.time[-1] - cfg.settle_time < period * (1 - 1e-9):
        raise ParameterError("analysis window shorter than one period")
    amp, ph = cfg.ref_amplitude, cfg.ref_phase
    if amp == 0:
        raise ParameterError("cannot normalize by a zero-amplitude input")
    out = {}
    for n in orders:
        c = single_bin_dft(sig, n * f, skip=cfg.settle_time)
        out[n] = c / (amp * np.exp(1j * n * ph))
    return out


def make_plant():
    """Identified positioning-stage plant ``9602.5 / (s^2 + 4.2676 s + 7627.3)``."""
    return LinearElement([9602.5], [1.0, 4.2676, 7627.3], 'stage')


def _closed_loop_system(chain, plant, quantized):
    """Unity-feedback loop ``e = r - y`` around ``chain`` then ``plant``."""
    elements = chain.elements + (plant,)
    A_ol, B_ol, C_ol, D_ol, offsets, inputs = _series(elements)
    if abs(D_ol) > 0:
        raise ParameterError("loop is ill-posed: plant must be strictly proper")
    n = A_ol.shape[0]
    idx = chain.reset_index
    J = _jump_matrix(elements, offsets, n)
    # y = C_ol z; controller input e = r - y (or r - Q(y) when quantized).
    if quantized:
        A = A_ol
        B = np.hstack([B_ol, -B_ol])          # inputs: r, held Q(y)
    else:
        A = A_ol - B_ol @ C_ol
        B = B_ol
    # Reset trigger: the reset element's input with the continuous error.
    c_in, d_in = inputs[idx]
    trig_c = c_in - d_in * C_ol
    trig_d = np.array([d_in])
    # Plant input u = c_u z + d_u e.
    c_u, d_u = inputs[len(chain.elements)]
    return _HybridSystem(A, B, trig_c, trig_d, J), C_ol, (c_u, d_u)


def simulate_closed_loop(chain, plant, cfg, allow_unstable=False):
    """Unity-feedback tracking of ``cfg.reference``.

    The reset element resets on zero crossings of its own (continuous)
    input.  With ``cfg.quantizer_step`` set, the controller sees
    ``r - Q(y)`` where ``Q`` rounds to the encoder resolution, sampled
    once per integration step; resets still use the continuous error.

    Returns
    -------
    SimResult
        `rms_error` is the RMS of ``r - y`` over the analysis window.

    Raises
    ------
    DivergenceError
        If the state leaves the overflow guard (empirically unstable).
    """
    chain = as_chain(chain)
    if chain.reset_index is None:
        raise ParameterError("controller chain must contain a reset element")
    if not plant.is_strictly_proper:
        raise ParameterError("plant must be strictly proper")
    q = cfg.quantizer_step
    sys, C_y, (c_u, d_u) = _closed_loop_system(chain, plant, q is not None)
    del allow_unstable  # closed-loop stability is judged by the run itself
    r_fn = cfg.reference
    n_steps = int(round(cfg.duration / cfg.dt))
    held_fn = None
    if q is not None:
        c_y = C_y.ravel()
        held_fn = lambda z: np.array([q * np.round((c_y @ z) / q)])
    t, Z, w, held, resets = _integrate(sys, lambda tt: r_fn(tt)[:, None],
                                       cfg.dt, n_steps, held_fn)
    r = w[:, 0]
    y = Z @ C_y.ravel()
    e = r - y
    e_ctrl = r - held[:, 0] if q is not None else e
    u = Z @ c_u.ravel() + d_u * e_ctrl
    result = SimResult(t, r, e, u, y, resets, 0.0, cfg)
    return _with_rms(result, e)


def expected_rms_error(chain, plant, ref_amp, ref_f):
    """Describing-function prediction ``|S(j w)| * ref_amp / sqrt(2)``."""
    open_loop = as_chain(chain).then(plant)
    S = sensitivity_df(open_loop, 2 * math.pi * ref_f)
    return abs(S) * ref_amp / math.sqrt(2)


def deviation_ratio(measured_rms, expected_rms):
    """Measured over expected RMS error; 1 means a perfect prediction.

    Returns ``inf`` when nothing was expected but an error was measured.
    """
    if measured_rms < 0 or expected_rms < 0:
        raise ParameterError("RMS values must be non-negative")
    if expected_rms == 0:
        return 1.0 if measured_rms == 0 else math.inf
    return measured_rms / expected_rms
