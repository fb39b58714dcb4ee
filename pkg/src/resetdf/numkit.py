"""Small dense linear algebra and single-bin harmonic extraction.

Matrices here are at most a few states wide, so everything is done with
plain Gaussian elimination and a Pade scaling-and-squaring exponential
instead of pulling in a decomposition library.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ParameterError, SingularMatrixError

__all__ = ['Signal', 'as_matrix', 'mat_exp', 'mat_inv', 'mat_solve',
           'single_bin_dft', 'RCOND_LIMIT']

#: Reciprocal 1-norm condition number below which a matrix is singular.
RCOND_LIMIT = 1e-12

# Pade [6/6] numerator coefficients; the denominator uses alternating signs.
_PADE6 = (1.0, 1 / 2, 5 / 44, 1 / 66, 1 / 792, 1 / 15840, 1 / 665280)


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real signal starting at t = 0.

    Attributes
    ----------
    dt : float
        Sample spacing in seconds.
    samples : ndarray
        Sample values, ``samples[k]`` taken at ``t0 + k * dt``.
    t0 : float
        Time stamp of the first sample (default 0).
    """
    dt: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        samples = np.asarray(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def time(self):
        return self.t0 + self.dt * np.arange(len(self.samples))


def as_matrix(M, square=False):
    """Return `M` as a finite 2-D complex or real array, with checks."""
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ParameterError("matrix has non-finite entries")
    if not np.iscomplexobj(M):
        M = M.astype(float)
    return M


def _gauss_jordan(M, rhs, omega=None):
    """Solve M X = rhs by elimination with partial pivoting."""
    n = M.shape[0]
    dtype = np.result_type(M, rhs, float)
    a = np.array(M, dtype=dtype)
    x = np.array(rhs, dtype=dtype)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0:
            raise SingularMatrixError("matrix is exactly singular", omega)
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        piv = a[k, k]
        a[k] /= piv
        x[k] /= piv
        for i in range(n):
            if i != k and a[i, k] != 0:
                f = a[i, k]
                a[i] -= f * a[k]
                x[i] -= f * x[k]
    return x


def mat_inv(M, omega=None):
    """Invert a small square matrix.

    Raises `SingularMatrixError` when the reciprocal 1-norm condition
    number falls below `RCOND_LIMIT`.  `omega` only decorates the error
    message.
    """
    M = as_matrix(M, square=True)
    n = M.shape[0]
    inv = _gauss_jordan(M, np.eye(n), omega)
    norm = np.abs(M).sum(axis=0).max()
    inv_norm = np.abs(inv).sum(axis=0).max()
    if norm == 0 or not np.isfinite(inv_norm) or \
            1.0 / (norm * inv_norm) < RCOND_LIMIT:
        raise SingularMatrixError("matrix is numerically singular", omega)
    return inv


def mat_solve(M, b, omega=None):
    """Return ``M^{-1} b`` with the same singularity rules as `mat_inv`."""
    return mat_inv(M, omega) @ np.asarray(b)


def mat_exp(M):
    """Matrix exponential by scaling and squaring with a [6/6] Pade core.

    Parameters
    ----------
    M : array_like
        Square real or complex matrix with finite entries.

    Returns
    -------
    ndarray
        ``exp(M)``, same dtype family as `M`.
    """
    M = as_matrix(M, square=True)
    n = M.shape[0]
    norm = np.abs(M).sum(axis=0).max()
    s = 0
    if norm > 0.5:
        s = int(math.ceil(math.log2(norm / 0.5)))
    X = M / 2.0**s
    ident = np.eye(n, dtype=X.dtype)
    P = np.zeros_like(X)
    Q = np.zeros_like(X)
    power = ident
    for k, c in enumerate(_PADE6):
        if k:
            power = power @ X
        P = P + c * power
        Q = Q + (-1) ** k * c * power
    E = _gauss_jordan(Q, P)
    for _ in range(s):
        E = E @ E
    return E


def single_bin_dft(s, f, skip=0.0):
    """Complex amplitude of the tone at `f` Hz in a sampled signal.

    The first `skip` seconds are discarded and the remainder is truncated
    to the largest whole number of periods.  The returned coefficient `c`
    follows the sine convention: the component equals
    ``abs(c) * sin(2*pi*f*t + angle(c))`` with `t` the absolute sample time.

    Parameters
    ----------
    s : Signal
        Sampled signal.
    f : float
        Tone frequency in Hz.
    skip : float, optional
        Leading seconds to ignore (transient).

    Returns
    -------
    complex
    """
    if not f > 0:
        raise ParameterError(f"frequency must be positive, got {f}")
    start = int(math.ceil(skip / s.dt - 1e-9))
    x = s.samples[start:]
    per_period = 1.0 / (f * s.dt)
    periods = int(math.floor(len(x) / per_period + 1e-9))
    if periods < 1 or len(x) < 2:
        raise ParameterError("analysis window is shorter than one period")
    n = int(round(periods * per_period))
    x = x[:n]
    t = s.t0 + s.dt * (start + np.arange(n))
    return 2j * np.dot(x, np.exp(-2j * np.pi * f * t)) / n
