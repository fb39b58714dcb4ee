"""Reference designs for the precision-stage tracking experiments.

Five CgLp-FORE rows tuned for 40 deg and four CgLp-SORE rows tuned for
60 deg of lead at a 100 Hz crossover, together with the shared PI +
low-pass part and the identified plant.  Each row is turned into a full
open loop whose gain is normalized so that the first-harmonic loop gain is
one at crossover.
"""

from dataclasses import dataclass
import math

from .approx import design_cglp
from .reset_elements import SeriesChain, make_cglp, make_pid
from .errors import ParameterError
from .simulator import make_plant
from .tuner import TuningProblem, normalize_loop_gain

__all__ = ['StageRow', 'FORE_ROWS', 'SORE_ROWS', 'ROWS', 'CROSSOVER_HZ',
           'PID_OMEGA_I_HZ', 'PID_OMEGA_F_HZ', 'LEAD_OMEGA_F_HZ', 'row',
           'row_design', 'stage_controller', 'fore_problem', 'sore_problem']

CROSSOVER_HZ = 100.0
PID_OMEGA_I_HZ = 10.0
PID_OMEGA_F_HZ = 500.0
#: Lead-filter pole of the CgLp; far above crossover so its lag stays small.
LEAD_OMEGA_F_HZ = 1e4
SORE_ZETA = 1.0


@dataclass(frozen=True)
class StageRow:
    """Published configuration with its recorded hardware deviations."""
    name: str
    order: int
    gamma: float
    a: float
    sigma: float
    deviation_1hz: float
    deviation_5hz: float


FORE_ROWS = (
    StageRow('f1', 1, 0.17, 7.0, 2.33e-04, 6.4721, 5.5437),
    StageRow('f2', 1, 0.0, 4.3, 1.23e-04, 5.0038, 4.1356),
    StageRow('f3', 1, -0.1, 3.0, 8.58e-05, 4.5575, 3.5781),
    StageRow('f4', 1, -0.2, 2.4, 8.14e-05, 4.5292, 3.4315),
    StageRow('f5', 1, -0.3, 2.0, 8.68e-05, 4.568, 3.405),
)
SORE_ROWS = (
    StageRow('s1', 2, 0.28, 14.0, 2.88e-04, 16.832, 15.0511),
    StageRow('s2', 2, 0.2, 2.43, 1.02e-05, 8.0738, 7.0878),
    StageRow('s3', 2, 0.1, 1.66, 6.88e-06, 4.6328, 3.8989),
    StageRow('s4', 2, 0.0, 1.37, 7.70e-06, 5.061, 5.432),
)
ROWS = {r.name: r for r in FORE_ROWS + SORE_ROWS}


def row(name):
    try:
        return ROWS[name]
    except KeyError:
        raise ParameterError(
            f"unknown design {name!r}; choose from {sorted(ROWS)}") from None


def row_design(name, lead_omega_f_hz=LEAD_OMEGA_F_HZ, zeta=SORE_ZETA):
    """`CgLpDesign` of a named row, ``omega_r = omega_c / a`` in rad/s."""
    r = row(name)
    wr = 2 * math.pi * CROSSOVER_HZ / r.a
    return design_cglp(r.order, r.gamma, wr, 2 * math.pi * lead_omega_f_hz,
                       zeta)


def stage_controller(design, plant=None):
    """CgLp followed by the PI + low-pass part, scaled for unity crossover.

    Returns
    -------
    chain : SeriesChain
        Controller only (plant not included).
    kp : float
        Proportional gain that was applied.
    """
    plant = make_plant() if plant is None else plant
    wc = 2 * math.pi * CROSSOVER_HZ
    pid = make_pid(1.0, 2 * math.pi * PID_OMEGA_I_HZ,
                   2 * math.pi * PID_OMEGA_F_HZ)
    cglp = make_cglp(design)
    kp = normalize_loop_gain(cglp.then(pid, plant), wc)
    return SeriesChain(cglp.elements + (pid.scaled(kp),)), kp


def fore_problem(**kw):
    """First-order tuning problem behind the FORE rows."""
    kw.setdefault('omega_f', LEAD_OMEGA_F_HZ)
    return TuningProblem(1, 40.0, CROSSOVER_HZ,
                         tuple(r.gamma for r in FORE_ROWS), **kw)


def sore_problem(**kw):
    """Second-order tuning problem behind the SORE rows (zeta fixed at 1)."""
    kw.setdefault('omega_f', LEAD_OMEGA_F_HZ)
    kw.setdefault('zeta', SORE_ZETA)
    return TuningProblem(2, 60.0, CROSSOVER_HZ,
                         tuple(r.gamma for r in SORE_ROWS), **kw)
