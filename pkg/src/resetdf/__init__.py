"""Describing functions, tuning and simulation of reset controllers.

Submodules
----------
numkit
    Small dense linear algebra and single-bin harmonic extraction.
reset_elements
    Reset controllers, linear elements, CgLp composition.
hosidf
    Exact describing functions and higher-order harmonics.
approx
    Parameter laws and low/high-frequency closed forms.
tuner
    Phase-lead CgLp tuning ranked by the harmonic proxy sigma.
simulator
    Hybrid time-domain simulation, open and closed loop.
stage
    Reference designs for the precision-stage experiments.
validation
    Analytic versus simulated harmonics.
cli
    Batch command-line front end.
"""

__version__ = '0.1.0'

from .errors import (ConfigError, DFUndefinedError, DivergenceError,
                     InfeasibleError, MarginalPointError, ParameterError,
                     ResetDFError, SingularMatrixError,
                     UnsupportedTopologyError)
from .reset_elements import (CgLpDesign, LinearElement, ResetController,
                             SeriesChain, make_cglp, make_clegg, make_gfore,
                             make_gsore, make_lead, make_pid)
from .hosidf import (HarmonicResponse, chain_harmonic, describing_function,
                     kernels, sensitivity_df, sweep)
from .approx import (alpha_choice, approx_eval, beta_choice, factor_F,
                     gamma_max, kappa_choice, sigma)
from .tuner import (TuningProblem, enumerate_candidates, find_omega_r,
                    normalize_loop_gain, phase_at, refine, tune)
from .simulator import (SimConfig, deviation_ratio, expected_rms_error,
                        extract_harmonics, make_plant, simulate_closed_loop,
                        simulate_element)

__all__ = ['ConfigError', 'DFUndefinedError', 'DivergenceError',
           'InfeasibleError', 'MarginalPointError', 'ParameterError',
           'ResetDFError', 'SingularMatrixError', 'UnsupportedTopologyError',
           'CgLpDesign', 'LinearElement', 'ResetController', 'SeriesChain',
           'make_cglp', 'make_clegg', 'make_gfore', 'make_gsore', 'make_lead',
           'make_pid', 'HarmonicResponse', 'chain_harmonic',
           'describing_function', 'kernels', 'sensitivity_df', 'sweep',
           'alpha_choice', 'approx_eval', 'beta_choice', 'factor_F',
           'gamma_max', 'kappa_choice', 'sigma', 'TuningProblem',
           'enumerate_candidates', 'find_omega_r', 'normalize_loop_gain',
           'phase_at', 'refine', 'tune', 'SimConfig', 'deviation_ratio',
           'expected_rms_error', 'extract_harmonics', 'make_plant',
           'simulate_closed_loop', 'simulate_element']
