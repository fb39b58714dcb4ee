"""Batch command-line front end: analyze, tune, simulate, validate.

Each command reads an INI-style configuration (frequencies in Hz), writes
CSV/JSON results into ``--out`` and a ``manifest.json`` listing every
parameter actually used and every file written.

Exit codes: 0 success, 2 configuration error, 3 infeasible tuning,
4 validation failure, 5 simulation divergence.
"""

import argparse
import configparser
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .approx import alpha_choice, beta_choice, design_cglp, kappa_choice
from .errors import (ConfigError, DivergenceError, InfeasibleError,
                     ParameterError, ResetDFError)
from .hosidf import DEFAULT_ORDERS, as_chain, sweep
from .reset_elements import (SeriesChain, make_cglp, make_clegg, make_gfore,
                             make_gsore, make_pid)
from .simulator import (SimConfig, deviation_ratio, expected_rms_error,
                        make_plant, simulate_closed_loop)
from .stage import (CROSSOVER_HZ, LEAD_OMEGA_F_HZ, PID_OMEGA_F_HZ,
                    PID_OMEGA_I_HZ, row_design, stage_controller)
from .tuner import TuningProblem, normalize_loop_gain, tune
from . import validation

__all__ = ['main', 'cmd_analyze', 'cmd_tune', 'cmd_simulate', 'cmd_validate',
           'EXIT_OK', 'EXIT_CONFIG', 'EXIT_INFEASIBLE', 'EXIT_VALIDATION',
           'EXIT_DIVERGENCE']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VALIDATION = 4
EXIT_DIVERGENCE = 5

TWO_PI = 2 * math.pi


def fmt(x):
    """17 significant digits, scientific; non-finite values spelled out."""
    x = float(x)
    if math.isnan(x):
        return 'nan'
    if math.isinf(x):
        return '-inf' if x < 0 else 'inf'
    return format(x, '.16e')


_REQUIRED = object()
_ELEMENT_KEYS = ('kind', 'name', 'gamma', 'omega_r', 'alpha', 'kappa', 'beta',
                 'order', 'omega_f', 'zeta')


class _Section:
    """Typed access to one config section; unknown keys are an error."""

    def __init__(self, parser, name, allowed, required=True):
        self.name = name
        if parser is not None and parser.has_section(name):
            self._items = dict(parser.items(name))
        elif required:
            raise ConfigError(f"missing section [{name}]")
        else:
            self._items = {}
        extra = sorted(set(self._items) - set(allowed))
        if extra:
            raise ConfigError(
                f"[{name}] unknown key(s): {', '.join(extra)}; allowed: "
                f"{', '.join(allowed)}")
        self._used = set()
        self.resolved = {}

    def __contains__(self, key):
        return key in self._items

    def _raw(self, key, default):
        self._used.add(key)
        if key in self._items:
            return self._items[key]
        if default is _REQUIRED:
            raise ConfigError(f"[{self.name}] missing required key '{key}'")
        return default

    def get(self, key, default=None, kind=str):
        raw = self._raw(key, default)
        if raw is None or not isinstance(raw, str):
            value = raw
        else:
            try:
                value = kind(raw)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"[{self.name}] {key} = {raw!r} is not a valid "
                    f"{kind.__name__}") from None
        self.resolved[key] = value
        return value

    def floats(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None:
            self.resolved[key] = None
            return None
        if not isinstance(raw, str):
            value = tuple(float(v) for v in raw)
        else:
            try:
                value = tuple(float(v) for v in raw.replace(';', ',').split(',')
                              if v.strip())
            except ValueError:
                raise ConfigError(
                    f"[{self.name}] {key} = {raw!r} is not a list of numbers"
                ) from None
        self.resolved[key] = list(value)
        return value



def _bool(raw):
    low = str(raw).strip().lower()
    if low in ('1', 'yes', 'true', 'on'):
        return True
    if low in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError(raw)


_bool.__name__ = 'boolean'


def _read_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    if path is None:
        return parser
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding='utf-8') as fh:
            parser.read_file(fh, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return parser


def _parse_orders(text):
    try:
        orders = tuple(int(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise ConfigError(f"--orders {text!r}: expected integers") from None
    if not orders or any(n < 1 for n in orders):
        raise ConfigError(f"--orders {text!r}: need positive integers")
    return orders


def _parse_grid(text):
    parts = text.split(',')
    try:
        fmin, fmax, pts = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise ConfigError(
            f"--grid {text!r}: expected fmin,fmax,points") from None
    if len(parts) != 3 or not (fmax > fmin > 0) or pts < 2:
        raise ConfigError(f"--grid {text!r}: need 0 < fmin < fmax, points >= 2")
    return fmin, fmax, pts


class _Run:
    """Collects outputs and writes the manifest."""

    def __init__(self, command, out_dir, config_path):
        self.command = command
        self.out_dir = out_dir
        self.config_path = config_path
        self.params = {}
        self.outputs = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.out_dir, name)
        self.outputs.append(p)
        return p

    def write_csv(self, name, header, rows):
        with open(self.path(name), 'w', newline='', encoding='utf-8') as fh:
            w = csv.writer(fh, lineterminator='\n')
            w.writerow(header)
            w.writerows(rows)

    def write_json(self, name, payload):
        with open(self.path(name), 'w', encoding='utf-8') as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write('\n')

    def finish(self, status, extra=None):
        manifest = {
            'command': self.command,
            'parameters': self.params,
            'config': (os.path.abspath(self.config_path)
                       if self.config_path else None),
            'outputs': [os.path.abspath(p) for p in self.outputs],
            'version': __version__,
            'timestamp': datetime.datetime.now(
                datetime.timezone.utc).isoformat(timespec='seconds'),
            'exit_status': status,
        }
        if extra:
            manifest.update(extra)
        path = os.path.join(self.out_dir, 'manifest.json')
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write('\n')
        return status


# -- element construction ---------------------------------------------------

def _build_element(sec):
    """Element or chain described by an [element] section (Hz inputs)."""
    kind = sec.get('kind', _REQUIRED).strip().lower()
    if kind == 'clegg':
        return make_clegg()
    if kind == 'design':
        return make_cglp(row_design(sec.get('name', _REQUIRED).strip()))
    gamma = sec.get('gamma', _REQUIRED, float)
    wr = TWO_PI * sec.get('omega_r', _REQUIRED, float)
    if kind == 'gfore':
        alpha = sec.get('alpha', None, float)
        alpha = alpha_choice(gamma) if alpha is None else alpha
        sec.resolved['alpha'] = alpha
        return make_gfore(wr, gamma, alpha)
    if kind == 'gsore':
        kappa = sec.get('kappa', None, float)
        kappa = kappa_choice(gamma) if kappa is None else kappa
        beta = sec.get('beta', None, float)
        beta = beta_choice(kappa) if beta is None else beta
        sec.resolved.update(kappa=kappa, beta=beta)
        return make_gsore(wr, gamma, kappa, beta)
    if kind == 'cglp':
        order = sec.get('order', _REQUIRED, int)
        wf = TWO_PI * sec.get('omega_f', LEAD_OMEGA_F_HZ, float)
        zeta = sec.get('zeta', 1.0, float) if order == 2 else 1.0
        return make_cglp(design_cglp(order, gamma, wr, wf, zeta))
    raise ConfigError(
        f"[element] kind = {kind!r}; expected clegg, gfore, gsore, cglp or "
        f"design")


def _with_loop(element, parser):
    """Optionally append the stage PI + low-pass and the plant."""
    sec = _Section(parser, 'loop', ('pid', 'plant'), required=False)
    pid = sec.get('pid', 'no', _bool)
    plant = sec.get('plant', 'no', _bool)
    chain = as_chain(element)
    if not (pid or plant):
        return chain, sec.resolved
    tail = []
    if pid:
        tail.append(make_pid(1.0, TWO_PI * PID_OMEGA_I_HZ,
                             TWO_PI * PID_OMEGA_F_HZ))
    if plant:
        tail.append(make_plant())
    loop = chain.then(*tail)
    if pid:
        kp = normalize_loop_gain(loop, TWO_PI * CROSSOVER_HZ)
        loop = SeriesChain(tuple(el.scaled(kp) if el.name == 'PID' else el
                                 for el in loop.elements))
        sec.resolved['kp'] = kp
    return loop, sec.resolved


# -- commands ---------------------------------------------------------------

def cmd_analyze(config, out, orders=None, grid=None):
    """Sweep G_n over a frequency grid and write ``harmonics.csv``."""
    parser = _read_config(config)
    run = _Run('analyze', out, config)
    sec = _Section(parser, 'element', _ELEMENT_KEYS)
    element = _build_element(sec)
    chain, loop_params = _with_loop(element, parser)
    gsec = _Section(parser, 'grid',
                    ('fmin', 'fmax', 'points_per_decade', 'orders'),
                    required=False)
    if grid is not None:
        fmin, fmax, pts = grid
    else:
        fmin = gsec.get('fmin', 1.0, float)
        fmax = gsec.get('fmax', 1e4, float)
        per_dec = gsec.get('points_per_decade', 1000, int)
        if not fmax > fmin > 0:
            raise ConfigError("[grid] need 0 < fmin < fmax")
        pts = max(2, int(math.ceil(math.log10(fmax / fmin) * per_dec)) + 1)
    if orders is None:
        orders = tuple(int(n) for n in
                       (gsec.floats('orders') or DEFAULT_ORDERS))
    freqs = np.geomspace(fmin, fmax, pts)
    resp = sweep(chain, TWO_PI * freqs, orders)
    rows = []
    for i, f in enumerate(freqs):
        for k, n in enumerate(orders):
            g = resp.values[i, k]
            if (i, n) in resp.errors:
                rows.append([fmt(f), n, 'nan', 'nan'])
            elif g == 0:
                rows.append([fmt(f), n, '-inf', ''])
            else:
                rows.append([fmt(f), n, fmt(20 * math.log10(abs(g))),
                             fmt(math.degrees(np.angle(g)))])
    run.params = {'element': sec.resolved, 'loop': loop_params,
                  'grid': {'fmin_hz': fmin, 'fmax_hz': fmax, 'points': pts,
                           **gsec.resolved},
                  'orders': list(orders)}
    run.write_csv('harmonics.csv', ['freq_hz', 'order', 'mag_db',
                                    'phase_deg'], rows)
    errors = {f"{fmt(freqs[i])}:{n}": msg
              for (i, n), msg in sorted(resp.errors.items())}
    return run.finish(EXIT_OK, {'point_errors': errors})


def _tuning_problem(parser):
    sec = _Section(parser, 'tuning', ('order', 'phi', 'omega_c', 'omega_f',
                                      'gammas', 'rounds', 'phase_tol',
                                      'zeta'))
    gammas = sec.floats('gammas', _REQUIRED)
    if not gammas:
        raise ConfigError("[tuning] gammas is empty")
    zeta_raw = sec.get('zeta', 'search')
    if zeta_raw.strip().lower() == 'search':
        zeta = None
    else:
        try:
            zeta = float(zeta_raw)
        except ValueError:
            raise ConfigError(
                f"[tuning] zeta = {zeta_raw!r}: number or 'search'") from None
    kw = dict(order=sec.get('order', _REQUIRED, int),
              phi_target=sec.get('phi', _REQUIRED, float),
              omega_c=sec.get('omega_c', _REQUIRED, float),
              gamma_candidates=gammas,
              omega_f=sec.get('omega_f', LEAD_OMEGA_F_HZ, float),
              rounds=sec.get('rounds', 0, int),
              phase_tol=sec.get('phase_tol', 0.1, float),
              zeta=zeta)
    try:
        return TuningProblem(**kw), sec.resolved
    except ParameterError as exc:
        raise ConfigError(f"[tuning] {exc}") from None


def cmd_tune(config, out):
    """Run the tuning procedure; write ``candidates.csv`` and ``best.json``."""
    parser = _read_config(config)
    run = _Run('tune', out, config)
    problem, params = _tuning_problem(parser)
    run.params = {'tuning': params}
    prefix = 'f' if problem.order == 1 else 's'
    try:
        table = tune(problem)
    except InfeasibleError as exc:
        run.write_csv('rejected.csv', ['gamma', 'reason'],
                      [[fmt(g), msg] for g, msg in exc.rejected.items()])
        return run.finish(EXIT_INFEASIBLE, {'error': str(exc)})
    # Rows keep the label of their position in the candidate list;
    # gammas added by refinement are numbered after them.
    labels = {g: f'{prefix}{i}'
              for i, g in enumerate(problem.gamma_candidates, 1)}
    extra = sorted({c.gamma for c in table.candidates} - set(labels),
                   reverse=True)
    for k, g in enumerate(extra, len(labels) + 1):
        labels[g] = f'{prefix}{k}'
    rows = []
    for c in table.candidates:
        rows.append([labels[c.gamma], fmt(c.gamma), fmt(c.a), fmt(c.sigma),
                     fmt(c.achieved_phase), fmt(c.omega_r), fmt(c.gain_corr),
                     '' if c.beta is None else fmt(c.beta),
                     '' if c.zeta is None else fmt(c.zeta)])
    run.write_csv('candidates.csv',
                  ['ctrl', 'gamma', 'a', 'sigma', 'achieved_phase_deg',
                   'omega_r_rad_s', 'gain_corr', 'beta', 'zeta'], rows)
    run.write_csv('rejected.csv', ['gamma', 'reason'],
                  [[fmt(g), msg] for g, msg in sorted(table.rejected.items())])
    b = table.best
    run.write_json('best.json', {
        'order': problem.order, 'gamma': b.gamma, 'a': b.a,
        'omega_r_rad_s': b.omega_r, 'omega_r_hz': b.omega_r / TWO_PI,
        'gain_corr': b.gain_corr, 'beta': b.beta, 'zeta': b.zeta,
        'achieved_phase_deg': b.achieved_phase, 'sigma': b.sigma,
        'omega_f_hz': problem.omega_f})
    return run.finish(EXIT_OK)


def _sim_designs(parser):
    sec = _Section(parser, 'design',
                   ('names', 'order', 'gamma', 'a', 'omega_f', 'zeta'))
    if 'names' in sec:
        names = [n.strip() for n in sec.get('names').split(',') if n.strip()]
        if not names:
            raise ConfigError("[design] names is empty")
        designs = [(n, row_design(n)) for n in names]
    else:
        order = sec.get('order', _REQUIRED, int)
        gamma = sec.get('gamma', _REQUIRED, float)
        a = sec.get('a', _REQUIRED, float)
        wf = TWO_PI * sec.get('omega_f', LEAD_OMEGA_F_HZ, float)
        zeta = sec.get('zeta', 1.0, float)
        designs = [('custom', design_cglp(order, gamma,
                                          TWO_PI * CROSSOVER_HZ / a, wf,
                                          zeta))]
    return designs, sec.resolved


def cmd_simulate(config, out):
    """Closed-loop tracking runs; time series and ``summary.json``."""
    parser = _read_config(config)
    run = _Run('simulate', out, config)
    designs, dparams = _sim_designs(parser)
    rsec = _Section(parser, 'reference', ('amplitude', 'frequency'),
                    required=False)
    amp = rsec.get('amplitude', 20e-6, float)
    freq = rsec.get('frequency', 1.0, float)
    ssec = _Section(parser, 'simulation',
                    ('dt', 'settle_periods', 'analysis_periods',
                     'quantizer_step', 'output_step'), required=False)
    dt = ssec.get('dt', 1e-5, float)
    settle = ssec.get('settle_periods', 2, int)
    periods = ssec.get('analysis_periods', 4, int)
    q = ssec.get('quantizer_step', None, float)
    out_step = ssec.get('output_step', 1e-4, float)
    if not out_step > 0:
        raise ConfigError('[simulation] output_step must be positive')
    stride = max(1, int(round(out_step / dt)))
    try:
        cfg = SimConfig(dt=dt, duration=(settle + periods) / freq,
                        settle_periods=settle, ref_amplitude=amp,
                        ref_frequency=freq, quantizer_step=q)
    except ParameterError as exc:
        raise ConfigError(f"[simulation] {exc}") from None
    run.params = {'design': dparams, 'reference': rsec.resolved,
                  'simulation': ssec.resolved}
    plant = make_plant()
    summary = {}
    for name, design in designs:
        chain, kp = stage_controller(design, plant)
        try:
            res = simulate_closed_loop(chain, plant, cfg)
        except DivergenceError as exc:
            summary[name] = {'diverged': True, 'message': str(exc),
                             'last_stable_time': exc.last_stable_time}
            run.write_json('summary.json', summary)
            print(f"simulation of {name} diverged: {exc}", file=sys.stderr)
            return run.finish(EXIT_DIVERGENCE, {'error': str(exc)})
        expected = (0.0 if amp == 0
                    else expected_rms_error(chain, plant, amp, freq))
        summary[name] = {
            'gamma': design.gamma, 'omega_r_rad_s': design.omega_r,
            'kp': kp, 'rms_measured': res.rms_error,
            'rms_expected': expected,
            'deviation_ratio': deviation_ratio(res.rms_error, expected),
            'reset_count': int(len(res.reset_times))}
        run.write_csv(f'timeseries_{name}.csv',
                      ['t', 'reference', 'error', 'control', 'output'],
                      ([fmt(v) for v in sample] for sample in zip(
                          res.time[::stride], res.reference[::stride],
                          res.error[::stride], res.control[::stride],
                          res.output[::stride])))
    run.write_json('summary.json', summary)
    return run.finish(EXIT_OK)


def cmd_validate(out, orders=None, cases=None):
    """Compare analytic and simulated harmonics; write ``validation.csv``."""
    run = _Run('validate', out, None)
    orders = validation.ORDERS if orders is None else tuple(orders)
    cases = validation.oracle_cases() if cases is None else cases
    rows = validation.run_validation(cases, orders)
    body = []
    for r in rows:
        body.append([r.label, fmt(r.omega), r.n, fmt(abs(r.analytic)),
                     fmt(math.degrees(np.angle(r.analytic))),
                     fmt(abs(r.simulated)),
                     fmt(math.degrees(np.angle(r.simulated))),
                     fmt(r.rel_error), fmt(r.phase_error_deg),
                     'pass' if r.passed else 'FAIL'])
    run.write_csv('validation.csv',
                  ['element', 'omega_rad_s', 'order', 'analytic_mag',
                   'analytic_phase_deg', 'sim_mag', 'sim_phase_deg',
                   'rel_error', 'phase_error_deg', 'status'], body)
    failed = sum(not r.passed for r in rows)
    run.params = {'orders': list(orders), 'cases': len(cases),
                  'mag_tol': validation.MAG_TOL,
                  'phase_tol_deg': validation.PHASE_TOL_DEG,
                  'even_tol': validation.EVEN_TOL}
    status = EXIT_VALIDATION if failed else EXIT_OK
    print(f"validate: {len(rows) - failed}/{len(rows)} comparisons pass")
    return run.finish(status, {'failed': failed, 'total': len(rows)})


def _build_parser():
    p = argparse.ArgumentParser(
        prog='resetdf',
        description='Describing-function analysis and tuning of reset '
                    'controllers.')
    p.add_argument('--version', action='version', version=__version__)
    sub = p.add_subparsers(dest='command', required=True)
    for name, needs_cfg in (('analyze', True), ('tune', True),
                            ('simulate', True), ('validate', False)):
        s = sub.add_parser(name)
        s.add_argument('--config', required=needs_cfg,
                       help='INI configuration file (frequencies in Hz)')
        s.add_argument('--out', default=f'{name}_out',
                       help='output directory')
        if name in ('analyze', 'validate'):
            s.add_argument('--orders', help='comma-separated harmonic orders')
        if name == 'analyze':
            s.add_argument('--grid', help='fmin,fmax,points in Hz')
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        orders = _parse_orders(args.orders) if getattr(args, 'orders', None) \
            else None
        if args.command == 'analyze':
            grid = _parse_grid(args.grid) if args.grid else None
            return cmd_analyze(args.config, args.out, orders, grid)
        if args.command == 'tune':
            return cmd_tune(args.config, args.out)
        if args.command == 'simulate':
            return cmd_simulate(args.config, args.out)
        return cmd_validate(args.out, orders)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ParameterError, ResetDFError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
