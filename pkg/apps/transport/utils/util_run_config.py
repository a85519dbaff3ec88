"""
Run configuration: JSON problem files and grid syntax

A config file looks like:

    {
      "layers": [{"x_right": 10, "R": 1, "D": 50, "v": 25, "theta": 0.4}, ...],
      "inlet": {"a": 25, "b": 50, "signal": {"type": "constant", "c0": 25}},
      "outlet": {"a": 0, "b": 1},
      "run": {"x": "0:2:20", "t": [0.2, 0.4], "N": 14, "n": 601,
              "solvers": ["salt", "fvm"], "output": "output"}
    }

Each JSON object is checked by a form; mu, gamma and f default to 0 and a
missing outlet is a zero-gradient outlet.
"""

import enum
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django import forms
from django.conf import settings
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError

from ..exceptions import ConfigError
from ..models import Layer, Problem, RobinBoundary, SignalKind, TransientSignal
from .util_inversion import MAX_ORDER, MIN_ORDER

logger = logging.getLogger(__name__)

SOLVERS = ('salt', 'fvm', 'steady')
GRID_TOLERANCE = 1e-9

# Model field -> config key, for error messages
FIELD_TO_KEY = {
    'x_left': 'x_right', 'x_right': 'x_right', 'retardation': 'R', 'dispersion': 'D',
    'velocity': 'v', 'decay_rate': 'mu', 'production_rate': 'gamma',
    'water_content': 'theta', 'initial_concentration': 'f',
}

SIGNAL_PARAMETERS = {
    SignalKind.ZERO: (),
    SignalKind.CONSTANT: ('c0',),
    SignalKind.STEP: ('c0', 't0'),
    SignalKind.RAMP_EXP: ('c0', 'alpha', 'beta'),
}


class ReportMode(str, enum.Enum):
    PROFILES = 'profiles'
    TABLE5 = 'table5'
    TABLE_COMPARE = 'table-compare'


def parse_grid_spec(text):
    """
    'start:step:stop' -> array, inclusive of stop when it lies on the grid

    Raises:
        ValidationError: malformed spec
    """
    try:
        start, step, stop = (float(part) for part in str(text).split(':'))
    except ValueError:
        raise ValidationError("Expected start:step:stop, got %(text)r.", code='invalid', params={'text': text})
    if not (math.isfinite(start) and math.isfinite(step) and math.isfinite(stop)):
        raise ValidationError("Grid bounds must be finite, got %(text)r.", code='invalid', params={'text': text})
    if step <= 0 or stop < start:
        raise ValidationError("Need step > 0 and stop >= start, got %(text)r.", code='invalid', params={'text': text})
    count = int(math.floor((stop - start) / step + GRID_TOLERANCE)) + 1
    values = start + step * np.arange(count)
    if abs(values[-1] - stop) <= GRID_TOLERANCE * max(1.0, abs(stop)):
        values[-1] = stop
    return values


def parse_time_list(value):
    """Comma separated string or list of numbers -> tuple of floats"""
    items = value.split(',') if isinstance(value, str) else value
    try:
        times = tuple(float(item) for item in items)
    except (TypeError, ValueError):
        raise ValidationError("Expected a list of times, got %(value)r.", code='invalid', params={'value': value})
    if not times:
        raise ValidationError("At least one time is required.", code='required')
    if any(not math.isfinite(t) or t < 0 for t in times):
        raise ValidationError("Times must be finite and non-negative.", code='invalid')
    return times


def parse_solvers(value):
    items = value.split(',') if isinstance(value, str) else value
    solvers = tuple(str(item).strip() for item in items if str(item).strip())
    unknown = [name for name in solvers if name not in SOLVERS]
    if unknown:
        raise ValidationError(
            "Unknown solver(s) %(unknown)s; choose from %(choices)s.",
            code='invalid',
            params={'unknown': ', '.join(unknown), 'choices': ', '.join(SOLVERS)},
        )
    return solvers


def validate_inversion_order(value):
    if value % 2 or not MIN_ORDER <= value <= MAX_ORDER:
        raise ValidationError(
            "Inversion order must be an even integer in [%(low)s, %(high)s], got %(value)s.",
            code='invalid',
            params={'low': MIN_ORDER, 'high': MAX_ORDER, 'value': value},
        )


class StrictForm(forms.Form):
    """
    Form over one JSON object

    Keys the form does not declare are reported as non-field errors that
    carry the key in their params.
    """

    def clean(self):
        cleaned_data = super().clean()
        for key in self.data:
            if key not in self.fields:
                raise ValidationError("Unknown key '%(key)s'.", code='unknown_key', params={'key': key})
        return cleaned_data


class LayerForm(StrictForm):
    x_right = forms.FloatField()
    R = forms.FloatField()
    D = forms.FloatField()
    v = forms.FloatField()
    theta = forms.FloatField()
    mu = forms.FloatField(required=False)
    gamma = forms.FloatField(required=False)
    f = forms.FloatField(required=False)

    def to_layer(self, x_left):
        data = self.cleaned_data
        return Layer(
            x_left=x_left, x_right=data['x_right'], retardation=data['R'],
            dispersion=data['D'], velocity=data['v'], decay_rate=data['mu'] or 0.0,
            production_rate=data['gamma'] or 0.0, water_content=data['theta'],
            initial_concentration=data['f'] or 0.0,
        )


class SignalForm(StrictForm):
    type = forms.ChoiceField(choices=[(kind.value, kind.value) for kind in SignalKind], required=False)
    c0 = forms.FloatField(required=False)
    t0 = forms.FloatField(required=False)
    alpha = forms.FloatField(required=False)
    beta = forms.FloatField(required=False)

    def clean(self):
        """Each signal type needs its own parameters"""
        cleaned_data = super().clean()
        kind = SignalKind(cleaned_data.get('type') or SignalKind.ZERO.value)
        for name in SIGNAL_PARAMETERS[kind]:
            if cleaned_data.get(name) is None and name not in self.errors:
                self.add_error(name, ValidationError("This field is required.", code='required'))
        cleaned_data['kind'] = kind
        return cleaned_data

    def to_signal(self):
        data = self.cleaned_data
        kind = data['kind']
        if kind is SignalKind.CONSTANT:
            return TransientSignal.constant(data['c0'])
        if kind is SignalKind.STEP:
            return TransientSignal.step(data['c0'], data['t0'])
        if kind is SignalKind.RAMP_EXP:
            return TransientSignal.ramp_exp(data['c0'], data['alpha'], data['beta'])
        return TransientSignal.zero()


class BoundaryForm(StrictForm):
    a = forms.FloatField()
    b = forms.FloatField()
    signal = forms.Field(required=False)


class RunForm(StrictForm):
    x = forms.Field(required=False)
    t = forms.Field(required=False)
    N = forms.IntegerField(required=False, validators=[validate_inversion_order])
    n = forms.IntegerField(required=False, min_value=3)
    solvers = forms.Field(required=False)
    output = forms.CharField(required=False)
    report = forms.ChoiceField(choices=[(mode.value, mode.value) for mode in ReportMode], required=False)
    gnuplot = forms.BooleanField(required=False)

    def clean_x(self):
        value = self.cleaned_data.get('x')
        if value is None:
            return None
        if isinstance(value, list):
            try:
                return np.asarray(value, dtype=float)
            except (TypeError, ValueError):
                raise ValidationError("Expected a list of positions.", code='invalid')
        return parse_grid_spec(value)

    def clean_t(self):
        value = self.cleaned_data.get('t')
        return None if value is None else parse_time_list(value)

    def clean_solvers(self):
        value = self.cleaned_data.get('solvers')
        return None if value is None else parse_solvers(value)

    def options(self):
        """RunConfig keyword arguments for the keys present in the file"""
        data = self.cleaned_data
        names = {
            'x': 'x_values', 't': 't_values', 'N': 'inversion_order', 'n': 'fvm_nodes',
            'solvers': 'solvers', 'output': 'output_dir', 'report': 'report', 'gnuplot': 'gnuplot',
        }
        options = {}
        for key in self.data:
            value = data.get(key)
            if value is None or (isinstance(value, str) and not value):
                continue
            options[names[key]] = value
        if 'output_dir' in options:
            options['output_dir'] = Path(options['output_dir'])
        if 'report' in options:
            options['report'] = ReportMode(options['report'])
        return options


class ProblemForm(StrictForm):
    layers = forms.Field()
    inlet = forms.Field()
    outlet = forms.Field(required=False)
    run = forms.Field(required=False)


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything run() needs; problem is already resolved and validated"""

    problem: Problem
    label: str
    solvers: tuple = ('salt',)
    x_values: np.ndarray = None
    t_values: tuple = ()
    inversion_order: int = None
    fvm_nodes: int = None
    output_dir: Path = None
    report: ReportMode = ReportMode.PROFILES
    gnuplot: bool = False
    case_id: int = None
    config_path: Path = None
    c0: float = 1.0

    def __post_init__(self):
        if not self.solvers:
            raise ConfigError("at least one solver must be selected", 'solvers')
        if self.x_values is None or len(self.x_values) == 0:
            raise ConfigError("the x grid is empty", 'x')
        if not self.t_values:
            raise ConfigError("at least one time is required", 't')
        if self.inversion_order is None:
            object.__setattr__(self, 'inversion_order', settings.INVERSION_ORDER)
        try:
            validate_inversion_order(self.inversion_order)
        except ValidationError as error:
            raise ConfigError(error.messages[0], 'N')
        if self.fvm_nodes is None:
            object.__setattr__(self, 'fvm_nodes', settings.FVM_NODES)
        if self.output_dir is None:
            object.__setattr__(self, 'output_dir', Path(settings.OUTPUT_DIR))
        object.__setattr__(self, 'x_values', np.asarray(self.x_values, dtype=float))
        object.__setattr__(self, 'report', ReportMode(self.report))


def join_path(path, key):
    return f"{path}.{key}" if path and key else (path or key or None)


def form_error(form, path):
    """ConfigError for the first error of a bound form"""
    name, errors = next(iter(form.errors.as_data().items()))
    error = errors[0]
    if name == NON_FIELD_ERRORS:
        name = (error.params or {}).get('key')
    return ConfigError(error.messages[0], join_path(path, name))


def clean_section(form_class, data, path):
    """
    Bound and validated form for one JSON object

    Raises:
        ConfigError: not an object, or the first form error with its key path
    """
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or None)
    form = form_class(data)
    if not form.is_valid():
        raise form_error(form, path)
    return form


def _parse_signal(data, path):
    if data is None:
        return TransientSignal.zero()
    return clean_section(SignalForm, data, path).to_signal()


def _parse_boundary(data, path):
    form = clean_section(BoundaryForm, data, path)
    signal = _parse_signal(form.cleaned_data['signal'], f"{path}.signal")
    return RobinBoundary(form.cleaned_data['a'], form.cleaned_data['b'], signal)


def _parse_layers(data):
    if not isinstance(data, list) or not data:
        raise ConfigError("expected a non-empty list of layers", 'layers')
    layers = []
    x_left = 0.0
    for index, row in enumerate(data):
        layer = clean_section(LayerForm, row, f"layers[{index}]").to_layer(x_left)
        layers.append(layer)
        x_left = layer.x_right
    return tuple(layers)


def config_key_path(field_path):
    """'layers[0].dispersion' -> 'layers[0].D'"""
    head, _, name = field_path.rpartition('.')
    if head.startswith('layers[') and name in FIELD_TO_KEY:
        return f"{head}.{FIELD_TO_KEY[name]}"
    return field_path


def problem_from_dict(data):
    """
    Build and validate a Problem from parsed JSON

    Raises:
        ConfigError: schema or validation errors, with config key paths
    """
    form = clean_section(ProblemForm, data, '')
    layers = _parse_layers(form.cleaned_data['layers'])
    inlet = _parse_boundary(form.cleaned_data['inlet'], 'inlet')
    outlet = form.cleaned_data['outlet']
    outlet = RobinBoundary.zero_gradient() if outlet is None else _parse_boundary(outlet, 'outlet')
    problem = Problem(layers, inlet, outlet)
    try:
        return problem.full_clean()
    except ValidationError as error:
        details = [(config_key_path(path), message)
                   for path, messages in error.message_dict.items() for message in messages]
        if len(details) == 1:
            key_path, message = details[0]
            raise ConfigError(message, key_path)
        raise ConfigError('; '.join(f"{key_path}: {message}" for key_path, message in details))


def load_config_file(path):
    """
    (Problem, run options dict) from a JSON config file

    Raises:
        ConfigError: unreadable file, JSON syntax error (with line/column) or schema error
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as error:
        raise ConfigError(f"cannot read config file: {error.strerror}", str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError(f"{error.msg} (line {error.lineno}, column {error.colno})", str(path))
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", str(path))
    problem = problem_from_dict(data)
    run = data.get('run')
    options = {} if run is None else clean_section(RunForm, run, 'run').options()
    return problem, options


def parse_config(path, **overrides):
    """
    Problem and RunConfig from a config file

    Keyword overrides (e.g. from the command line) win over the run section.
    """
    problem, options = load_config_file(path)
    options.update({key: value for key, value in overrides.items() if value is not None})
    options.setdefault('x_values', np.linspace(0.0, problem.length, 11))
    options.setdefault('t_values', (1.0,))
    label = Path(path).stem
    config = RunConfig(problem=problem, label=label, config_path=Path(path), **options)
    return problem, config
