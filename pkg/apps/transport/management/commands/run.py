"""
Solve a catalogued or configured problem

    python manage.py run --case 5 --solvers salt,fvm --x 0:2:20 --t 0.2,0.4
    python manage.py run --config problem.json --report table-compare

Command line values win over the run section of a config file.
"""

from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from apps.transport.exceptions import ConfigError
from apps.transport.utils.util_case_library import CASE_IDS, case_library
from apps.transport.utils.util_run_config import (
    ReportMode,
    RunConfig,
    parse_config,
    parse_grid_spec,
    parse_solvers,
    parse_time_list,
)
from apps.transport.utils.util_runner import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_SOLVER_ERROR, run

FAILURES = {
    EXIT_SOLVER_ERROR: "Solver error, no result files were kept",
    EXIT_CONFIG_ERROR: "Configuration error, no result files were kept",
}


class Command(BaseCommand):
    help = 'Solute transport in layered porous media (relative concentrations, c0 = 1).'

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--case', type=int, choices=CASE_IDS, help='catalogued case number')
        source.add_argument('--config', type=Path, help='JSON problem file')
        parser.add_argument('--solvers', help='comma separated subset of salt,fvm,steady (default salt)')
        parser.add_argument('--x', help='positions as start:step:stop (stop included)')
        parser.add_argument('--t', help='comma separated times')
        parser.add_argument('--N', type=int, dest='inversion_order', help='inversion order (even, 2..32)')
        parser.add_argument('--n', type=int, dest='fvm_nodes', help='finite volume node count')
        parser.add_argument('--out', type=Path, dest='output_dir', help='output directory')
        parser.add_argument('--report', choices=[mode.value for mode in ReportMode], help='report mode')
        parser.add_argument('--gnuplot', action='store_true', default=None,
                            help='also write a gnuplot script per CSV')

    def handle(self, *args, **options):
        try:
            config = self.build_config(options)
        except ValidationError as error:
            raise CommandError(f"Configuration error: {'; '.join(error.messages)}", returncode=EXIT_CONFIG_ERROR)
        except ConfigError as error:
            raise CommandError(f"Configuration error: {error}", returncode=EXIT_CONFIG_ERROR)

        code = run(config)
        if code != EXIT_OK:
            raise CommandError(FAILURES[code], returncode=code)
        self.stdout.write(self.style.SUCCESS(f"{config.label}: results written to {config.output_dir}"))

    def build_config(self, options):
        """
        RunConfig from the parsed options

        Raises:
            ValidationError: malformed grid, time or solver flags
            ConfigError: invalid config file or run settings
        """
        overrides = {
            'solvers': parse_solvers(options['solvers']) if options['solvers'] else None,
            'x_values': parse_grid_spec(options['x']) if options['x'] else None,
            't_values': parse_time_list(options['t']) if options['t'] else None,
            'inversion_order': options['inversion_order'],
            'fvm_nodes': options['fvm_nodes'],
            'output_dir': options['output_dir'],
            'report': ReportMode(options['report']) if options['report'] else None,
            'gnuplot': options['gnuplot'],
        }
        if options['config'] is not None:
            _, config = parse_config(options['config'], **overrides)
            return config

        case_id = options['case']
        spec = case_library(case_id)
        values = {key: value for key, value in overrides.items() if value is not None}
        values.setdefault('x_values', spec.x_values)
        values.setdefault('t_values', spec.t_values)
        return RunConfig(problem=spec.problem, label=f"case{case_id}", case_id=case_id, c0=spec.c0, **values)
