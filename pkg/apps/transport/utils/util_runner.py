"""
Run the selected solvers for one RunConfig and write the report files

Concentrations are relative: catalogued cases use c0 = 1, so the written
values are c/c0.

Exit codes: 0 success, 2 solver error, 3 configuration error.
"""

import logging
from pathlib import Path

from django.core.exceptions import ValidationError

from ..exceptions import ConfigError, TransportError
from ..models import Provenance
from .util_fvm import fvm_solve
from .util_inversion import cf_quadrature, solve_grid
from .util_reports import (
    write_comparison_csv,
    write_gnuplot_script,
    write_profile_csv,
    write_table_csv,
)
from .util_run_config import ReportMode
from .util_steady_state import solve_steady

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER_ERROR = 2
EXIT_CONFIG_ERROR = 3


def solve_with(solver, config):
    """SolutionGrid from one solver on the config's (x, t) grid"""
    problem = config.problem
    if solver == Provenance.SEMI_ANALYTICAL.value:
        quad = cf_quadrature(config.inversion_order)
        return solve_grid(problem, quad, config.x_values, config.t_values)
    if solver == Provenance.FINITE_VOLUME.value:
        nodal = fvm_solve(problem, config.t_values, n=config.fvm_nodes)
        return nodal.sample(config.x_values)
    return solve_steady(problem).grid(config.x_values, config.t_values)


def run(config):
    """
    Solve with every selected solver and write the report files

    Returns the exit code; files written before a failure are removed.
    """
    written = []
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        grids = {}
        for solver in config.solvers:
            logger.info("Running %s solver for %s", solver, config.label)
            grids[solver] = solve_with(solver, config)

        for solver, grid in grids.items():
            csv_path = config.output_dir / f"{config.label}_{solver}.csv"
            written.append(write_profile_csv(grid, csv_path))
            if config.gnuplot:
                written.append(write_gnuplot_script(csv_path, grid, csv_path.with_suffix('.gp')))

        if config.report is ReportMode.TABLE5:
            table_grid = grids.get(Provenance.SEMI_ANALYTICAL.value, next(iter(grids.values())))
            written.append(write_table_csv(table_grid, config.output_dir / f"{config.label}_table5.csv"))
        elif config.report is ReportMode.TABLE_COMPARE:
            if len(grids) < 2:
                raise ConfigError("table-compare needs at least two solvers", 'solvers')
            written.append(write_comparison_csv(grids, config.output_dir / f"{config.label}_compare.csv"))
    except (ConfigError, ValidationError) as error:
        logger.error("Configuration error: %s", error)
        _remove(written)
        return EXIT_CONFIG_ERROR
    except (TransportError, OSError, ValueError) as error:
        logger.error("Solver error: %s", error)
        _remove(written)
        return EXIT_SOLVER_ERROR
    return EXIT_OK


def _remove(paths):
    for path in paths:
        Path(path).unlink(missing_ok=True)
