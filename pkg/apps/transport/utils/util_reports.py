"""
CSV writers for solution grids

This module contains:
- Profile CSVs: header x,t=<t1>,t=<t2>,... and one row per position
- Three-decimal tables in the layout of published relative concentrations
- Max-abs-difference reports between pairs of solvers
- Optional gnuplot scripts for the profile CSVs

All files are UTF-8 with LF line endings.
"""

import csv
import itertools
import logging
from pathlib import Path

import numpy as np
from django.conf import settings

logger = logging.getLogger(__name__)


def format_value(value, digits=None):
    if digits is None:
        digits = settings.CSV_SIGNIFICANT_DIGITS
    return f"{value:.{digits}g}"


def _time_header(grid, digits=None):
    return ['x'] + [f"t={format_value(t, digits)}" for t in grid.t_values]


def _open_csv(path):
    return open(path, 'w', encoding='utf-8', newline='')


def write_profile_csv(grid, path, digits=None):
    """One column per time, one row per x"""
    path = Path(path)
    with _open_csv(path) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(_time_header(grid, digits))
        for j, x in enumerate(grid.x_values):
            writer.writerow([format_value(x, digits)] + [format_value(v, digits) for v in grid.values[:, j]])
    logger.info("Wrote %s", path)
    return path


def read_profile_csv(path):
    """(x_values, t_values, values[t, x]) from a profile CSV"""
    with open(path, encoding='utf-8', newline='') as handle:
        rows = list(csv.reader(handle))
    t_values = np.array([float(cell.split('=', 1)[1]) for cell in rows[0][1:]])
    body = np.array([[float(cell) for cell in row] for row in rows[1:]])
    return body[:, 0], t_values, body[:, 1:].T


def write_table_csv(grid, path):
    """Relative concentrations rounded to three decimals"""
    path = Path(path)
    with _open_csv(path) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(_time_header(grid))
        for j, x in enumerate(grid.x_values):
            writer.writerow([format_value(x)] + [f"{v:.3f}" for v in grid.values[:, j]])
    logger.info("Wrote %s", path)
    return path


def comparison_rows(grids):
    """[(solver_a, solver_b, t, max |a - b|), ...] for every solver pair"""
    rows = []
    for (name_a, grid_a), (name_b, grid_b) in itertools.combinations(grids.items(), 2):
        differences = grid_a.max_abs_difference(grid_b)
        rows.extend((name_a, name_b, t, float(d)) for t, d in zip(grid_a.t_values, differences))
    return rows


def write_comparison_csv(grids, path, digits=None):
    path = Path(path)
    with _open_csv(path) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['solver_a', 'solver_b', 't', 'max_abs_diff'])
        for name_a, name_b, t, difference in comparison_rows(grids):
            writer.writerow([name_a, name_b, format_value(t, digits), format_value(difference, digits)])
    logger.info("Wrote %s", path)
    return path


def write_gnuplot_script(csv_path, grid, path):
    """Script plotting every time column of a profile CSV against x"""
    csv_path, path = Path(csv_path), Path(path)
    plots = ', \\\n     '.join(
        f"'{csv_path.name}' using 1:{column + 2} with linespoints title 't={format_value(t)}'"
        for column, t in enumerate(grid.t_values)
    )
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'x [cm]'",
        "set ylabel 'c/c0'",
        f"plot {plots}",
        "",
    ]
    path.write_text('\n'.join(lines), encoding='utf-8', newline='\n')
    logger.info("Wrote %s", path)
    return path
