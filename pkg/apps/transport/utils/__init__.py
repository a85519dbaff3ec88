"""
Modularized utils for the transport application

This package contains utilities organized by responsibility:
- util_case_library.py: The catalogued benchmark problems
- util_laplace.py: Laplace-domain layer coefficients and interface system
- util_inversion.py: Rational-approximation inversion and solution grids
- util_steady_state.py: Exact steady-state solver
- util_fvm.py: Finite volume reference solver
- util_run_config.py: JSON configs and grid syntax
- util_reports.py: CSV and gnuplot writers

Recommended usage with specific imports:
    from apps.transport.utils.util_case_library import case_library
    from apps.transport.utils.util_inversion import cf_quadrature, solve_grid
    from apps.transport.utils.util_fvm import fvm_solve
    from apps.transport.utils.util_steady_state import solve_steady
"""
