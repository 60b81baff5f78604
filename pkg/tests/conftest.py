from __future__ import annotations

import pytest
from hypothesis import settings

settings.register_profile("ci", deadline=None, derandomize=True, print_blob=True)
settings.load_profile("ci")

TARGET = [-0.8, -0.3, -0.3]
DELTAS = (0.04, 0.02, 0.01)


@pytest.fixture(scope="session")
def target_divisor():
    from conicpinch.divisor import ConicDivisor
    return ConicDivisor.from_orders(TARGET)


@pytest.fixture(scope="session")
def sweep_results(target_divisor):
    """Construction pipeline for the three desk-scale radii (shared continuation path)."""
    from conicpinch.construction import sweep
    return sweep(target_divisor, DELTAS)


@pytest.fixture(scope="session")
def sequence_run(sweep_results, target_divisor):
    from conicpinch.convergence import SequenceRun, analyze_member
    from conicpinch.levelset import RasterSpec
    d = target_divisor
    run = SequenceRun(d.alpha, d.beta1)
    for r in sweep_results:
        run.members.append(analyze_member(r.u2, d.alpha, d.beta1, r.config.delta,
                                          raster=RasterSpec(4.0, 1.0 / 64),
                                          report=r.certificate.report))
    return run


@pytest.fixture(scope="session")
def solved_three_point():
    from conicpinch.divisor import ConicDivisor
    from conicpinch.solver import SolverConfig, solve_constant_curvature
    d = ConicDivisor.from_orders([-0.3, -0.3, -0.4])
    return solve_constant_curvature(d, 1.0, SolverConfig(ds=1.0 / 32, n_theta=128))
