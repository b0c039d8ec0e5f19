import functools

import pytest

from singular_eig import PotentialSpec, RadialOperator, dimension_like, make_grid
from singular_eig.fd_eig import fd_principal_eigenvalue
from singular_eig.ode_shoot import shoot_eigenvalue
from singular_eig.rayleigh import variational_eigenvalue


@functools.lru_cache(maxsize=None)
def shoot(lam, big, dim, kind, gamma):
    return shoot_eigenvalue(dimension_like(lam, big, dim, strict=False), gamma, kind)


@functools.lru_cache(maxsize=None)
def fd_ball(lam, big, dim, kind, gamma, eps, nodes=8192):
    op = RadialOperator.parse(kind, dimension_like(lam, big, dim, strict=False))
    pot = PotentialSpec(gamma, eps)
    return fd_principal_eigenvalue(op, pot, make_grid(0, nodes, pot))


@functools.lru_cache(maxsize=None)
def variational(lam, big, dim, gamma, kind="pucci+", mesh_size=4096):
    return variational_eigenvalue(dimension_like(lam, big, dim, strict=False), gamma,
                                  mesh_size=mesh_size, operator_kind=kind)


@pytest.fixture
def cached():
    return {"shoot": shoot, "fd": fd_ball, "var": variational}


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
