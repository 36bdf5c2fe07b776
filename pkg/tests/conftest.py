import functools

import pytest

from pclass import local, tower
from pclass.analysis import _local_a


@functools.lru_cache(maxsize=None)
def local_case(ell, p, a_text, prec=40):
    """(ctx, pres) for K = F(a^(1/p)) over the base field at (ell, p)."""
    F = local.make_base(ell, p, prec)
    ctx = local.make_K(F, _local_a(F, a_text))
    return ctx, tower.build_J(ctx)


@pytest.fixture
def q3_sqrt3():
    return local_case(3, 2, "3")


@pytest.fixture
def q7_cbrt7():
    return local_case(7, 3, "7")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
