import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pclass import fplin, gmodule, quadratic, tower
from pclass.fplin import FpMatrix, FpVector
from pclass.quadratic import QuadElement

from conftest import local_case

primes = st.sampled_from([2, 3, 5, 7])
SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def matrices(draw, square=False):
    p = draw(primes)
    r = draw(st.integers(1, 6))
    c = r if square else draw(st.integers(1, 6))
    rows = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    return FpMatrix(p, rows)


@given(matrices())
def test_rank_plus_nullity(m):
    assert fplin.rank(m) + len(fplin.kernel_basis(m)) == m.cols


@given(matrices(), st.data())
def test_solve_is_sound(m, data):
    b = FpVector(m.p, data.draw(st.lists(st.integers(0, m.p - 1), min_size=m.rows, max_size=m.rows)))
    x = fplin.solve(m, b)
    if x is None:
        assert fplin.rank(m) < fplin.span_rank(m.columns() + [b], m.p, m.rows)
    else:
        assert m @ x == b


@st.composite
def modules(draw):
    p = draw(st.sampled_from([2, 3, 5]))
    counts = {L: draw(st.integers(0, 3)) for L in range(1, p + 1)}
    if not any(counts.values()):
        counts[1] = 1
    return gmodule.random_module(p, counts, draw(st.integers(0, 10 ** 6))), gmodule.MultiplicityVector(p, counts)


@given(modules(), st.integers(0, 10 ** 6))
def test_profile_is_conjugation_invariant(mp, seed):
    M, profile = mp
    s, s_inv = gmodule.random_invertible(M.p, M.dim, np.random.default_rng(seed))
    N = gmodule.GModule(M.p, s @ M.sigma @ s_inv)
    assert gmodule.jordan_multiplicities(N) == gmodule.jordan_multiplicities(M) == profile


@given(modules())
def test_socle_layers_shrink(mp):
    M, profile = mp
    layers = gmodule.socle_series(M)
    sizes = [layers[0]] + [b - a for a, b in zip(layers, layers[1:])]
    assert sizes == sorted(sizes, reverse=True) and layers[-1] == M.dim
    assert fplin.rank(gmodule.norm_operator(M)) == profile[M.p]


@given(modules())
def test_decomposition_is_direct_and_matches_oracle(mp):
    M, profile = mp
    d = gmodule.decompose_jordan(M)
    assert gmodule.verify_direct_sum(M, d.parts)
    assert d.multiplicities(M.p) == profile


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)
quad_a = st.sampled_from([2, 3, 5, -1, -3, 6, -7, 10])


@given(quad_a, fractions, fractions, fractions, fractions)
def test_quadratic_norm_is_multiplicative(a, u1, v1, u2, v2):
    x, y = QuadElement(u1, v1, a), QuadElement(u2, v2, a)
    assert (x * y).norm() == x.norm() * y.norm()
    assert x.conjugate().norm() == x.norm()


@given(quad_a, fractions, fractions)
def test_squares_are_recognised(a, u, v):
    g = QuadElement(u, v, a)
    if g.is_zero():
        return
    ok, (s, t) = quadratic.is_square(g * g)
    assert ok and QuadElement(s, t, a) ** 2 == g * g


nonzero = st.integers(-400, 400).filter(bool)


@given(nonzero, nonzero)
def test_hilbert_reciprocity(b, c):
    assert quadratic.hilbert_product(b, c) == 1


@given(nonzero, nonzero, nonzero)
def test_hilbert_symbol_is_bimultiplicative(b, b2, c):
    for v in quadratic.relevant_places(b, b2, c):
        h = quadratic.hilbert_symbol
        assert h(b * b2, c, v) == h(b, c, v) * h(b2, c, v)


@given(st.sampled_from([(7, 3, "pi*u"), (3, 3, "zeta"), (2, 2, "-1"), (31, 5, "u")]),
       st.lists(st.integers(-30, 30), min_size=20, max_size=20))
@SLOW
def test_local_reduce_respects_products_and_norm(case, digits):
    ctx, pres = local_case(*case)
    n = ctx.K.n
    x = ctx.K.from_coords(digits[:n])
    y = ctx.K.from_coords(digits[n:2 * n])
    if x.is_zero() or y.is_zero():
        return
    rx, ry = (tower.reduce(ctx, z, pres).coords for z in (x, y))
    assert tower.reduce(ctx, x * y, pres).coords == rx + ry
    assert ctx.eq(ctx.embed(ctx.norm(ctx.sigma(x))), ctx.embed(ctx.norm(x)))
    nop = gmodule.norm_operator(pres.module)
    assert tower.reduce(ctx, ctx.embed(ctx.norm(x)), pres).coords == nop @ rx
