import random

import pytest

from pclass import fplin, gmodule, structure, tower
from pclass.errors import (InfiniteProfile, MixedP, NormNotOne, NotInIntersection,
                           PreconditionViolated)
from pclass.gmodule import MultiplicityVector
from pclass.structure import INFINITE, InvariantProfile, theorem3_profile

from conftest import local_case


def prof(p, ups, dim_nj, fn, nn=None):
    return InvariantProfile(p, ups, dim_nj, fn, nn)


def test_multiplicity_formula_examples():
    assert theorem3_profile(prof(3, 1, 2, 1)) == MultiplicityVector(3, {1: 2, 3: 2})
    assert theorem3_profile(prof(3, 0, 0, 2)) == MultiplicityVector(3, {1: 1, 2: 1})
    assert theorem3_profile(prof(2, 0, 1, 1)) == MultiplicityVector(2, {2: 1})
    with pytest.raises(InfiniteProfile):
        theorem3_profile(InvariantProfile(2, 1, None, INFINITE))


def test_isomorphism_test_examples():
    a = prof(2, 1, 0, 0, 0)
    b = prof(2, 0, 1, 2, 1)
    assert structure.isomorphism_test(a, a)
    assert not structure.isomorphism_test(a, b)
    with pytest.raises(MixedP):
        structure.isomorphism_test(a, prof(3, 1, 0, 0, 0))
    with pytest.raises(InfiniteProfile):
        structure.isomorphism_test(a, InvariantProfile(2, 1, None, INFINITE))


def test_hilbert90_examples():
    ctx, _ = local_case(7, 3, "u")
    assert ctx.eq(ctx.sigma(structure.hilbert90_solve(ctx, ctx.one())),
                  structure.hilbert90_solve(ctx, ctx.one()))
    with pytest.raises(NormNotOne):
        structure.hilbert90_solve(ctx, ctx.root_a)


def test_hilbert90_round_trip_local():
    ctx, _ = local_case(3, 3, "pi")
    rng = random.Random(4)
    for _ in range(10):
        w0 = ctx.K.from_coords([rng.randint(-9, 9) for _ in range(ctx.K.n)])
        alpha = ctx.sigma(w0) / w0
        w = structure.hilbert90_solve(ctx, alpha)
        assert ctx.eq(ctx.sigma(w) / w, alpha)


def test_decompose_norm_in_aF_examples():
    ctx, _ = local_case(13, 3, "pi*u")
    F = ctx.F
    assert structure.decompose_norm_in_aF(ctx, ctx.a)[0] == 1
    f0 = F.from_int(5)
    s, f = structure.decompose_norm_in_aF(ctx, f0 ** 3)
    assert s == 0 and f ** 3 == f0 ** 3
    s, f = structure.decompose_norm_in_aF(ctx, ctx.a ** 2 * f0 ** 3)
    assert s == 2 and ctx.a ** 2 * f ** 3 == ctx.a ** 2 * f0 ** 3
    with pytest.raises(NotInIntersection):
        structure.decompose_norm_in_aF(ctx, F.from_int(2))


@pytest.mark.parametrize("a", ["pi", "4"])
def test_norm_lift_on_free_summand_generators(a):
    ctx, pres = local_case(3, 3, a)
    inv = structure.measure_profile(ctx, pres)
    lam = structure.find_exact_norm_preimage(ctx, pres, ctx.zeta) if inv.upsilon else None
    lifted = 0
    for v in tower.all_class_vectors(3, pres.dim)[:200]:
        if v.is_zero() or gmodule.cyclic_submodule(pres.module, v).length != 3:
            continue
        res = structure.lemma1_lift(ctx, pres, pres.lift(ctx, v), lam)
        assert res.t == 0
        n = tower.reduce(ctx, ctx.embed(ctx.norm(res.alpha.representative)), pres).coords
        assert fplin.in_span(n, [res.target_line]) and not n.is_zero()
        assert res.target_line == structure.fixed_line(pres.module, v)
        lifted += 1
    assert lifted >= 20


def test_norm_lift_length_two_returns_a_shift():
    ctx, pres = local_case(3, 3, "4")
    assert structure.measure_profile(ctx, pres).upsilon == 0
    root = tower.reduce(ctx, ctx.root_a, pres).coords
    j1 = fplin.kernel_basis(pres.module.nilpotent)
    seen = 0
    for v in tower.all_class_vectors(3, pres.dim):
        if v.is_zero() or gmodule.cyclic_submodule(pres.module, v).length != 2:
            continue
        if fplin.in_span(v, j1 + [root]):
            continue
        res = structure.lemma1_lift(ctx, pres, pres.lift(ctx, v))
        assert res.target_line == structure.fixed_line(pres.module, v + root * res.t)
        seen += 1
        if seen == 10:
            break
    assert seen


def test_norm_lift_excluded_shape():
    ctx, pres = local_case(7, 3, "pi")
    inv = structure.measure_profile(ctx, pres)
    assert inv.upsilon == 0
    with pytest.raises(PreconditionViolated):
        structure.lemma1_lift(ctx, pres, ctx.root_a)


def test_decomposition_of_q3_sqrt3(q3_sqrt3):
    ctx, pres = q3_sqrt3
    cert = structure.decompose_arithmetic(ctx, pres)
    assert cert.X_part is None and cert.Z_parts == ()
    assert [c.length for c in cert.Y_parts] == [2]
    assert structure.build_Y(ctx, pres)[0].length == 2


def test_x_part_shapes():
    ctx, pres = local_case(7, 3, "7")
    inv = structure.measure_profile(ctx, pres)
    X = structure.build_X(ctx, pres, inv)
    assert inv.upsilon == 0 and X.length == 2
    assert X.basis[1] == tower.reduce(ctx, ctx.embed(ctx.zeta), pres).coords
    ctx, pres = local_case(7, 3, "u")
    inv = structure.measure_profile(ctx, pres)
    X = structure.build_X(ctx, pres, inv)
    assert inv.upsilon == 1 and X.length == 1
    nmap = tower.norm_class_map(ctx, pres)
    assert nmap @ X.generator == pres.a_class


@pytest.mark.parametrize("case", [(7, 3, "7"), (13, 3, "pi^2*u"), (31, 5, "pi*u"), (2, 2, "-1"),
                                  (3, 3, "zeta"), (5, 2, "u")])
def test_three_way_agreement(case):
    ctx, pres = local_case(*case)
    inv = structure.measure_profile(ctx, pres)
    oracle = gmodule.jordan_multiplicities(pres.module)
    cert = structure.decompose_arithmetic(ctx, pres, inv)
    assert theorem3_profile(inv) == oracle == cert.multiplicities(ctx.p)
    assert structure.socle_induction_check(pres.module, cert)
    assert structure.lemma2_check(ctx, pres, inv)["ok"]
    assert structure.exact_sequence_check(ctx, pres, inv)["ok"]
    assert structure.corollary1_checks(ctx, pres, inv).consistent


def test_local_free_case(q3_sqrt3):
    ctx, pres = q3_sqrt3
    inv = structure.measure_profile(ctx, pres)
    rec = structure.corollary1_checks(ctx, pres, inv)
    assert rec.free and rec.consistent
    assert gmodule.jordan_multiplicities(pres.module) == MultiplicityVector(2, {2: 1})


def test_exact_sequence_trivial_norm_when_upsilon_zero():
    ctx, pres = local_case(13, 3, "pi")
    inv = structure.measure_profile(ctx, pres)
    es = structure.exact_sequence_check(ctx, pres, inv)
    assert inv.upsilon == 0 and es["ok"] and not es["norm_surjective"]
