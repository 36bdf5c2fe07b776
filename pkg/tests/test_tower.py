import random

import pytest

from pclass import gmodule, quadratic, tower
from pclass.errors import BackendFailure, InfiniteJ
from pclass.fplin import FpVector

from conftest import local_case


def test_build_J_examples(q3_sqrt3, q7_cbrt7):
    assert q3_sqrt3[1].dim == 2
    assert q7_cbrt7[1].dim == 2
    with pytest.raises(InfiniteJ):
        tower.build_J(quadratic.QuadraticTower(2))


def test_presentation_columns_are_sigma_images(q7_cbrt7):
    ctx, pres = q7_cbrt7
    for i, b in enumerate(pres.basis_reps):
        assert tower.reduce(ctx, ctx.sigma(b), pres).coords == pres.module.sigma.column(i)


def test_reduce_examples():
    ctx, pres = local_case(13, 3, "pi*u")
    n = pres.dim
    assert tower.reduce(ctx, pres.basis_reps[0], pres).coords == FpVector.unit(3, n, 0)
    k = ctx.root_a + ctx.one() * 2
    assert tower.reduce(ctx, k ** 3, pres).coords.is_zero()
    both = tower.reduce(ctx, pres.basis_reps[0] * pres.basis_reps[1], pres).coords
    assert both == FpVector.unit(3, n, 0) + FpVector.unit(3, n, 1)


def test_reduce_is_a_homomorphism_and_lift_round_trips():
    ctx, pres = local_case(2, 2, "-1")
    rng = random.Random(1)
    for _ in range(8):
        e = FpVector(2, [rng.randrange(2) for _ in range(pres.dim)])
        f = FpVector(2, [rng.randrange(2) for _ in range(pres.dim)])
        x, y = pres.lift(ctx, e), pres.lift(ctx, f)
        assert tower.reduce(ctx, x, pres).coords == e
        assert tower.reduce(ctx, x * y, pres).coords == e + f


def test_norm_class_map_examples(q3_sqrt3):
    ctx, pres = local_case(7, 3, "pi*u")
    nmap = tower.norm_class_map(ctx, pres)
    root = tower.reduce(ctx, ctx.root_a, pres).coords
    assert nmap @ root == FpVector(3, ctx.F_class_coords(ctx.a))
    ctx2, pres2 = q3_sqrt3
    images = {(tower.norm_class_map(ctx2, pres2) @ v).coords for v in tower.all_class_vectors(2, 2)}
    assert len(images) == 2  # image of dimension 1


def test_epsilon_image_examples(q3_sqrt3):
    ctx, pres = q3_sqrt3
    assert len(tower.epsilon_image(ctx, pres)) == 1
    assert tower.reduce(ctx, ctx.embed(ctx.a), pres).coords.is_zero()
    ctx3, pres3 = local_case(7, 3, "7")
    assert tower.reduce(ctx3, ctx3.embed(ctx3.a), pres3).coords.is_zero()


def test_invariants_hold_on_samples():
    for case in [(3, 2, "3"), (7, 3, "u"), (3, 3, "zeta"), (11, 5, "pi")]:
        ctx, pres = local_case(*case)
        rng = random.Random(0)
        samples = [ctx.K.from_coords([rng.randint(-9, 9) for _ in range(ctx.K.n)]) for _ in range(3)]
        assert ctx.check_invariants(samples)
        nop = gmodule.norm_operator(pres.module)
        for x in samples:
            lhs = tower.reduce(ctx, ctx.embed(ctx.norm(x)), pres).coords
            assert lhs == nop @ tower.reduce(ctx, x, pres).coords


def test_certify_basis_rejects_dependent_reps(q7_cbrt7):
    ctx, pres = q7_cbrt7
    b0, b1 = pres.basis_reps
    with pytest.raises(BackendFailure):
        tower.certify_basis(ctx, [b0, b1, b0 * b1])
