import itertools
import random

import pytest

from pclass import local, tower
from pclass.errors import APthPower, UnsupportedConfiguration
from pclass.local import make_base, make_K, unit_class_generators

from conftest import local_case


def test_base_fields():
    F = make_base(7, 3)
    assert F.zeta_element().c[0] % 7 in (2, 4)
    z = F.zeta_element()
    assert z ** 3 == F.one() and z != F.one()
    Q3 = make_base(3, 2)
    assert Q3.zeta_element() == Q3.from_int(-1)
    with pytest.raises(UnsupportedConfiguration):
        make_base(5, 3)
    with pytest.raises(UnsupportedConfiguration):
        make_base(5, 5)


def test_make_K_examples():
    F = make_base(3, 2)
    ctx = make_K(F, F.from_int(3))
    assert ctx.K.valuation(ctx.root_a) == 1 and ctx.K.e == 2
    F7 = make_base(7, 3)
    assert make_K(F7, F7.from_int(7)).K.e == 3
    with pytest.raises(APthPower):
        make_K(F, F.from_int(4))
    E = make_base(3, 3)
    with pytest.raises(APthPower):
        make_K(E, E.from_int(10))  # 10 = 1 + 9 is a cube in Q_3(zeta)


def test_pth_power_examples():
    F3 = make_base(3, 2)
    assert F3.is_pth_power(F3.from_int(4))
    assert not F3.is_pth_power(F3.from_int(3))
    F7 = make_base(7, 3)
    assert not F7.is_pth_power(F7.from_int(2))
    assert F7.is_pth_power(F7.from_int(-1))
    F2 = make_base(2, 2)
    assert F2.is_pth_power(F2.from_int(17))
    assert not F2.is_pth_power(F2.from_int(5))


@pytest.mark.parametrize("ell,p,dim", [(3, 2, 2), (7, 3, 2), (2, 2, 3), (31, 5, 2), (3, 3, 4)])
def test_unit_class_generator_counts(ell, p, dim):
    F = make_base(ell, p)
    gens = unit_class_generators(F)
    assert len(gens) == dim
    tower.certify_basis(_BaseAsTower(F), gens)


def test_q2_classes_match_the_classical_generators():
    F = make_base(2, 2)
    classic = [F.from_int(x) for x in (2, -1, 5)]
    coords = [F.class_coords(x) for x in classic]
    # the classes of 2, -1 and 5 are independent, so they span Q_2×/Q_2×²
    rows = {tuple(sum(e * c for e, c in zip(es, col)) % 2 for col in zip(*coords))
            for es in itertools.product(range(2), repeat=3)}
    assert len(rows) == 8


class _BaseAsTower:
    """Just enough of a tower to let certify_basis test base-field classes."""

    def __init__(self, F):
        self.F, self.p = F, F.p

    def one(self):
        return self.F.one()

    def is_pth_power(self, x):
        return self.F.is_pth_power(x)


def test_pth_root_and_class_coords_round_trip():
    ctx, _ = local_case(13, 3, "pi*u")
    K = ctx.K
    rng = random.Random(3)
    for _ in range(10):
        x = K.from_coords([rng.randint(-50, 50) for _ in range(K.n)])
        r = K.pth_root(x ** 3)
        assert r ** 3 == x ** 3
        assert not any(K.class_coords(x ** 3))


def test_valuation_matches_norm():
    ctx, _ = local_case(3, 3, "pi")
    K, F = ctx.K, ctx.F
    rng = random.Random(5)
    for _ in range(10):
        x = K.from_coords([rng.randint(-20, 20) for _ in range(K.n)])
        if x.is_zero():
            continue
        # f(K/F) = 1 here, so v_F(N x) = v_K(x)
        assert F.valuation(ctx.norm(x)) == K.valuation(x)


def test_uniformizer_powers_keep_precision():
    ctx, _ = local_case(11, 5, "pi*u")
    K = ctx.K
    far = K.pi_pow(-65)
    assert K.valuation(far) == -65
    assert far.r >= K.prec - 2
    assert far * K.pi_pow(65) == K.one()


@pytest.mark.parametrize("ell,p,a,expect", [
    (3, 2, "3", (0, 1, 1)),
    (3, 2, "-1", (1, 0, 1)),
    (2, 2, "-1", (0, 2, 1)),
    (7, 3, "7", (0, 0, 1)),
])
def test_norm_group_profile(ell, p, a, expect):
    ctx, pres = local_case(ell, p, a)
    prof = local.norm_group_profile(ctx, pres)
    assert (prof.upsilon, prof.dim_NJ, prof.dim_F_mod_NK) == expect


def test_canonical_text_is_stable_under_precision_doubling():
    lo, _ = local_case(7, 3, "pi*u", 40)
    hi, _ = local_case(7, 3, "pi*u", 80)
    assert lo.root_a.to_text() == hi.root_a.to_text()
    assert lo.root_a.to_text().startswith("val:")


def test_precision_retry_doubles():
    seen = []

    def fn(prec):
        seen.append(prec)
        if prec < 160:
            raise local.PrecisionExhausted("need more")
        return prec

    assert local.with_precision_retry(fn, 40) == 160
    assert seen == [40, 80, 160]

    def never(prec):
        seen.append(prec)
        raise local.PrecisionExhausted("still not enough")

    seen.clear()
    with pytest.raises(local.PrecisionExhausted):
        local.with_precision_retry(never, 40)
    assert seen == [40, 80, 160, 320, 640]


def test_env_precision(monkeypatch):
    monkeypatch.setenv("PCLASS_PRECISION", "64")
    assert local.default_precision() == 64
