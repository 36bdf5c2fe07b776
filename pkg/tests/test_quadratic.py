import itertools
import random
from fractions import Fraction

import pytest

from pclass import quadratic, structure
from pclass.errors import InvalidPlace
from pclass.quadratic import QuadElement, QuadraticTower


def Q2(u, v):
    return QuadElement(u, v, 2)


def test_norm_examples():
    assert quadratic.norm(Q2(1, 1)) == -1
    assert quadratic.norm(QuadElement(Fraction(5, 3), 0, -7)) == Fraction(25, 9)
    assert quadratic.norm(Q2(3, 2)) == 1
    assert quadratic.norm(Q2(3, 2) * Q2(1, 1)) == -1


def test_is_square_examples():
    assert quadratic.is_square(Q2(3, 2)) == (True, (1, 1))
    assert quadratic.is_square(Q2(1, 1)) == (False, None)
    assert quadratic.is_square(Q2(9, 0)) == (True, (3, 0))
    assert quadratic.is_square(Q2(2, 0)) == (True, (0, 1))  # 2 = (√2)²


def test_squares_of_random_elements_are_squares():
    rng = random.Random(7)
    for a in (2, -1, 5, -15, 30):
        for _ in range(20):
            g = QuadElement(Fraction(rng.randint(-30, 30), rng.randint(1, 6)),
                            Fraction(rng.randint(-30, 30), rng.randint(1, 6)), a)
            if g.is_zero():
                continue
            ok, (s, t) = quadratic.is_square(g * g)
            assert ok and QuadElement(s, t, a) ** 2 == g * g


def test_hilbert_symbol_examples():
    assert quadratic.hilbert_symbol(-1, -1, "inf") == -1
    assert quadratic.hilbert_symbol(-1, 3, 3) == -1
    assert quadratic.hilbert_symbol(-1, -1, 2) == -1
    assert quadratic.hilbert_symbol(2, 7, 7) == 1  # 2 is a square mod 7
    with pytest.raises(InvalidPlace):
        quadratic.hilbert_symbol(2, 3, 9)
    with pytest.raises(InvalidPlace):
        quadratic.hilbert_symbol(2, 3, "nowhere")


def _locally_solvable_mod(b, c, q, k):
    """x² − b y² − c z² ≡ 0 (mod q^k) with a primitive solution (brute force)."""
    m = q ** k
    return any((x * x - b * y * y - c * z * z) % m == 0
               for x, y, z in itertools.product(range(m), repeat=3)
               if x % q or y % q or z % q)


@pytest.mark.parametrize("b,c", [(-1, 3), (3, 5), (-1, -1), (2, 5), (6, 7), (-3, 5)])
def test_symbol_at_odd_prime_matches_brute_force(b, c):
    for q in (3, 5, 7):
        solvable = _locally_solvable_mod(b, c, q, 2)
        assert (quadratic.hilbert_symbol(b, c, q) == 1) == solvable


def test_reciprocity_on_random_pairs():
    rng = random.Random(2024)
    for _ in range(200):
        b = rng.choice([-1, 1]) * rng.randint(1, 500)
        c = rng.choice([-1, 1]) * rng.randint(1, 500)
        assert quadratic.hilbert_product(b, c) == 1


def test_minus_one_is_norm_examples():
    assert quadratic.minus_one_is_norm(2) == (True, (1, 1))
    assert quadratic.minus_one_is_norm(-1) == (False, None)
    assert quadratic.minus_one_is_norm(3) == (False, None)
    ok, (u, v) = quadratic.minus_one_is_norm(5)
    assert ok and u * u - 5 * v * v == -1


def test_is_norm_examples():
    assert not quadratic.is_norm(-1, -1)
    assert not quadratic.is_norm(3, -1)
    assert quadratic.is_norm(5, -1)
    rng = random.Random(5)
    for a in (2, -3, 7):
        for _ in range(10):
            g = QuadElement(rng.randint(1, 20), rng.randint(-20, 20), a)
            assert quadratic.is_norm(g.norm(), a)


def test_symbols_agree_with_witness_search():
    for a in (2, -1, 3, 5, -5, 6, -2):
        for c in range(-15, 16):
            if c == 0:
                continue
            found = quadratic.norm_witness(c, a, bound=60) is not None
            if found:
                assert quadratic.is_norm(c, a)
            elif quadratic.is_norm(c, a):
                pytest.fail(f"{c} should be a norm from Q(√{a}) but no witness of height ≤ 60")


def test_inert_prime_and_factoring():
    assert quadratic.inert_prime(-1) == 3
    assert quadratic.inert_prime(2) == 3
    assert quadratic.inert_prime(7) == 5
    assert quadratic.factor(360) == {2: 3, 3: 2, 5: 1}
    assert quadratic.squarefree_part(-72) == -2


def test_fields_do_not_mix():
    with pytest.raises(TypeError):
        Q2(1, 1) * QuadElement(1, 1, 3)
    with pytest.raises(ValueError):
        QuadraticTower(4)


def test_freeness_predicates_for_quadratic_fields():
    gi = quadratic.corollary1_quadratic(-1)
    assert not gi.free and gi.upsilon == 0 and gi.inert_witness == 3
    assert not quadratic.is_norm(3, -1) and not quadratic.is_norm(-3, -1)
    r2 = quadratic.corollary1_quadratic(2)
    assert r2.upsilon == 1 and r2.minus_one_witness == (1, 1) and not r2.free


def test_tower_hilbert90_example():
    ctx = QuadraticTower(2)
    alpha = Q2(1, 1) / Q2(1, -1)
    omega = structure.hilbert90_solve(ctx, alpha)
    assert ctx.sigma(omega) / omega == alpha
    assert ctx.sigma(Q2(1, 1) ** -1) / Q2(1, 1) ** -1 == alpha


def test_identical_norms_differ_by_a_rational_times_a_square():
    ctx = QuadraticTower(-7)
    rng = random.Random(9)
    for _ in range(15):
        x = ctx.element(rng.randint(1, 9), rng.randint(1, 9))
        y = ctx.element(rng.randint(1, 9), rng.randint(-9, 9))
        g2 = ctx.sigma(x) * ctx.sigma(y) / y
        assert ctx.norm(x) == ctx.norm(g2)
        assert structure.same_norm_quadratic(ctx, x, g2)[0]
