import numpy as np
import pytest

from pclass import fplin, gmodule
from pclass.errors import InvalidModule, ZeroVector
from pclass.fplin import FpMatrix, FpVector
from pclass.gmodule import GModule, MultiplicityVector


def block_module(p, lengths, seed=None):
    profile = MultiplicityVector(p, {L: lengths.count(L) for L in set(lengths)})
    if seed is None:
        return GModule(p, gmodule.normal_form(p, profile))
    return gmodule.random_module(p, profile, seed)


def test_invalid_sigma_rejected():
    with pytest.raises(InvalidModule):
        GModule(3, FpMatrix(3, [[2, 0], [0, 1]]))  # 2^3 = 2 mod 3
    with pytest.raises(InvalidModule):
        GModule(2, FpMatrix(2, [[1, 1, 0], [0, 1, 0]]))


def test_socle_series_examples():
    assert gmodule.socle_series(GModule(3, FpMatrix.identity(3, 4))) == [4, 4, 4]
    assert gmodule.socle_series(block_module(3, [3])) == [1, 2, 3]
    assert gmodule.socle_series(block_module(3, [3, 3], seed=5)) == [2, 4, 6]


def test_norm_operator_examples():
    assert gmodule.norm_operator(GModule(2, FpMatrix.identity(2, 3))).is_zero()
    assert gmodule.norm_operator(GModule(3, FpMatrix.identity(3, 3))).is_zero()
    assert fplin.rank(gmodule.norm_operator(block_module(3, [3]))) == 1


def test_jordan_multiplicities_examples():
    assert gmodule.jordan_multiplicities(block_module(3, [3])) == MultiplicityVector(3, {3: 1})
    assert gmodule.jordan_multiplicities(GModule(5, FpMatrix.identity(5, 4))) == MultiplicityVector(5, {1: 4})
    got = gmodule.jordan_multiplicities(block_module(3, [1, 2, 2], seed=1))
    assert got.m == {1: 1, 2: 2, 3: 0}


def test_cyclic_submodule_lengths():
    M = block_module(3, [3, 2, 1])
    top_of_three = FpVector.unit(3, 6, 0)
    assert gmodule.cyclic_submodule(M, top_of_three).length == 3
    fixed = gmodule.fixed_submodule(M)[0]
    assert gmodule.cyclic_submodule(M, fixed).length == 1
    top_of_two = FpVector.unit(3, 6, 3)
    mixed = top_of_two + gmodule.fixed_submodule(M)[-1]
    assert gmodule.cyclic_submodule(M, mixed).length == 2
    with pytest.raises(ZeroVector):
        gmodule.cyclic_submodule(M, FpVector.zero(3, 6))


def test_normal_form_layout():
    # blocks are laid out longest first; sigma sends each block's generator
    # down its chain, ending at the fixed vector
    nf = gmodule.normal_form(3, MultiplicityVector(3, {3: 1, 1: 1}))
    assert nf.tolist() == [[1, 0, 0, 0], [1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]]


def test_decompose_identity_and_free():
    d = gmodule.decompose_jordan(GModule(2, FpMatrix.identity(2, 2)))
    assert d.lengths() == [1, 1]
    M = block_module(5, [5], seed=3)
    d = gmodule.decompose_jordan(M)
    (part,) = d.parts
    assert part.length == 5
    assert not M.apply_t(part.generator, 4).is_zero()


def test_verify_direct_sum_negative_controls():
    M = block_module(3, [2, 2, 1], seed=8)
    parts = list(gmodule.decompose_jordan(M).parts)
    assert gmodule.verify_direct_sum(M, parts)
    assert not gmodule.verify_direct_sum(M, parts + parts[:1])
    assert not gmodule.verify_direct_sum(M, parts[1:])


def test_fixed_submodule_dimension_counts_blocks():
    M = block_module(5, [5, 3, 3, 1], seed=2)
    assert len(gmodule.fixed_submodule(M)) == 4
    assert len(gmodule.fixed_submodule(GModule(3, FpMatrix.identity(3, 3)))) == 3


def test_random_module_small_profiles():
    assert gmodule.random_module(7, {1: 1}, seed=4).sigma == FpMatrix.identity(7, 1)
    M = gmodule.random_module(3, {3: 1}, seed=4)
    assert gmodule.jordan_multiplicities(M) == MultiplicityVector(3, {3: 1})


@pytest.mark.parametrize("p", [2, 3, 5])
def test_random_module_round_trip(p):
    rng = np.random.default_rng(p)
    for seed in range(100):
        profile = gmodule.random_profile(p, int(rng.integers(1, 12)), rng)
        M = gmodule.random_module(p, profile, seed)
        assert gmodule.jordan_multiplicities(M) == profile
        d = gmodule.decompose_jordan(M)
        assert gmodule.verify_direct_sum(M, d.parts)
        assert d.multiplicities(p) == profile


def test_norm_is_power_of_sigma_minus_one():
    for p in (2, 3, 5):
        M = block_module(p, [p, p - 1, 1], seed=p)
        assert gmodule.norm_operator(M) == fplin.mat_pow(M.nilpotent, p - 1)


def test_multiplicities_from_socle_layers():
    M = block_module(5, [5, 4, 4, 2, 1], seed=9)
    layers = gmodule.socle_series(M)
    sizes = [layers[0]] + [b - a for a, b in zip(layers, layers[1:])]
    assert sizes == sorted(sizes, reverse=True)
    counts = [sizes[i] - (sizes[i + 1] if i + 1 < len(sizes) else 0) for i in range(len(sizes))]
    assert counts == [gmodule.jordan_multiplicities(M)[i] for i in range(1, 6)]
