"""Level-set arithmetic, gh-difference, metric and ordering tests."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzyfrac.fuzzy_core import (
    APPROX_EQUAL,
    FuzzyNumber,
    GREATER_EQUAL,
    LESS_EQUAL,
    NONCOMPARABLE,
    RGrid,
    STRICTLY_GREATER,
    STRICTLY_LESS,
    TriangularFuzzyNumber,
    add,
    compare,
    gh_difference,
    hausdorff,
    product,
    scale,
    validate_stacking,
)

RG = RGrid(5)


def tri(a, b, c):
    return FuzzyNumber.triangular(a, b, c, rgrid=RG)


# strategy: triangular numbers with modest support, shared grid
def _triangles():
    return st.tuples(
        st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)
    ).map(lambda t: tri(*sorted(t)))


def test_rgrid_default_and_explicit():
    rg = RGrid()
    assert rg.n == 11
    assert rg.values[0] == 0.0 and rg.values[-1] == 1.0
    rg2 = RGrid([0.0, 0.25, 1.0])
    assert rg2.n == 3
    assert len(rg2) == 3
    assert rg2.index_of(0.25) == 1


def test_rgrid_rejects_bad_levels():
    with pytest.raises(ValueError):
        RGrid([0.0, 0.5, 0.4, 1.0])  # not ascending
    with pytest.raises(ValueError):
        RGrid([0.1, 0.5, 1.0])  # must start at 0
    with pytest.raises(ValueError):
        RGrid([0.0, 0.5])  # must end at 1
    with pytest.raises(ValueError):
        RGrid([1.0])
    with pytest.raises(ValueError):
        RGrid([0.0, 0.3, 1.0]).index_of(0.5)


def test_triangular_expansion():
    u = tri(1.0, 2.0, 3.0)
    r = RG.values
    assert np.array_equal(u.lower, 1.0 + r)
    assert np.array_equal(u.upper, 3.0 - r)
    lo, up = u.level(0.5)
    assert lo == 1.5 and up == 2.5
    with pytest.raises(ValueError):
        TriangularFuzzyNumber(3.0, 2.0, 1.0)


def test_fuzzy_number_validation():
    with pytest.raises(TypeError):
        FuzzyNumber([0, 1], [0, 0], [1, 1])
    with pytest.raises(ValueError):
        FuzzyNumber(RG, np.zeros(3), np.ones(3))  # wrong length
    with pytest.raises(ValueError):
        FuzzyNumber(RG, np.ones(5), np.zeros(5))  # lower above upper
    # check=False admits the same data
    FuzzyNumber(RG, np.ones(5), np.zeros(5), check=False)
    with pytest.raises(ValueError):
        FuzzyNumber(RG, np.full(5, np.nan), np.ones(5))
    with pytest.raises(ValueError):
        tri(0, 1, 2).level(1.5)


def test_crisp_levels():
    c = FuzzyNumber.crisp(2.5, rgrid=RG)
    assert np.all(c.lower == 2.5) and np.all(c.upper == 2.5)


def test_add_worked_values():
    u = tri(1, 2, 3)
    z = FuzzyNumber.crisp(0.0, rgrid=RG)
    assert hausdorff(add(u, z), u) == 0.0
    s = add(u, u)
    assert np.array_equal(s.lower, 2.0 * (1.0 + RG.values))
    assert np.array_equal(s.upper, 2.0 * (3.0 - RG.values))
    t = add(tri(-1, 0, 1), tri(0, 1, 2))
    assert t.level(0.0) == (-1.0, 3.0)
    assert t.level(1.0) == (1.0, 1.0)


def test_add_requires_same_grid():
    u = tri(0, 1, 2)
    v = FuzzyNumber.triangular(0, 1, 2, rgrid=RGrid(3))
    with pytest.raises(ValueError):
        add(u, v)


def test_scale_worked_values():
    u = tri(1, 2, 3)
    assert hausdorff(scale(1.0, u), u) == 0.0
    z = scale(0.0, u)
    assert np.all(z.lower == 0.0) and np.all(z.upper == 0.0)
    m = scale(-1.0, u)
    r = RG.values
    assert np.array_equal(m.lower, -(3.0 - r))
    assert np.array_equal(m.upper, -(1.0 + r))


def test_product_worked_values():
    r = RG.values
    u = tri(1, 2, 3)  # levels [1+r, 3-r], positive
    p = product(u, u)
    assert np.array_equal(p.lower, (1.0 + r) ** 2)
    assert np.array_equal(p.upper, (3.0 - r) ** 2)
    w = tri(-1, 0, 1)  # straddles zero
    q = product(w, w)
    assert np.array_equal(q.lower, -((1.0 - r) ** 2))
    assert np.array_equal(q.upper, (1.0 - r) ** 2)


def test_gh_difference_worked_values():
    d, rep = gh_difference(tri(1, 2, 3), tri(0, 1, 2))
    assert rep.exists and rep.case == 1
    assert np.all(d.lower == 1.0) and np.all(d.upper == 1.0)
    # subtracting a wider number flips to case 2
    d2, rep2 = gh_difference(tri(-1, 0, 1), tri(-2, 0, 2))
    assert rep2.exists and rep2.case == 2
    assert np.array_equal(d2.lower, -(1.0 - RG.values))
    assert np.array_equal(d2.upper, 1.0 - RG.values)


def test_gh_difference_nonexistent_case():
    # widths cross between levels, so neither case holds
    rg = RGrid([0.0, 1.0])
    u = FuzzyNumber(rg, [0.0, 0.75], [2.0, 1.25])
    v = FuzzyNumber(rg, [0.0, 0.0], [1.0, 1.0])
    cand, rep = gh_difference(u, v)
    assert rep.case is None and not rep.exists
    # the candidate is still the levelwise [min, max] envelope
    assert np.array_equal(cand.lower, [0.0, 0.25])
    assert np.array_equal(cand.upper, [1.0, 0.75])


def test_gh_difference_case_valid_but_stacking_fails():
    rg = RGrid([0.0, 0.5, 1.0])
    u = FuzzyNumber(rg, [0.0, 1.0, 0.0], [5.0, 5.0, 5.0])
    v = FuzzyNumber.crisp(0.0, rgrid=rg)
    _, rep = gh_difference(u, v)
    assert rep.case == 1
    assert not rep.exists
    assert "i" in rep.stacking.failed


def test_hausdorff_worked_values():
    u = tri(1, 2, 3)
    assert hausdorff(u, u) == 0.0
    assert hausdorff(u, tri(2, 3, 4)) == 1.0
    assert hausdorff(u, tri(2, 3, 4)) == hausdorff(tri(2, 3, 4), u)


def test_compare_labels():
    u = tri(1, 2, 3)
    assert compare(u, tri(2, 3, 4)) == STRICTLY_LESS
    assert compare(tri(2, 3, 4), u) == STRICTLY_GREATER
    assert compare(u, u) == APPROX_EQUAL
    # dominated but lower endpoints coincide, so never strict
    assert compare(tri(0, 1, 2), tri(0, 1, 3)) == LESS_EQUAL
    assert compare(tri(0, 1, 3), tri(0, 1, 2)) == GREATER_EQUAL
    assert compare(tri(0, 1, 2), FuzzyNumber.crisp(1.0, rgrid=RG)) == NONCOMPARABLE


def test_validate_stacking_reports():
    ok = validate_stacking(tri(0, 1, 2))
    assert ok.valid and ok.failed == ()
    assert ok.unverified == ("iv", "v")
    bad_i = validate_stacking([0.0, 1.0, 0.5], [2.0, 2.0, 2.0])
    assert not bad_i.valid and bad_i.failed == ("i",)
    bad_ii = validate_stacking([0.0, 0.0, 0.0], [2.0, 2.5, 2.0])
    assert bad_ii.failed == ("ii",)
    bad_iii = validate_stacking([0.0, 1.0, 3.0], [4.0, 3.5, 2.0])
    assert bad_iii.failed == ("iii",)
    with pytest.raises(ValueError):
        validate_stacking([0.0], [1.0])
    # tolerance forgives tiny dips
    almost = validate_stacking([0.0, 1.0, 1.0 - 1e-15], [2.0, 2.0, 2.0], tol=1e-12)
    assert almost.valid


@settings(derandomize=True, max_examples=200)
@given(_triangles(), _triangles())
def test_add_then_gh_difference_recovers(u, z):
    s = add(u, z)
    d, rep = gh_difference(s, u)
    assert rep.exists
    assert hausdorff(d, z) <= 1e-12


@settings(derandomize=True, max_examples=200)
@given(_triangles(), _triangles(), _triangles())
def test_hausdorff_triangle_inequality(u, v, w):
    assert hausdorff(u, w) <= hausdorff(u, v) + hausdorff(v, w) + 1e-12


@settings(derandomize=True, max_examples=200)
@given(_triangles(), _triangles())
def test_product_commutes(u, v):
    p, q = product(u, v), product(v, u)
    assert np.array_equal(p.lower, q.lower)
    assert np.array_equal(p.upper, q.upper)


@settings(derandomize=True, max_examples=200)
@given(_triangles(), _triangles(), st.floats(-4, 4))
def test_arithmetic_preserves_stacking(u, v, lam):
    assert validate_stacking(add(u, v), tol=1e-12).valid
    assert validate_stacking(scale(lam, u), tol=1e-12).valid
    assert validate_stacking(product(u, v), tol=1e-9).valid


@settings(derandomize=True, max_examples=200)
@given(_triangles(), st.floats(-4, 4), st.floats(-4, 4))
def test_scale_composition(u, a, b):
    left = scale(a, scale(b, u))
    right = scale(a * b, u)
    assert hausdorff(left, right) <= 1e-12


@settings(derandomize=True, max_examples=200)
@given(_triangles())
def test_gh_self_difference_is_zero(u):
    d, rep = gh_difference(u, u)
    assert rep.exists
    assert np.all(d.lower == 0.0) and np.all(d.upper == 0.0)


_MIRROR = {
    STRICTLY_LESS: STRICTLY_GREATER,
    LESS_EQUAL: GREATER_EQUAL,
    APPROX_EQUAL: APPROX_EQUAL,
    GREATER_EQUAL: LESS_EQUAL,
    STRICTLY_GREATER: STRICTLY_LESS,
    NONCOMPARABLE: NONCOMPARABLE,
}


@settings(derandomize=True, max_examples=200)
@given(_triangles(), _triangles())
def test_compare_is_antisymmetric(u, v):
    assert compare(v, u) == _MIRROR[compare(u, v)]
