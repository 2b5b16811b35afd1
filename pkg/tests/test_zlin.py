import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gpdcover.zlin import (AbelianMap, FPAbelianGroup, IntMatrix, check_exactness, determinant,
                           direct_sum, hnf, invariants, lattice_contains, lattice_coordinates,
                           left_kernel, smith_normal_form)

from oracles import cokernel_by_minors, exactness_by_enumeration, invariant_factors_by_minors
from properties import matrices, unimodular


def M(rows, cols=None):
    return IntMatrix.from_rows(rows, cols)


def diag_of(D):
    return [D[i, i] for i in range(min(D.rows, D.cols))]


@pytest.mark.parametrize("rows,expected", [
    ([[0]], [[0]]),
    ([[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    ([[2, 4], [6, 8]], [[2, 0], [0, 4]]),
    ([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], [[2, 0, 0], [0, 6, 0], [0, 0, 12]]),
])
def test_smith_examples(rows, expected):
    m = M(rows)
    U, D, V = smith_normal_form(m)
    assert D.to_rows() == expected
    assert (U @ m @ V).to_rows() == expected
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1


def test_smith_examples_agree_with_minors_oracle():
    # the frozen diagonals above, recomputed from gcds of minors
    assert invariant_factors_by_minors([[2, 4], [6, 8]]) == [2, 4]
    assert invariant_factors_by_minors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]


def test_smith_is_deterministic():
    m = M([[3, 5, 7], [2, 4, 6], [9, 1, 0]])
    assert smith_normal_form(m) == smith_normal_form(M(m.to_rows()))


def test_empty_and_rectangular_shapes():
    U, D, V = smith_normal_form(IntMatrix.zeros(0, 3))
    assert (D.rows, D.cols, U.rows, V.rows) == (0, 3, 0, 3)
    U, D, V = smith_normal_form(M([[4, 6, 10]]))
    assert D.to_rows() == [[2, 0, 0]]


def test_big_entries_stay_exact():
    big = 10 ** 40
    m = M([[big, big + 1], [big - 1, big]])
    U, D, V = smith_normal_form(m)
    assert diag_of(D) == [1, 1]
    assert determinant(m) == 1


@pytest.mark.parametrize("n,rels,expected", [
    (1, [[2]], ((2,), 0)),
    (3, [], ((), 3)),
    (2, [[2, 4], [6, 8]], ((2, 4), 0)),
    (3, [[1, 1, 0]], ((), 2)),
    (2, [[0, 0]], ((), 2)),
])
def test_invariants_examples(n, rels, expected):
    assert invariants(FPAbelianGroup.from_relations(n, rels)) == expected


@settings(max_examples=200)
@given(matrices(4, 4, 9))
def test_invariants_match_minors_oracle(m):
    assert FPAbelianGroup(m.cols, m).invariants() == cokernel_by_minors(m.to_rows(), m.cols)


@settings(max_examples=200)
@given(matrices(3, 3, 6), matrices(3, 3, 6))
def test_direct_sum_is_concatenation(a, b):
    A, B = FPAbelianGroup(a.cols, a), FPAbelianGroup(b.cols, b)
    rows = [r + [0] * b.cols for r in a.to_rows()] + [[0] * a.cols + r for r in b.to_rows()]
    expected = cokernel_by_minors(rows, a.cols + b.cols)
    assert direct_sum(A, B).invariants() == expected


def test_json_round_trip_uses_decimal_strings():
    m = M([[1, -2], [10 ** 30, 0]])
    data = m.to_json()
    assert data == [["1", "-2"], [str(10 ** 30), "0"]]
    assert IntMatrix.from_json(json.loads(json.dumps(data))) == m
    with pytest.raises(ValueError):
        IntMatrix.from_json([[1.5]])
    with pytest.raises(ValueError):
        IntMatrix.from_rows([[1, 2], [3]])


def test_hnf_kernel_and_membership():
    rows = [[2, 4], [6, 8]]
    basis = hnf(rows, 2)
    assert lattice_contains(basis, [0, 4])
    assert not lattice_contains(basis, [1, 0])
    assert lattice_coordinates(basis, [1, 0]) is None
    k = left_kernel([[1, 2], [2, 4], [0, 1]], 2)
    assert len(k) == 1
    assert M([list(k[0])], 3) @ M([[1, 2], [2, 4], [0, 1]]) == IntMatrix.zeros(1, 2)


def test_well_definedness_is_checked():
    Z2 = FPAbelianGroup.cyclic(2)
    Z = FPAbelianGroup.free(1)
    with pytest.raises(ValueError):
        AbelianMap.from_rows(Z2, Z, [[1]])
    AbelianMap.from_rows(Z, Z2, [[1]])


def test_exactness_examples():
    Z, Z2 = FPAbelianGroup.free(1), FPAbelianGroup.free(2)
    f = AbelianMap.from_rows(Z, Z2, [[1, 0]])
    g = AbelianMap.from_rows(Z2, Z, [[0], [1]])
    v = check_exactness(f, g)
    assert v.exact and v.injective and v.surjective and v.short_exact

    C2 = FPAbelianGroup.cyclic(2)
    v = check_exactness(AbelianMap.from_rows(Z, Z, [[2]]), AbelianMap.from_rows(Z, C2, [[1]]))
    assert v.short_exact

    v = check_exactness(AbelianMap.from_rows(Z, Z, [[4]]), AbelianMap.from_rows(Z, C2, [[1]]))
    assert not v.exact and v.composite_zero
    assert any("not in the image" in w for w in v.witnesses)

    with pytest.raises(ValueError):
        check_exactness(f, AbelianMap.from_rows(Z, Z, [[1]]))


def _finite_group(orders):
    return FPAbelianGroup.from_invariants(orders, 0) if orders else FPAbelianGroup.free(0)


@st.composite
def finite_sequences(draw):
    def orders():
        return draw(st.lists(st.sampled_from([2, 3, 4, 6]), min_size=1, max_size=2))
    src, mid, tgt = orders(), orders(), orders()
    total = 1
    for d in src + mid + tgt:
        total *= d
    if total > 64 * 64:
        mid = mid[:1]
    f = [[draw(st.integers(0, d - 1)) for d in mid] for _ in src]
    g = [[draw(st.integers(0, d - 1)) for d in tgt] for _ in mid]
    return src, mid, tgt, f, g


def _well_defined(src, mid, f):
    # a generator of order d must go to an element killed by d
    return all((d * a) % e == 0 for d, row in zip(src, f) for a, e in zip(row, mid))


@settings(max_examples=200)
@given(finite_sequences())
def test_exactness_matches_enumeration(case):
    src, mid, tgt, f, g = case
    if not (_well_defined(src, mid, f) and _well_defined(mid, tgt, g)):
        return
    A, B, C = _finite_group(src), _finite_group(mid), _finite_group(tgt)
    fm = AbelianMap.from_rows(A, B, f)
    gm = AbelianMap.from_rows(B, C, g)
    v = check_exactness(fm, gm)
    exact, inj, sur = exactness_by_enumeration(src, mid, tgt, f, g)
    assert (v.exact, v.injective, v.surjective) == (exact, inj, sur)


@settings(max_examples=200)
@given(st.integers(0, 3), st.integers(0, 3), st.lists(st.sampled_from([2, 3, 4]), max_size=2),
       st.integers(0, 2 ** 32), st.sampled_from(["exact", "scaled_g", "scaled_f"]))
def test_exactness_on_constructed_free_sequences(a, b, torsion, seed, kind):
    """0 -> A -> A + B -> B -> 0 with free parts, scrambled by a unimodular change of basis."""
    rnd = random.Random(seed)
    ta = list(torsion)
    na, nb = a + len(ta), b
    n = na + nb
    P = unimodular(n, [(rnd.randrange(n), rnd.randrange(n), rnd.randint(-2, 2))
                       for _ in range(6)]) if n else IntMatrix.identity(0)
    Pinv_rows = _inverse(P)
    A = FPAbelianGroup.from_invariants(ta, a)
    B = FPAbelianGroup.free(nb)
    mid_rel = [[ta[i] if j == i else 0 for j in range(n)] for i in range(len(ta))]
    mid = FPAbelianGroup(n, M(mid_rel, n) @ P if mid_rel else IntMatrix.zeros(0, n))
    inc = M([[int(i == j) for j in range(n)] for i in range(na)], n) @ P
    proj = M(Pinv_rows, n) @ M([[int(j == i - na) for j in range(nb)] for i in range(n)], nb)
    scale_f = 2 if kind == "scaled_f" else 1
    scale_g = 2 if kind == "scaled_g" else 1
    f = AbelianMap(A, mid, M([[scale_f * x for x in r] for r in inc.to_rows()], n))
    g = AbelianMap(mid, B, M([[scale_g * x for x in r] for r in proj.to_rows()], nb))
    v = check_exactness(f, g)
    assert v.composite_zero
    if kind == "exact":
        assert v.short_exact
    elif kind == "scaled_g":
        # the kernel of 2g is still A since the free quotient has no 2-torsion
        assert v.exact and v.injective and v.surjective == (nb == 0)
    else:
        odd = all(d % 2 for d in ta)
        assert v.exact == (a == 0 and odd)
        assert v.injective == odd
        assert v.surjective


def _inverse(P):
    """Inverse of a unimodular matrix by Gauss-Jordan over the rationals (test-side only)."""
    n = P.rows
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(P.to_rows())]
    for c in range(n):
        p = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[p] = a[p], a[c]
        a[c] = [x / a[c][c] for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                q = a[r][c]
                a[r] = [x - q * y for x, y in zip(a[r], a[c])]
    out = [[int(x) for x in r[n:]] for r in a]
    assert all(x.denominator == 1 for r in a for x in r[n:])
    return out
