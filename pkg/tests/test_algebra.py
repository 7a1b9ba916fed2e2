import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ctpmaps.algebra import (
    INF,
    Polynomial,
    RationalMap,
    chordal,
    compose,
    critical_portrait,
    eval_sphere,
    fiber_solve,
    format_point,
    is_inf,
    mixing_map,
    mixing_middle_factor,
    normalize,
    poly_roots,
    power_map,
    same_map,
    saenz_map,
)
from ctpmaps.errors import InputError

import oracles

coord = st.floats(-2, 2, allow_nan=False)
complexes = st.builds(complex, coord, coord)


def _match(found, expected, radius):
    """Pair each expected (root, mult) with a found one."""
    left = list(found)
    for z, m in expected:
        hit = [p for p in left if abs(p[0] - z) < radius and p[1] == m]
        if not hit:
            return False
        left.remove(hit[0])
    return not left


@st.composite
def separated_roots(draw):
    roots = draw(st.lists(complexes, min_size=1, max_size=4))
    assume(all(abs(a - b) > 0.3 for i, a in enumerate(roots) for b in roots[i + 1 :]))
    mults = draw(st.lists(st.integers(1, 3), min_size=len(roots), max_size=len(roots)))
    return list(zip(roots, mults))


@given(separated_roots(), complexes.filter(lambda c: abs(c) > 0.1))
def test_poly_roots_recovers_multiplicities(spec, lead):
    p = Polynomial([lead])
    for z, m in spec:
        p = p * (Polynomial([-z, 1]) ** m)
    assert _match(poly_roots(p), spec, 1e-6)


def test_poly_roots_simple_residuals():
    rng = np.random.default_rng(1)
    for _ in range(50):
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        p = Polynomial(c)
        for z, m in poly_roots(p):
            assert m == 1
            assert abs(p(z)) < 1e-9 * float(np.sum(np.abs(c)) * max(1, abs(z)) ** 8)


def test_chordal_metric():
    # unit-sphere chord lengths: antipodes are 2 apart
    assert chordal(0, INF) == pytest.approx(2.0)
    assert chordal(INF, INF) == 0
    assert chordal(1, -1) == pytest.approx(2.0)
    assert chordal(1, 1j) == pytest.approx(math.sqrt(2))
    assert is_inf(INF) and not is_inf(1e300)


def test_format_point():
    assert format_point(INF) == "inf"
    assert format_point(complex(-0.0, 1.0)) == "0+1i"
    assert format_point(complex(0.5, -0.25)) == "0.5-0.25i"


@given(complexes)
def test_compose_matches_evaluation(z):
    g = RationalMap([1, 2, 0, 1], [3, 1])
    h = RationalMap([0, 1, 1], [1, 0, 2])
    gh = compose(g, h)
    w = h(z)
    assume(abs(w + 3) > 1e-3 and abs(1 + 2 * z * z) > 1e-3)
    assert abs(gh(z) - g(w)) <= 1e-8 * (1 + abs(g(w)))


def test_three_factor_composition_of_mixing_map():
    built = compose(power_map(3), compose(mixing_middle_factor(), power_map(2)))
    assert same_map(built, mixing_map(), 1e-12)


def test_eval_at_infinity():
    assert is_inf(eval_sphere(power_map(3), INF))
    assert eval_sphere(RationalMap([1, 0, 2], [0, 0, 1]), INF) == pytest.approx(2)
    assert is_inf(eval_sphere(saenz_map(), 0.5))


def test_normalize_makes_denominator_monic():
    f = normalize(RationalMap([2, 4], [0, 2]))
    assert f.den.leading == pytest.approx(1)
    assert f(3) == pytest.approx((2 + 12) / 6)


@pytest.mark.parametrize(
    "f",
    [saenz_map(), mixing_map(), RationalMap([0, 0, 3, -2]), RationalMap([1, -3, 0, 1], [2, 0, 1])],
    ids=["S", "R", "cubic", "rational"],
)
def test_critical_portrait_matches_companion_oracle(f):
    ours = critical_portrait(f).points
    ref = oracles.critical_points(f.num.coeffs, f.den.coeffs)
    finite_ours = [(z, k) for z, k in ours if not is_inf(z)]
    finite_ref = [(z, k) for z, k in ref if not cmath.isinf(z)]
    assert _match(finite_ours, finite_ref, 1e-6)
    assert any(is_inf(z) for z, _ in ours) == any(cmath.isinf(z) for z, _ in ref)


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_riemann_hurwitz(d, seed):
    rng = np.random.default_rng(seed)
    dq = int(rng.integers(0, d + 1))
    num = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
    den = rng.normal(size=dq + 1) + 1j * rng.normal(size=dq + 1)
    f = RationalMap(num, den)
    assume(f.degree == d)
    total = sum(k - 1 for _, k in critical_portrait(f).points)
    assert total == 2 * d - 2


@given(complexes)
def test_fiber_points_lie_over_base(w):
    f = mixing_map()
    fib = fiber_solve(f, w)
    assert sum(fib.multiplicities) == f.degree
    for z, m in zip(fib.points, fib.multiplicities):
        assert chordal(eval_sphere(f, z), w) < 1e-7


def test_fiber_over_critical_value_has_multiplicities():
    fib = fiber_solve(mixing_map(), 0)
    assert sorted(fib.multiplicities) == [3, 3, 3, 3]


def test_fiber_order_is_descending_real_then_imag():
    fib = fiber_solve(power_map(4), 1)
    keys = [(-z.real, -z.imag) for z in fib.points]
    rounded = [(round(a, 9), round(b, 9)) for a, b in keys]
    assert rounded == sorted(rounded)


def test_degree_one_fiber_rejected():
    with pytest.raises(InputError):
        fiber_solve(RationalMap([0, 1]), 1)


def test_power_map_centre():
    f = power_map(3, 1 + 1j)
    assert f(2 + 1j) == pytest.approx(1)
    assert math.isclose(abs(f(1 + 3j)), 8)
