import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctpmaps.errors import InputError, OrderBound
from ctpmaps.perm import Permutation, generate, orbit_of_point, orbit_of_set, stabilizers

import oracles


def perms(n_min=1, n_max=8):
    return st.integers(n_min, n_max).flatmap(lambda n: st.permutations(range(n)).map(Permutation))


def perm_pairs(n_max=8):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))
    ).map(lambda t: (Permutation(t[0]), Permutation(t[1])))


@given(perm_pairs())
def test_composition_applies_right_factor_first(pq):
    p, q = pq
    assert all((p * q)(i) == p(q(i)) for i in range(p.degree))


@given(perm_pairs())
def test_inverse_of_product(pq):
    p, q = pq
    assert (p * q).inverse() == q.inverse() * p.inverse()


@given(perms())
def test_cycle_notation_round_trip(p):
    assert Permutation.parse(p.cycle_notation(), p.degree) == p


@given(perms())
def test_order_is_least_power_giving_identity(p):
    k = p.order()
    assert (p**k).is_identity()
    assert all(not (p**j).is_identity() for j in range(1, k))


@given(perms())
def test_cycle_type_sums_to_degree(p):
    assert sum(p.cycle_type()) == p.degree


def test_parse_is_one_based():
    p = Permutation.parse("(1 2 3)", 3)
    assert p.images == (1, 2, 0)
    assert p.cycle_notation() == "(1 2 3)"


def test_rejects_non_bijection():
    with pytest.raises(InputError):
        Permutation([0, 0, 1])


def test_s3_order_and_norms():
    G = generate({"a": Permutation.parse("(1 2)", 3), "b": Permutation.parse("(2 3)", 3)})
    assert G.order == 6
    assert G.is_transitive()
    ref = oracles.word_norms([(1, 0, 2), (0, 2, 1)])
    assert {p.images: n for p, n in G.norm.items()} == ref


def test_power_of_single_generator_costs_one():
    c = Permutation.parse("(1 2 3 4 5)", 5)
    G = generate({"c": c})
    assert all(G.norm[c**k] == 1 for k in range(1, 5))


def test_order_bound():
    gens = {"a": Permutation.parse("(1 2)", 6), "b": Permutation.parse("(1 2 3 4 5 6)", 6)}
    with pytest.raises(OrderBound):
        generate(gens, bound=100)


@given(perm_pairs(6), st.data())
def test_orbit_stabilizer(pq, data):
    p, q = pq
    G = generate({"p": p, "q": q})
    ref = oracles.word_norms([p.images, q.images])
    assert G.order == len(ref)
    assert {t.images: n for t, n in G.norm.items()} == ref
    n = p.degree
    E = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    orbit = orbit_of_set(G, E)
    stab = stabilizers(G, E)
    assert len(orbit) * len(stab.setwise) == G.order
    a = min(E)
    assert len(orbit_of_point(G, a)) * len(stab.per_point[a]) == G.order
    assert stab.pointwise <= stab.setwise


def test_orbit_of_set_rejects_bad_labels():
    G = generate({"a": Permutation.parse("(1 2)", 3)})
    with pytest.raises(InputError):
        orbit_of_set(G, [5])
    with pytest.raises(InputError):
        orbit_of_set(G, [])
