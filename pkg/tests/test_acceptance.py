"""Acceptance criteria, one test each.

Every test appends a ``criterion N: PASS|FAIL ...`` line that the terminal
summary prints.  Running this file directly prints the same lines.
"""

import cmath
import math

import numpy as np
from numpy.polynomial import chebyshev

from ctpmaps.algebra import (
    INF,
    Polynomial,
    RationalMap,
    compose,
    critical_portrait,
    fiber_solve,
    is_inf,
    mixing_map,
    mixing_middle_factor,
    power_map,
    saenz_map,
)
from ctpmaps.conditions import (
    McMullen,
    closed_form_check,
    sample_annulus,
    cross_ratio,
    mcmullen_verdict,
    power_factor,
    stab_report,
    verify_factorization,
)
from ctpmaps.ctp import Method, Verdict, classify, ctp_decide, monodromy, recount_witness, with_regular_set
from ctpmaps.dessin import build_tree, chase, marked_center, monodromy_group
from ctpmaps.documents import load_bundled
from ctpmaps.errors import ChaseStalled, NoCenter
from ctpmaps.lifting import PathSpec, loop_monodromy, standard_generators

import oracles

SQRT3 = math.sqrt(3)


def record(n, fn):
    ok, detail = fn()
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    try:
        import conftest

        conftest.ACCEPTANCE_LINES.append(line)
    except ImportError:
        pass
    print(line)
    return ok, detail


def marked(name):
    doc = load_bundled(name)
    return classify(doc.rational_map(), doc.marked_points)


def _has(points, z, k, radius=1e-8):
    return any(kk == k and (is_inf(p) if is_inf(z) else not is_inf(p) and abs(p - z) < radius) for p, kk in points)


# ---------------------------------------------------------------------------
# 1. critical portraits


def criterion_1():
    S = critical_portrait(saenz_map())
    s_ok = len(S.points) == 3 and all(_has(S.points, z, 3) for z in (0, 1, INF))
    finite = sorted((v for v in S.values if not is_inf(v)), key=abs)
    s_ok = s_ok and len(S.values) == 3 and len(finite) == 2
    s_ok = s_ok and abs(finite[0]) < 1e-8 and abs(finite[1] - 1) < 1e-8

    R = critical_portrait(mixing_map())
    expected = [(0, 6), (INF, 6), (1, 3), (-1, 3), (1j * SQRT3, 3), (-1j * SQRT3, 3)]
    quartic = [complex(r) for r in np.roots([1, 0, 0, 0, 3])]
    expected += [(z, 2) for z in quartic]
    r_ok = len(R.points) == len(expected) and all(_has(R.points, z, k) for z, k in expected)

    ref = oracles.critical_points(mixing_map().num.coeffs, mixing_map().den.coeffs)
    oracle_ok = all(_has(R.points, z, k, 1e-6) for z, k in ref if not cmath.isinf(z))
    return s_ok and r_ok and oracle_ok, f"S portrait {s_ok}, R portrait {r_ok}, companion oracle {oracle_ok}"


# ---------------------------------------------------------------------------
# 2. monodromy of R at b = i


def _reference_loops(R, fib):
    """Permutations of the circles the construction of R uses, by the library and by sampling."""
    out = {}
    for name, (center, radius) in {"inf": (-1j, 2.0), "0": (1j / 3, 2 / 3)}.items():
        ours = loop_monodromy(R, PathSpec.circular(center, radius, math.pi / 2), fib)
        samples = oracles.circle_samples(center, radius, math.pi / 2, 6000)
        ends = oracles.lift_by_sampling(R.num.coeffs, R.den.coeffs, samples, fib.points)
        out[name] = (ours.images, oracles.permutation_from_endpoints(fib.points, ends))
    return out


def criterion_2():
    R = mixing_map()
    gens = standard_generators(R, 1j)
    rho = {("inf" if is_inf(v) else round(v.real)): p for v, p in gens.rho.items()}
    types = {k: oracles.cycle_type(p.images) for k, p in rho.items()}
    orders = {k: p.order() for k, p in rho.items()}
    ok = (
        types["inf"] == (6, 6)
        and orders["inf"] == 6
        and types[0] == (3, 3, 3, 3)
        and orders[0] == 3
        and types[1] == (2, 2, 2, 2, 1, 1, 1, 1)
    )
    loops = _reference_loops(R, gens.fiber)
    agree = all(a == b for a, b in loops.values())
    loop_types = oracles.cycle_type(loops["inf"][1]) == (6, 6) and oracles.cycle_type(loops["0"][1]) == (3, 3, 3, 3)
    return ok and agree and loop_types, f"types {types}; sampled circles agree {agree}"


# ---------------------------------------------------------------------------
# 3. orbit table of R


def _set_orbit(gens, start):
    seen = {start}
    queue = [start]
    while queue:
        s = queue.pop()
        for g in gens:
            t = frozenset(g[i] for i in s)
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def _orbit_table(rho0, rho_inf, E):
    orbit = _set_orbit([rho0, rho_inf], E)
    moved = {s: frozenset(rho0[i] for i in s) for s in orbit}
    fixed = sum(1 for s in orbit if moved[s] == s)
    cycles = []
    left = set(orbit)
    while left:
        s = left.pop()
        n, t = 1, moved[s]
        while t != s:
            left.discard(t)
            t = moved[t]
            n += 1
        cycles.append(n)
    membership = sorted(sum(1 for s in orbit if i in s) for i in E)
    return len(orbit), fixed, sorted(cycles, reverse=True), membership


def criterion_3():
    m = marked("r")
    fib = fiber_solve(m.f, m.base)
    E = m.regular_labels(fib)
    loops = _reference_loops(m.f, fib)
    sampled = _orbit_table(loops["0"][1], loops["inf"][1], E)

    gens, G = monodromy(m)
    lib_orbit = len(_set_orbit([g.images for g in G.generators.values()], E))
    ok = sampled == (8, 2, [3, 3, 1, 1], [2, 2, 2]) and lib_orbit == 8
    return ok, f"sampled loops: orbit {sampled[0]}, rho0 fixes {sampled[1]}, cycles {sampled[2]}, memberships {sampled[3]}; library orbit {lib_orbit}"


# ---------------------------------------------------------------------------
# 4. CTP verdicts


def criterion_4():
    results = {}
    r = marked("r")
    results["R"] = ctp_decide(r).verdict is Verdict.CTP

    S = saenz_map()
    rng = np.random.default_rng(2024)
    s_ok = []
    while len(s_ok) < 5:
        b = complex(*rng.uniform(-2, 2, 2))
        if min(abs(b), abs(b - 1)) < 0.1:
            continue
        s_ok.append(ctp_decide(classify(S, fiber_solve(S, b).points)).verdict is Verdict.CTP)
    results["S x5"] = all(s_ok)

    n = marked("notctp")
    rep = ctp_decide(n)
    results["cubic"] = rep.verdict is Verdict.NOT_CTP and recount_witness(n, rep) == 2 and rep.witness.count == 2

    z3 = marked("z3")
    rep = ctp_decide(z3)
    results["z^3"] = rep.verdict is Verdict.NOT_CTP and rep.method is Method.FAST_PATH

    invariant = True
    for name in ("r", "notctp"):
        m = marked(name)
        base = ctp_decide(m).verdict
        for _ in range(3):
            invariant &= ctp_decide(m, relabel=rng.permutation(m.f.degree).tolist()).verdict is base
    gens, G = monodromy(r)
    fib = gens.fiber
    for F in _set_orbit([g.images for g in G.generators.values()], r.regular_labels(fib)):
        invariant &= ctp_decide(with_regular_set(r, [fib.points[i] for i in sorted(F)])).verdict is Verdict.CTP
    results["invariance"] = invariant
    return all(results.values()), " ".join(f"{k}={v}" for k, v in results.items())


# ---------------------------------------------------------------------------
# 5. stabilizer lemmas


def criterion_5():
    S = saenz_map()
    s = stab_report(classify(S, fiber_solve(S, 0.3 + 0.4j).points))
    s_ok = s.nonempty_difference and s.setwise_containment and s.k_star == 3
    r = stab_report(marked("r"))
    r_ok = r.intersection_identity and r.k_star == 2
    mc = marked("mcmullen")
    c = stab_report(mc)
    c_ok = c.pointwise_equal and mcmullen_verdict(mc)[0] is McMullen.SATISFIED_VIA_POWER_MAP
    return s_ok and r_ok and c_ok, f"S k*={s.k_star} {s_ok}; R k*={r.k_star} {r_ok}; g(z^3) pointwise_equal={c.pointwise_equal}"


# ---------------------------------------------------------------------------
# 6. factorization


def criterion_6():
    R = mixing_map()
    dist = verify_factorization(R, power_map(3), compose(mixing_middle_factor(), power_map(2)))
    rng = np.random.default_rng(6)
    recovered = 0
    for i in range(20):
        d = (2, 3, 4)[i % 3]
        g0 = RationalMap(rng.normal(size=3) + 1j * rng.normal(size=3))
        c = complex(*rng.uniform(-1, 1, 2))
        f = compose(g0, power_map(d, c))
        a = c + complex(*rng.uniform(0.3, 1.2, 2))
        orbit = [c + cmath.exp(2j * math.pi * k / d) * (a - c) for k in range(d)]
        pf = power_factor(f, orbit)
        if pf is not None and pf.degree == d and abs(pf.center - c) < 1e-8:
            recovered += verify_factorization(f, pf.outer, pf.inner()) < 1e-10
    m = marked("r")
    none_for_r = power_factor(m.f, m.E) is None
    ok = dist < 1e-12 and recovered == 20 and none_for_r
    return ok, f"three-factor distance {dist:.1e}; recovered {recovered}/20; R has no power factor {none_for_r}"


# ---------------------------------------------------------------------------
# 7. closed-form fiber of R


def criterion_7():
    ks = sample_annulus(20)
    worst = max(closed_form_check(k).residual for k in ks)
    target = cmath.exp(1j * math.pi / 3)
    errs = [abs(cross_ratio(*closed_form_check(k).points, INF) - target) for k in (0.01, 0.01j)]
    ok = worst < 1e-9 and max(errs) < 1e-3
    return ok, f"max residual {worst:.1e} over 20 k; cross-ratio limit error {max(errs):.1e}"


# ---------------------------------------------------------------------------
# 8. dessins


def _belyi_trees(max_degree=8):
    maps = []
    for a in range(1, max_degree):
        for b in range(1, max_degree + 1 - a):
            if a + b >= 3:
                p = Polynomial([0] * a + [1]) * Polynomial([-1, 1]) ** b
                maps.append(RationalMap(p.coeffs, name=f"z^{a}(z-1)^{b}"))
    for n in range(3, max_degree + 1):
        maps.append(RationalMap(chebyshev.cheb2poly([0] * n + [1]), name=f"T{n}"))
    for n in range(2, max_degree // 2 + 1):
        t = Polynomial(chebyshev.cheb2poly([0] * n + [1]))
        maps.append(RationalMap((t * t).coeffs, name=f"T{n}^2"))
    return maps


def criterion_8():
    cubic = build_tree(RationalMap([0, 0, 3, -2]))
    positions = sorted(v.position.real for v in cubic.vertices)
    path_ok = (
        len(cubic.edges) == 3
        and all(abs(p - q) < 1e-8 for p, q in zip(positions, [-0.5, 0, 1, 1.5]))
        and all(abs(v.position.imag) < 1e-8 for v in cubic.vertices)
    )

    rng = np.random.default_rng(8)
    maps = _belyi_trees()
    built = {}
    held = stalled = 0
    confirmed = True
    failures = []
    for _ in range(100):
        f = maps[int(rng.integers(len(maps)))]
        if f.name not in built:
            T = build_tree(f)
            G = monodromy_group(T)
            norms = oracles.word_norms([T.generators["rho0"].images, T.generators["rho1"].images])
            built[f.name] = (T, G, [(e.v0, e.v1) for e in T.edges], norms)
        T, G, edges, norms = built[f.name]
        e, e2 = (int(x) for x in rng.choice(T.degree, 2, replace=False))
        try:
            tau = chase(T, G, e, e2)
        except ChaseStalled:
            stalled += 1
            # a stall must mean that no group element satisfies the conditions
            confirmed &= not any(oracles.chase_holds(edges, norms, t.images, e, e2) for t in G.elements)
            failures.append(f"{f.name}:{e + 1},{e2 + 1}")
            continue
        if oracles.chase_holds(edges, norms, tau.images, e, e2):
            held += 1
        else:
            failures.append(f"{f.name}:{e + 1},{e2 + 1}")

    T = build_tree(RationalMap([0, 0, 0, 1, 0, 0, 1]))
    G = monodromy_group(T)
    c = marked_center(T, G, T.edges_at(0j))
    center_ok = abs(T.vertices[c].position) < 1e-8
    G3 = monodromy_group(cubic)
    ends = [cubic.edges_at(-0.5 + 0j)[0], cubic.edges_at(1.5 + 0j)[0]]
    try:
        marked_center(cubic, G3, ends)
        negative_ok = False
    except NoCenter:
        negative_ok = True

    ok = path_ok and held == 100 and center_ok and negative_ok
    shown = ", ".join(failures[:5]) + (" ..." if len(failures) > 5 else "")
    return ok, (
        f"path tree {path_ok}; chase conditions held on {held}/100 pairs "
        f"({stalled} where exhaustive search finds no valid element, confirmed {confirmed}: {shown}); "
        f"center {center_ok}; NoCenter {negative_ok}"
    )


# ---------------------------------------------------------------------------
# 9. numerics hygiene


def criterion_9():
    R = mixing_map()
    values = critical_portrait(R).values
    rng = np.random.default_rng(9)
    round_trips = 0
    while round_trips < 100:
        center = complex(*rng.uniform(-2, 2, 2))
        radius = float(rng.uniform(0.1, 1.5))
        b = center + radius
        if any(not is_inf(v) and (abs(abs(v - center) - radius) < 0.05 or abs(b - v) < 0.05) for v in values):
            continue
        loop = PathSpec.circular(center, radius, 0.0)
        fib = fiber_solve(R, b)
        there = loop_monodromy(R, loop, fib)
        back = loop_monodromy(R, loop.reversed(), fib)
        if not (back * there).is_identity():
            return False, f"round trip {round_trips} not the identity"
        round_trips += 1

    cycles_ok = True
    for d in range(2, 8):
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        f = RationalMap(c)
        finite = [abs(v) for v in critical_portrait(f).values if not is_inf(v)]
        gens = standard_generators(f, 3 * max(1, *finite) + 0.5j)
        cycles_ok &= oracles.cycle_type(gens.finite_product().images) == (d,)

    rh = 0
    for _ in range(200):
        d = int(rng.integers(2, 9))
        dq = int(rng.integers(0, d + 1))
        f = RationalMap(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1), rng.normal(size=dq + 1) + 1j * rng.normal(size=dq + 1))
        rh += sum(k - 1 for _, k in critical_portrait(f).points) == 2 * f.degree - 2
    ok = cycles_ok and rh == 200
    return ok, f"100 round trips identity; polynomial products full cycles {cycles_ok}; Riemann-Hurwitz {rh}/200"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


def test_criterion_1_critical_portraits():
    assert record(1, criterion_1)[0]


def test_criterion_2_monodromy_of_mixing_map():
    assert record(2, criterion_2)[0]


def test_criterion_3_orbit_table():
    assert record(3, criterion_3)[0]


def test_criterion_4_ctp_verdicts():
    assert record(4, criterion_4)[0]


def test_criterion_5_stabilizers():
    assert record(5, criterion_5)[0]


def test_criterion_6_factorization():
    assert record(6, criterion_6)[0]


def test_criterion_7_closed_form_fiber():
    assert record(7, criterion_7)[0]


def test_criterion_8_dessins():
    assert record(8, criterion_8)[0]


def test_criterion_9_numerics():
    assert record(9, criterion_9)[0]


if __name__ == "__main__":
    results = [record(n, fn)[0] for n, fn in enumerate(CRITERIA, start=1)]
    raise SystemExit(0 if all(results) else 1)
