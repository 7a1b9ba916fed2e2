"""Reproduction suite for the two worked examples and the closed-form fiber.

Each case returns a list of named checks.  Comparisons are invariant under
relabeling of fibers: cycle types, orbit sizes and membership counts rather
than literal label tables.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .algebra import (
    INF,
    compose,
    coefficient_distance,
    critical_portrait,
    fiber_solve,
    mixing_map,
    mixing_middle_factor,
    power_map,
    same_point,
    saenz_map,
)
from .conditions import (
    McMullen,
    closed_form_check,
    sample_annulus,
    cross_ratio,
    mcmullen_verdict,
    power_factor,
    stab_report,
)
from .ctp import Verdict, classify, ctp_decide
from .documents import load_bundled
from .errors import CtpError
from .lifting import standard_generators
from .perm import generate, orbit_of_set
from .tolerance import DEFAULT, ToleranceProfile

CASES = ("s", "r", "appendix")
RESIDUAL_THRESHOLD = 1e-9


@dataclass(frozen=True)
class Check:
    case: str
    name: str
    passed: bool
    detail: str


def _run(case: str, name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    try:
        ok, detail = fn()
    except CtpError as exc:
        return Check(case, name, False, f"{type(exc).__name__}: {exc}")
    return Check(case, name, bool(ok), detail)


def _portrait_matches(f, expected: dict[complex, int], extra_simple: list[complex], tol) -> tuple[bool, str]:
    pts = critical_portrait(f, tol).points
    want = list(expected.items()) + [(z, 2) for z in extra_simple]
    unmatched = list(pts)
    for z, k in want:
        hit = [p for p in unmatched if p[1] == k and same_point(p[0], z, 1e-8)]
        if not hit:
            return False, f"missing critical point {z} of local degree {k}"
        unmatched.remove(hit[0])
    if unmatched:
        return False, f"unexpected critical points {unmatched}"
    return True, f"{len(pts)} critical points"


# ---------------------------------------------------------------------------
# S


def case_s(tol: ToleranceProfile = DEFAULT, orientation: str = "ccw") -> list[Check]:
    S = saenz_map()
    doc = load_bundled("s")
    m = classify(doc.rational_map(), doc.marked_points, tol)
    checks = [
        _run("s", "critical portrait", lambda: _portrait_matches(S, {0j: 3, 1 + 0j: 3, INF: 3}, [], tol)),
        _run(
            "s",
            "critical values {0, 1, inf}",
            lambda: (len(critical_portrait(S, tol).values) == 3, "3 values"),
        ),
    ]

    def verdict():
        rep = ctp_decide(m, orientation)
        return rep.verdict is Verdict.CTP, rep.verdict.value

    def stabs():
        st = stab_report(m, orientation)
        ok = st.nonempty_difference and st.setwise_containment and st.k_star == 3
        return ok, (
            f"nonempty_difference={st.nonempty_difference} "
            f"setwise_containment={st.setwise_containment} k*={st.k_star}"
        )

    def mcmullen():
        v, _ = mcmullen_verdict(m, orientation)
        return v is McMullen.NOT_SATISFIED, v.value

    checks += [
        _run("s", "CTP verdict", verdict),
        _run("s", "stabilizer predicates", stabs),
        _run("s", "McMullen definitive negative", mcmullen),
    ]
    return checks


# ---------------------------------------------------------------------------
# R


def case_r(tol: ToleranceProfile = DEFAULT, orientation: str = "ccw") -> list[Check]:
    R = mixing_map()
    doc = load_bundled("r")
    m = classify(doc.rational_map(), doc.marked_points, tol)
    r3 = math.sqrt(3)
    quartic = [r3**0.5 * complex(math.cos(a), math.sin(a)) for a in (math.pi / 4 + k * math.pi / 2 for k in range(4))]
    expected = {0j: 6, INF: 6, 1 + 0j: 3, -1 + 0j: 3, 1j * r3: 3, -1j * r3: 3}
    checks = [_run("r", "critical portrait", lambda: _portrait_matches(R, expected, quartic, tol))]

    b = 1j
    gens = standard_generators(R, b, tol, orientation)
    rho = {
        "rho_inf": gens.rho[INF],
        "rho_0": next(p for v, p in gens.rho.items() if same_point(v, 0j, 1e-8)),
        "rho_1": next(p for v, p in gens.rho.items() if same_point(v, 1 + 0j, 1e-8)),
    }
    wanted = {"rho_inf": ((6, 6), 6), "rho_0": ((3, 3, 3, 3), 3), "rho_1": ((2, 2, 2, 2, 1, 1, 1, 1), 2)}
    for key, (ctype, order) in wanted.items():
        p = rho[key]
        checks.append(
            _run(
                "r",
                f"{key} cycle type",
                lambda p=p, ctype=ctype, order=order: (
                    p.cycle_type() == ctype and p.order() == order,
                    f"{p.cycle_type()} order {p.order()}",
                ),
            )
        )

    fiber = fiber_solve(R, b, tol)
    E = m.regular_labels(fiber)
    G = generate({"rho_0": rho["rho_0"], "rho_1": rho["rho_1"]}, tol.group_order_bound)
    orbit = orbit_of_set(G, E)

    def orbit_size():
        return len(orbit) == 8, f"{len(orbit)} sets"

    def rho0_action():
        fixed = sum(1 for F in orbit if rho["rho_0"].apply_set(F) == F)
        index = {F: i for i, F in enumerate(orbit)}
        seen, cycles = set(), []
        for F in orbit:
            if F in seen:
                continue
            n, cur = 0, F
            while True:
                seen.add(cur)
                cur = rho["rho_0"].apply_set(cur)
                n += 1
                if cur == F:
                    break
            cycles.append(n)
        shape = sorted(cycles, reverse=True)
        return fixed == 2 and shape == [3, 3, 1, 1], f"{fixed} fixed, cycles {shape} over {len(index)} sets"

    def membership():
        counts = Counter(a for F in orbit for a in F)
        per_e = [counts[a] for a in sorted(E)]
        return all(c == 2 for c in per_e), f"memberships {per_e}"

    def verdict():
        rep = ctp_decide(m, orientation)
        return rep.verdict is Verdict.CTP and rep.orbit_size == 8, f"{rep.verdict.value} orbit {rep.orbit_size}"

    def stabs():
        st = stab_report(m, orientation)
        return st.intersection_identity and st.k_star == 2, (
            f"intersection_identity={st.intersection_identity} k*={st.k_star}"
        )

    def factorization():
        built = compose(power_map(3), compose(mixing_middle_factor(), power_map(2), tol), tol)
        dist = coefficient_distance(built, R)
        return dist < 1e-12, f"relative distance {dist:.2e}"

    def no_power_factor():
        pf = power_factor(R, m.E, tol)
        return pf is None, "none" if pf is None else f"d={pf.degree}"

    checks += [
        _run("r", "orbit size", orbit_size),
        _run("r", "rho_0 on orbit sets", rho0_action),
        _run("r", "regular point memberships", membership),
        _run("r", "CTP verdict", verdict),
        _run("r", "stabilizer predicates", stabs),
        _run("r", "three-factor composition", factorization),
        _run("r", "no power factor", no_power_factor),
    ]
    return checks


# ---------------------------------------------------------------------------
# closed-form fiber


def closed_form_rows(n: int = 20, seed: int = 0, tol: ToleranceProfile = DEFAULT):
    return [(k, closed_form_check(k, tol)) for k in sample_annulus(n, seed=seed)]


def case_closed_form(tol: ToleranceProfile = DEFAULT, orientation: str = "ccw", seed: int = 0) -> list[Check]:
    checks = []
    for i, k in enumerate(sample_annulus(20, seed=seed)):
        checks.append(
            _run(
                "appendix",
                f"residual k{i + 1:02d}",
                lambda k=k: (
                    (r := closed_form_check(k, tol).residual) < RESIDUAL_THRESHOLD,
                    f"k={k.real:+.6f}{k.imag:+.6f}i residual {r:.3e}",
                ),
            )
        )
    target = complex(math.cos(math.pi / 3), math.sin(math.pi / 3))
    for k in (0.01, 0.01j):
        def limit(k=k):
            chk = closed_form_check(k, tol)
            chi = cross_ratio(*chk.points, INF)
            err = abs(chi - target)
            return err < 1e-3, f"|chi - e^(i pi/3)| = {err:.2e}"

        checks.append(_run("appendix", f"cross-ratio limit k={k}", limit))
    return checks


def run(case: str = "all", tol: ToleranceProfile = DEFAULT, orientation: str = "ccw", seed: int = 0) -> list[Check]:
    if case == "all":
        selected = CASES
    elif case in CASES:
        selected = (case,)
    else:
        raise ValueError(f"unknown case {case!r}")
    out: list[Check] = []
    for c in selected:
        if c == "s":
            out += case_s(tol, orientation)
        elif c == "r":
            out += case_r(tol, orientation)
        else:
            out += case_closed_form(tol, orientation, seed)
    return out


def table_text(checks: list[Check]) -> str:
    width = max((len(f"{c.case}/{c.name}") for c in checks), default=10)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {f'{c.case}/{c.name}':<{width}}  {c.detail}" for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def table_tsv(checks: list[Check]) -> str:
    rows = ["case\tcheck\tresult\tdetail"]
    rows += [f"{c.case}\t{c.name}\t{'pass' if c.passed else 'fail'}\t{c.detail}" for c in checks]
    return "\n".join(rows) + "\n"


def write_figures(directory: str | Path, cases: tuple[str, ...], tol: ToleranceProfile = DEFAULT, seed: int = 0) -> list[Path]:
    """PNG figures for the selected cases plus nothing else."""
    from .levelset import preimage_circle
    from .plotting import curves_png, residuals_png

    directory = Path(directory)
    out = []
    if "r" in cases:
        R = mixing_map()
        ls = preimage_circle(R, tol=tol)
        doc = load_bundled("r")
        markers = [(z, "#c8102e") for z in doc.marked_points]
        out.append(curves_png(ls.curves, directory / "r_preimage_circle.png", markers, "|R(z)| = 1"))
    if "s" in cases:
        S = saenz_map()
        ls = preimage_circle(S, tol=tol)
        doc = load_bundled("s")
        markers = [(z, "#c8102e") for z in doc.marked_points]
        out.append(curves_png(ls.curves, directory / "s_preimage_circle.png", markers, "|S(z)| = 1"))
    if "appendix" in cases:
        rows = closed_form_rows(20, seed, tol)
        out.append(
            residuals_png(
                [k for k, _ in rows], [c.residual for _, c in rows], RESIDUAL_THRESHOLD,
                directory / "closed_form_residuals.png",
            )
        )
    return out
