"""Complex polynomials and rational maps on the Riemann sphere.

Points of the sphere are plain Python ``complex`` values; the point at
infinity is the canonical value :data:`INF`.  Polynomials store ascending
coefficients.  Roots are found by Aberth-Ehrlich simultaneous iteration
and multiple roots are recovered by merging clusters of approximations.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegreeOverflow, InputError, NonConvergence, ZeroMap
from .tolerance import DEFAULT, ToleranceProfile

INF = complex(math.inf, 0.0)

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# points of the sphere


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


def as_point(z) -> complex:
    """Coerce to a sphere point; every infinite value becomes :data:`INF`."""
    if isinstance(z, str):
        if z.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        raise InputError(f"cannot read point {z!r}")
    z = complex(z)
    if cmath.isnan(z):
        raise InputError("NaN is not a point of the sphere")
    if cmath.isinf(z):
        return INF
    return z


def chordal(z: complex, w: complex) -> float:
    """Chordal distance on the Riemann sphere (diameter 2)."""
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if wi:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def same_point(z: complex, w: complex, radius: float) -> bool:
    """Point identity at a relative radius (chordal metric near infinity)."""
    if is_inf(z) or is_inf(w):
        return chordal(z, w) <= radius
    return abs(z - w) <= radius * (1.0 + min(abs(z), abs(w)))


def point_key(z: complex) -> tuple[float, float]:
    """Sort key for deterministic fiber labels: descending real, then imaginary."""
    if is_inf(z):
        return (-math.inf, -math.inf)
    return (-z.real, -z.imag)


def format_point(z: complex, digits: int = 12) -> str:
    if is_inf(z):
        return "inf"
    re = round(z.real, digits) + 0.0
    im = round(z.imag, digits) + 0.0
    return f"{re:.{digits}g}{im:+.{digits}g}i"


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Immutable complex polynomial with ascending coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[complex], trim: bool = True):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise InputError("polynomial coefficients must be finite")
        if trim:
            c = _trim(c)
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    @property
    def leading(self) -> complex:
        return complex(self._c[-1])

    def is_zero(self) -> bool:
        return not np.any(self._c)

    def norm(self) -> float:
        return float(np.linalg.norm(self._c))

    def __call__(self, z):
        return npoly.polyval(z, self._c)

    def deriv(self, m: int = 1) -> "Polynomial":
        if m > self.degree:
            return Polynomial([0.0])
        return Polynomial(npoly.polyder(self._c, m), trim=False)

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        return Polynomial(npoly.polyadd(self._c, other._c))

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        return Polynomial(npoly.polysub(self._c, other._c))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self._c, other._c))
        return Polynomial(self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Polynomial":
        return Polynomial(self._c / complex(scalar))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self._c)

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial([1.0])
        for _ in range(n):
            out = out * self
        return out

    def padded(self, n: int) -> np.ndarray:
        """Coefficients zero-padded to length ``n + 1``."""
        out = np.zeros(n + 1, dtype=complex)
        out[: self._c.size] = self._c
        return out

    def compose_affine(self, alpha: complex, beta: complex) -> "Polynomial":
        """Return p(alpha*z + beta)."""
        lin = Polynomial([beta, alpha], trim=False)
        out = Polynomial([0.0])
        for a in self._c[::-1]:
            out = out * lin + complex(a)
        return out

    def divmod_linear_power(self, root: complex, k: int) -> "Polynomial":
        """Quotient of p by (z - root)^k, discarding the remainder."""
        q = self._c
        for _ in range(k):
            q, _r = npoly.polydiv(q, np.array([-root, 1.0], dtype=complex))
        return Polynomial(q)

    def __repr__(self) -> str:
        return f"Polynomial({[complex(a) for a in self._c]!r})"


def _trim(c: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    n = c.size
    while n > 1 and abs(c[n - 1]) <= 1e-14 * scale:
        n -= 1
    return c[:n].copy()


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial([complex(x)])


def monomial(d: int, coeff: complex = 1.0) -> Polynomial:
    c = np.zeros(d + 1, dtype=complex)
    c[d] = coeff
    return Polynomial(c)


# ---------------------------------------------------------------------------
# root finding


def poly_roots(
    p: Polynomial,
    tol: ToleranceProfile = DEFAULT,
    seed: int = 0,
    restarts: int = 8,
) -> list[tuple[complex, int]]:
    """Roots of ``p`` with multiplicities, sorted by (re, im).

    Approximations from Aberth-Ehrlich iteration are merged into clusters
    whenever the spread of a cluster is compatible with a multiple root
    perturbed by rounding; each cluster center is then polished by Newton's
    method on the appropriate derivative.
    """
    if p.degree < 1:
        raise InputError("poly_roots needs degree >= 1")
    c = p.coeffs
    # exact zero roots first; they are common (z^k factors) and hurt Aberth
    scale = np.max(np.abs(c))
    k0 = 0
    while k0 < p.degree and abs(c[k0]) <= 1e-14 * scale:
        k0 += 1
    core = c[k0:]
    found: list[tuple[complex, int]] = []
    if core.size > 1:
        rng = np.random.default_rng(seed)
        pc = Polynomial(core, trim=False)
        for attempt in range(restarts + 1):
            approx = _aberth(core, rng)
            if approx is None:
                continue
            found = _cluster(pc, approx, tol)
            if _residual_ok(pc, found, tol):
                break
        else:
            raise NonConvergence(f"Aberth iteration failed for degree {pc.degree}")
    if k0:
        found.append((0j, k0))
        found = _merge_zero(found, tol)
    found.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return found


def _merge_zero(found, tol):
    merged: list[list] = []
    for r, m in found:
        for item in merged:
            if abs(item[0] - r) <= tol.cluster * (1 + abs(r)):
                item[1] += m
                break
        else:
            merged.append([r, m])
    return [(complex(r), m) for r, m in merged]


def _aberth(c: np.ndarray, rng: np.random.Generator, max_iter: int = 2000):
    n = c.size - 1
    a = c / c[-1]
    if n == 1:
        return np.array([-a[0]])
    da = npoly.polyder(a)
    absa = np.abs(a)
    # Fujiwara-type bound for the root moduli
    ratios = [abs(a[n - k]) ** (1.0 / k) for k in range(1, n + 1)]
    radius = 2.0 * max(ratios) if max(ratios) > 0 else 1.0
    centre = -a[n - 1] / n
    phase = rng.uniform(0, 2 * np.pi)
    z = centre + 0.5 * radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + phase + 0.4))
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        pz = npoly.polyval(z, a)
        bound = npoly.polyval(np.abs(z), absa)
        active &= np.abs(pz) > 8 * _EPS * bound
        if not active.any():
            break
        dpz = npoly.polyval(z, da)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        # two approximations collapsed onto one root: push one away
        w[bad] = 1e-3 * radius * np.exp(1j * rng.uniform(0, 2 * np.pi, int(bad.sum())))
        step = np.where(active, w, 0.0)
        z = z - step
        if not np.all(np.isfinite(z)):
            return None
        small = (np.abs(step) <= 4 * _EPS * np.abs(z)) & ~bad
        active &= ~small
    return z


def _taylor_coeff(p: Polynomial, z: complex, m: int) -> complex:
    return complex(p.deriv(m)(z)) / math.factorial(m)


def _noise_radius(p: Polynomial, z: complex, m: int) -> float:
    noise = 1e3 * _EPS * float(npoly.polyval(abs(z), np.abs(p.coeffs)))
    t = abs(_taylor_coeff(p, z, m))
    if t == 0.0:
        return math.inf
    return (noise / t) ** (1.0 / m)


def _merge_limit(p: Polynomial, centre: complex, m: int, spread: float, tol: ToleranceProfile) -> float:
    t = abs(_taylor_coeff(p, centre, m))
    noise = 1e3 * _EPS * float(npoly.polyval(abs(centre), np.abs(p.coeffs)))
    # a perturbed m-fold root looks like t*(z - c)^m near its center
    spread = max(spread, 1e-300)
    if abs(complex(p(centre))) > 4 * t * spread**m + noise:
        return -1.0
    # lower Taylor coefficients of an m-fold root vanish up to the spread
    for j in range(1, m):
        tj = abs(_taylor_coeff(p, centre, j))
        pj = p.deriv(j)
        noise_j = 1e3 * _EPS * float(npoly.polyval(abs(centre), np.abs(pj.coeffs))) / math.factorial(j)
        if tj > 4 * math.comb(m, j) * t * spread ** (m - j) + noise_j:
            return -1.0
    return max(tol.cluster * (1 + abs(centre)), 10 * _noise_radius(p, centre, m))


def _cluster(p: Polynomial, approx: np.ndarray, tol: ToleranceProfile):
    clusters = [[complex(z)] for z in approx]
    changed = True
    while changed and len(clusters) > 1:
        changed = False
        pairs = []
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                dist = min(abs(x - y) for x in clusters[i] for y in clusters[j])
                pairs.append((dist, i, j))
        pairs.sort()
        for _dist, i, j in pairs:
            members = clusters[i] + clusters[j]
            centre = sum(members) / len(members)
            spread = max(abs(x - centre) for x in members)
            if spread <= _merge_limit(p, centre, len(members), spread, tol):
                clusters[i] = members
                del clusters[j]
                changed = True
                break
    out = []
    for members in clusters:
        m = len(members)
        centre = sum(members) / m
        out.append((_polish(p, centre, m), m))
    return out


def _polish(p: Polynomial, z: complex, m: int, iters: int = 6) -> complex:
    q = p.deriv(m - 1)
    dq = p.deriv(m)
    best, best_res = z, abs(complex(q(z)))
    for _ in range(iters):
        d = complex(dq(z))
        if d == 0:
            break
        z = z - complex(q(z)) / d
        res = abs(complex(q(z)))
        if res < best_res:
            best, best_res = z, res
        else:
            break
    return best


def _residual_ok(p: Polynomial, found, tol: ToleranceProfile) -> bool:
    if sum(m for _r, m in found) != p.degree:
        return False
    nrm = p.norm()
    for r, _m in found:
        if abs(complex(p(r))) > tol.root_residual * (1 + abs(r)) ** p.degree * nrm:
            return False
    return True


# ---------------------------------------------------------------------------
# rational maps


class RationalMap:
    """f = num / den, evaluated on the whole sphere."""

    __slots__ = ("num", "den", "degree", "name")

    def __init__(self, num, den=(1.0,), name: str = ""):
        self.num = num if isinstance(num, Polynomial) else Polynomial(num)
        self.den = den if isinstance(den, Polynomial) else Polynomial(den)
        if self.den.is_zero():
            raise ZeroMap("denominator is identically zero")
        if self.num.is_zero():
            raise ZeroMap("numerator is identically zero")
        self.degree = max(self.num.degree, self.den.degree)
        self.name = name

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    @property
    def ident(self) -> str:
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.num.coeffs).tobytes())
        h.update(b"/")
        h.update(np.ascontiguousarray(self.den.coeffs).tobytes())
        return h.hexdigest()[:12]

    def homogeneous(self) -> tuple[np.ndarray, np.ndarray]:
        """Numerator and denominator padded to the common degree."""
        return self.num.padded(self.degree), self.den.padded(self.degree)

    def __call__(self, z: complex) -> complex:
        return eval_sphere(self, z)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<RationalMap{label} degree {self.degree}>"


def eval_sphere(f: RationalMap, z: complex) -> complex:
    z = as_point(z)
    if is_inf(z) or abs(z) > 1e6:
        u = 0j if is_inf(z) else 1.0 / z
        P, Q = f.homogeneous()
        pu = complex(npoly.polyval(u, P[::-1]))
        qu = complex(npoly.polyval(u, Q[::-1]))
    else:
        pu = complex(f.num(z))
        qu = complex(f.den(z))
    if qu == 0:
        return INF
    w = pu / qu
    if not cmath.isfinite(w) or abs(w) > 1e300:
        return INF
    return w


# ---------------------------------------------------------------------------
# critical portraits and fibers


@dataclass(frozen=True)
class CriticalPortrait:
    points: tuple[tuple[complex, int], ...]
    values: tuple[complex, ...]

    def local_degree(self, z: complex, radius: float = 1e-6) -> int:
        for c, k in self.points:
            if same_point(c, z, radius):
                return k
        return 1


def sphere_sort_key(z: complex) -> tuple[float, float, float]:
    if is_inf(z):
        return (1.0, 0.0, 0.0)
    return (0.0, round(z.real, 9), round(z.imag, 9))


def dedupe_points(points: Iterable[complex], radius: float) -> list[complex]:
    out: list[complex] = []
    for z in points:
        if not any(chordal(z, w) <= radius for w in out):
            out.append(z)
    return out


def critical_portrait(f: RationalMap, tol: ToleranceProfile = DEFAULT) -> CriticalPortrait:
    if f.degree < 2:
        raise InputError("critical portrait needs degree >= 2")
    P, Q = f.num, f.den
    W = P.deriv() * Q - P * Q.deriv()
    points: list[tuple[complex, int]] = []
    finite_total = 0
    if W.degree >= 1:
        for r, m in poly_roots(W, tol):
            points.append((r, m + 1))
            finite_total += m
    at_inf = 2 * f.degree - 2 - finite_total
    if at_inf > 0:
        points.append((INF, at_inf + 1))
    points.sort(key=lambda cm: sphere_sort_key(cm[0]))
    values = dedupe_points((eval_sphere(f, c) for c, _k in points), tol.cluster * 10)
    values.sort(key=sphere_sort_key)
    return CriticalPortrait(tuple(points), tuple(values))


@dataclass(frozen=True)
class Fiber:
    """Labeled preimages of a base point; label ``i`` is ``points[i]``."""

    base: complex
    points: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    map_id: str = ""

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_simple(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def min_separation(self) -> float:
        pts = self.points
        best = math.inf
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = min(best, chordal(pts[i], pts[j]))
        return best

    def label_of(self, z: complex, radius: float = 1e-6) -> int:
        hits = [i for i, w in enumerate(self.points) if same_point(z, w, radius)]
        if len(hits) != 1:
            raise InputError(f"point {format_point(z)} matches {len(hits)} fiber points")
        return hits[0]

    def relabeled(self, perm: Sequence[int]) -> "Fiber":
        """Fiber whose label ``perm[i]`` carries the old point ``i``."""
        pts = [0j] * len(self.points)
        mult = [0] * len(self.points)
        for i, j in enumerate(perm):
            pts[j] = self.points[i]
            mult[j] = self.multiplicities[i]
        return Fiber(self.base, tuple(pts), tuple(mult), self.map_id)


def fiber_solve(f: RationalMap, w: complex, tol: ToleranceProfile = DEFAULT, seed: int = 0) -> Fiber:
    """All solutions of f(z) = w with multiplicities, in label order."""
    if f.degree < 2:
        raise InputError("fiber_solve needs degree >= 2")
    w = as_point(w)
    if is_inf(w):
        eq = f.den
    else:
        eq = f.num - f.den * w
    roots: list[tuple[complex, int]] = []
    if not eq.is_zero() and eq.degree >= 1:
        roots = poly_roots(eq, tol, seed=seed)
        roots = [(_newton_polish(eq, r) if m == 1 else r, m) for r, m in roots]
    deficit = f.degree - (eq.degree if not eq.is_zero() else 0)
    if deficit > 0:
        roots.append((INF, deficit))
    roots.sort(key=lambda rm: point_key(rm[0]))
    return Fiber(w, tuple(r for r, _m in roots), tuple(m for _r, m in roots), f.ident)


def _newton_polish(p: Polynomial, z: complex, iters: int = 3) -> complex:
    dp = p.deriv()
    for _ in range(iters):
        d = complex(dp(z))
        if d == 0:
            break
        step = complex(p(z)) / d
        z -= step
        if abs(step) <= 4 * _EPS * (1 + abs(z)):
            break
    return z


# ---------------------------------------------------------------------------
# composition and normalization


def compose(g: RationalMap, f: RationalMap, tol: ToleranceProfile = DEFAULT) -> RationalMap:
    """g o f, normalized."""
    if g.degree * f.degree > tol.max_degree:
        raise DegreeOverflow(f"degree {g.degree * f.degree} exceeds {tol.max_degree}")
    n = g.degree
    Pg, Qg = g.homogeneous()
    Pf, Qf = f.num, f.den
    pf_pows = [Polynomial([1.0])]
    qf_pows = [Polynomial([1.0])]
    for _ in range(n):
        pf_pows.append(pf_pows[-1] * Pf)
        qf_pows.append(qf_pows[-1] * Qf)
    num = Polynomial([0.0])
    den = Polynomial([0.0])
    for k in range(n + 1):
        term = pf_pows[k] * qf_pows[n - k]
        if Pg[k] != 0:
            num = num + term * complex(Pg[k])
        if Qg[k] != 0:
            den = den + term * complex(Qg[k])
    return normalize(RationalMap(num, den), tol)


def normalize(f: RationalMap, tol: ToleranceProfile = DEFAULT, remove_common: bool = True) -> RationalMap:
    """Cancel common roots and scale so the denominator's leading coefficient is 1."""
    num, den = f.num, f.den
    if num.is_zero() or num.norm() <= 1e-14 * den.norm():
        raise ZeroMap("numerator is numerically zero")
    if remove_common and num.degree >= 1 and den.degree >= 1:
        rn = poly_roots(num, tol)
        rd = poly_roots(den, tol)
        for r, m in rn:
            for s, k in rd:
                if abs(r - s) <= tol.cluster * (1 + abs(r)) * 10:
                    common = min(m, k)
                    centre = (r + s) / 2
                    num = num.divmod_linear_power(centre, common)
                    den = den.divmod_linear_power(centre, common)
    lead = den.leading
    return RationalMap(num / lead, den / lead, name=f.name)


def coefficient_distance(f: RationalMap, g: RationalMap) -> float:
    """Relative coefficient difference of two normalized maps."""
    f = normalize(f, remove_common=False)
    g = normalize(g, remove_common=False)
    n = max(f.degree, g.degree)
    a = np.concatenate([f.num.padded(n), f.den.padded(n)])
    b = np.concatenate([g.num.padded(n), g.den.padded(n)])
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def same_map(f: RationalMap, g: RationalMap, rtol: float = 1e-10) -> bool:
    """f == g as maps, via the cross product num_f*den_g - num_g*den_f."""
    cross = f.num * g.den - g.num * f.den
    scale = max((f.num * g.den).norm(), (g.num * f.den).norm())
    return cross.norm() <= rtol * scale


def mobius_affine(alpha: complex, beta: complex) -> RationalMap:
    return RationalMap([beta, alpha], [1.0])


def power_map(d: int, centre: complex = 0j) -> RationalMap:
    """(z - centre)^d."""
    base = Polynomial([-centre, 1.0], trim=False)
    return RationalMap(base**d, [1.0], name=f"P{d}")


def identity_map() -> RationalMap:
    return RationalMap([0.0, 1.0], [1.0], name="id")


def saenz_map() -> RationalMap:
    """z^3 (2 - z) / (2z - 1)."""
    return RationalMap([0, 0, 0, 2, -1], [-1, 2], name="S")


def mixing_map() -> RationalMap:
    """-[(z^2 - 1)(z^2 + 3) / (4 z^2)]^3, normalized."""
    inner = Polynomial([-1, 0, 1]) * Polynomial([3, 0, 1])
    num = -(inner**3)
    den = monomial(6, 64.0)
    return normalize(RationalMap(num, den, name="R"), remove_common=False)


def mixing_middle_factor() -> RationalMap:
    """-(z - 1)(z + 3) / (4z), the middle factor of the mixing map."""
    return RationalMap(-(Polynomial([-1, 1]) * Polynomial([3, 1])), [0, 4], name="g")
