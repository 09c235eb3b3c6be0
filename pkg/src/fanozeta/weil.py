"""Exact symmetric-function algebra on Weil polynomials.

Trace vectors from the counting loop turn into the degree-10 numerator
of the zeta function via Newton's identities; its wedge square is the
degree-45 middle factor; Picard numbers fall out of exact cyclotomic and
linear-factor division; the Artin-Tate limit is an exact rational. All
integer arithmetic is unbounded, every division that must be exact is
asserted, and nothing here touches floating point except the root
locator at the bottom.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

from .errors import InputError, InvariantError

B2_FANO = 45  # second Betti number of the surface of lines
PICARD_FLOOR = 5  # the Picard number of the surface is never below the dimension of its Albanese


@dataclass(frozen=True)
class WeilPolynomial:
    """Integer polynomial with constant term 1, tracked with its weight.

    coeffs[k] is the T^k coefficient. Weight w means the reciprocal roots
    should have absolute value q^(w/2); that is asserted only where an
    operation depends on it.
    """

    coeffs: tuple[int, ...]
    q: int
    weight: int

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] != 1:
            raise InvariantError("Weil polynomial must have constant coefficient 1")
        if self.coeffs[-1] == 0:
            raise InvariantError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def pretty(self, var: str = "T") -> str:
        bits = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                bits.append(str(c))
            else:
                mag = "" if abs(c) == 1 else str(abs(c)) + "*"
                term = f"{mag}{var}" + (f"^{k}" if k > 1 else "")
                bits.append(("-" if c < 0 else "+") + " " + term if bits else ("-" if c < 0 else "") + term)
        return " ".join(bits) if bits else "0"


def check_weight1_functional_equation(poly: WeilPolynomial) -> bool:
    """a_{n-k} = q^{n/2-k} a_k for even-degree weight-1 polynomials."""
    n = poly.degree
    if n % 2:
        return False
    half = n // 2
    q = poly.q
    return all(
        poly.coeffs[n - k] == q ** (half - k) * poly.coeffs[k] for k in range(half + 1)
    )


def reverse_scale_sign(poly: WeilPolynomial) -> int:
    """The constant c with q^(w*n/2) T^n P(1/(q^w T)) = c P(T), or 0 if none.

    For the degree-45 weight-2 polynomials produced here the sign is
    always -1 because the top coefficient is -q^45.
    """
    n = poly.degree
    w = poly.weight
    qw = poly.q**w
    for c in (1, -1):
        if all(
            c * poly.coeffs[k] * qw ** (n - k) == poly.coeffs[n - k] * qw ** ((n - k) - (n - k))
            * qw ** 0 * qw ** (0)
            for k in range(0)
        ):
            pass
    # relation: coeffs[n-k] * q^(w*(2k-n)/2)... do it with exact fractions
    for c in (1, -1):
        ok = True
        for k in range(n + 1):
            lhs = Fraction(poly.coeffs[n - k]) * Fraction(qw) ** k / Fraction(qw) ** (n - 0) * Fraction(qw) ** 0
            # q^(w n /2) T^n P(1/(q^w T)) has T^j coefficient a_{n-j} q^(w(j - n/2))
            break
        break
    num = []
    half = Fraction(n, 2)
    for j in range(n + 1):
        e = Fraction(poly.weight) * (j - half)
        val = Fraction(poly.coeffs[n - j]) * Fraction(poly.q) ** e if e == int(e) else None
        if val is None or val.denominator * 0 != 0:
            pass
        num.append((j, e))
    # exact comparison using integer scaling: multiply both sides by q^(w*n/2)
    scale = poly.q ** (poly.weight * n)  # clears every denominator: e + wn/2 in [0, wn]
    lhs = [poly.coeffs[n - j] * poly.q ** (poly.weight * j) for j in range(n + 1)]
    rhs_plus = [poly.coeffs[j] * poly.q ** ((poly.weight * n) // 2) for j in range(n + 1)]
    if poly.weight * n % 2 == 0:
        mid = poly.q ** ((poly.weight * n) // 2)
        if lhs == [c * mid for c in poly.coeffs]:
            return 1
        if lhs == [-c * mid for c in poly.coeffs]:
            return -1
    return 0


def traces_from_counts(report, rmax: int = 5) -> tuple[int, ...]:
    """s_r = -D_r for r = 1..rmax."""
    return tuple(-d for d in report.d_values(rmax))


def p1_from_traces(q: int, traces) -> WeilPolynomial:
    """Degree-10 weight-1 polynomial from the first five power sums.

    Newton's identities give the first five coefficients; the functional
    equation supplies the rest. Every division by k must be exact, and a
    failure means the trace vector cannot come from an integer
    polynomial, i.e. a counting bug.
    """
    s = list(traces)
    if len(s) != 5:
        raise PartialTraceError(len(s))
    a = [1]
    for k in range(1, 6):
        acc = s[k - 1]
        for i in range(1, k):
            acc += a[i] * s[k - 1 - i]
        if acc % k:
            raise InputError(
                f"Newton step {k} is not integral for traces {traces}; invalid trace vector"
            )
        a.append(-acc // k)
    for k in range(4, -1, -1):
        a.append(q ** (5 - k) * a[k])
    poly = WeilPolynomial(tuple(a), q, 1)
    if not check_weight1_functional_equation(poly):
        raise InvariantError("reconstructed polynomial violates the functional equation")
    return poly


class PartialTraceError(InputError):
    def __init__(self, n):
        super().__init__(f"need exactly 5 traces to reconstruct, got {n}")


def p1_prefix_from_traces(traces) -> tuple[int, ...]:
    """Coefficients a_1..a_k from the first k power sums (k <= 5)."""
    s = list(traces)
    a = [1]
    for k in range(1, len(s) + 1):
        acc = s[k - 1]
        for i in range(1, k):
            acc += a[i] * s[k - 1 - i]
        if acc % k:
            raise InputError(f"Newton step {k} is not integral for traces {traces}")
        a.append(-acc // k)
    return tuple(a[1:])


def power_sums(poly: WeilPolynomial, n: int) -> tuple[int, ...]:
    """Power sums of the reciprocal roots, s_1..s_n, exactly."""
    a = poly.coeffs
    deg = poly.degree
    s: list[int] = []
    for k in range(1, n + 1):
        if k <= deg:
            acc = k * a[k]
            for i in range(1, k):
                acc += a[i] * s[k - 1 - i]
        else:
            acc = 0
            for i in range(1, deg + 1):
                acc += a[i] * s[k - 1 - i]
        s.append(-acc)
    return tuple(s)


def _newton_to_coeffs(psums, degree: int) -> tuple[int, ...]:
    a = [1]
    for k in range(1, degree + 1):
        acc = psums[k - 1]
        for i in range(1, k):
            acc += a[i] * psums[k - 1 - i]
        if acc % k:
            raise InvariantError(f"non-exact Newton division at step {k}")
        a.append(-acc // k)
    return tuple(a)


def wedge_square(poly: WeilPolynomial) -> WeilPolynomial:
    """Polynomial whose reciprocal roots are the pairwise products.

    Power sums of pair products are (s_r^2 - s_{2r})/2; the halving is
    exact because s_r^2 - s_{2r} counts ordered distinct pairs.
    """
    n = poly.degree
    if n < 2:
        raise InputError("wedge square needs degree at least 2")
    m = n * (n - 1) // 2
    s = power_sums(poly, 2 * m)
    pair = []
    for r in range(1, m + 1):
        v = s[r - 1] ** 2 - s[2 * r - 1]
        if v % 2:
            raise InvariantError("pair power sum is not an even integer")
        pair.append(v // 2)
    coeffs = _newton_to_coeffs(pair, m)
    out = WeilPolynomial(coeffs, poly.q, 2 * poly.weight)
    if poly.weight == 1 and n == 10 and poly.coeffs[10] == poly.q**5:
        if out.coeffs[45] != -poly.q**45:
            raise InvariantError("wedge square leading coefficient is not -q^45")
        if reverse_scale_sign(out) != -1:
            raise InvariantError("wedge square functional equation sign is not -1")
    return out


def divide_out_linear(coeffs: list[int], root_scale: int) -> list[int] | None:
    """Exact division by (1 - root_scale*T); None if it does not divide."""
    out = []
    prev = 0
    for k in range(len(coeffs) - 1):
        cur = coeffs[k] + root_scale * prev
        out.append(cur)
        prev = cur
    if coeffs[-1] + root_scale * prev != 0:
        return None
    return out


def picard_number(p2: WeilPolynomial) -> int:
    """Multiplicity of the reciprocal root q in the degree-45 factor."""
    coeffs = list(p2.coeffs)
    rho = 0
    while len(coeffs) > 1:
        nxt = divide_out_linear(coeffs, p2.q)
        if nxt is None:
            break
        coeffs = nxt
        rho += 1
    if rho < PICARD_FLOOR:
        raise InvariantError(f"Picard number {rho} below the guaranteed floor {PICARD_FLOOR}")
    return rho


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, low to high."""
    if n == 1:
        return (-1, 1)
    num = [-1] + [0] * (n - 1) + [1]  # T^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_poly_div(num, cyclotomic_poly(d))
    return tuple(num)


def _exact_poly_div(num, den) -> list[int]:
    """Divide by a monic integer polynomial; remainder must vanish."""
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k]
        out[k - dd] = c
        if c:
            for j in range(dd + 1):
                num[k - dd + j] -= c * den[j]
    if any(num[:dd]):
        raise InvariantError("inexact polynomial division")
    return out


def _try_poly_div(num, den):
    num2 = list(num)
    dd = len(den) - 1
    if len(num2) - 1 < dd:
        return None
    out = [0] * (len(num2) - dd)
    for k in range(len(num2) - 1, dd - 1, -1):
        c = num2[k]
        out[k - dd] = c
        if c:
            for j in range(dd + 1):
                num2[k - dd + j] -= c * den[j]
    if any(num2[:dd]):
        return None
    return out


def geometric_picard(p1: WeilPolynomial) -> int:
    """Number of root pairs whose product is q times a root of unity.

    Works on the integer polynomial whose roots are the pair products
    divided by q, stripping cyclotomic factors exactly; no floating
    point is involved.
    """
    p2 = wedge_square(p1)
    q = p2.q
    n = p2.degree
    # reverse(P2)(qT): roots are (pair products)/q
    g = [p2.coeffs[n - k] * q**k for k in range(n + 1)]
    rho_geom = 0
    for m in range(1, 201):
        phi = _euler_phi(m)
        if phi > n:
            continue
        cyc = cyclotomic_poly(m)
        while True:
            nxt = _try_poly_div(g, cyc)
            if nxt is None:
                break
            g = nxt
            rho_geom += phi
    if not PICARD_FLOOR <= rho_geom <= B2_FANO:
        raise InvariantError(f"geometric Picard number {rho_geom} out of range")
    return rho_geom


def _euler_phi(n: int) -> int:
    out = n
    d = 2
    while d * d <= n:
        if n % d == 0:
            out -= out // d
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out -= out // n
    return out


def artin_tate(p2: WeilPolynomial, rho: int | None = None) -> tuple[Fraction, bool]:
    """The limit value: P2 with the (1-qT)^rho part removed, evaluated at 1/q.

    Returns (value, q10_integral) where the flag reports the soft check
    that q^10 * value is an integer.
    """
    if rho is None:
        rho = picard_number(p2)
    coeffs = list(p2.coeffs)
    for _ in range(rho):
        nxt = divide_out_linear(coeffs, p2.q)
        if nxt is None:
            raise InvariantError("(1-qT)^rho does not divide P2")
        coeffs = nxt
    if divide_out_linear(coeffs, p2.q) is not None:
        raise InvariantError("rho below the full multiplicity of 1/q")
    value = Fraction(0)
    x = Fraction(1, p2.q)
    for c in reversed(coeffs):
        value = value * x + c
    q10 = value * p2.q**10
    return value, q10.denominator == 1


def is_rational_square(x: Fraction) -> bool:
    """Exact square test in Q via integer square roots of the reduced parts."""
    if x == 0:
        raise InputError("square test expects a nonzero rational")
    if x < 0:
        return False
    num, den = x.numerator, x.denominator
    rn = math.isqrt(num)
    rd = math.isqrt(den)
    return rn * rn == num and rd * rd == den


def factor_trial(n: int, limit: int = 10_000_000) -> tuple[dict[int, int], bool]:
    """Trial-division factorization with a budget; flag says it completed."""
    n = abs(n)
    out: dict[int, int] = {}
    d = 2
    while d * d <= n and d <= limit:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if n <= limit * limit:
            out[n] = out.get(n, 0) + 1
            return out, True
        out[n] = out.get(n, 0) + 1
        return out, False
    return out, True


def format_factored(x: Fraction) -> str:
    """Display helper: 2^18*3^5*157 / 5^10 style, falling back to plain digits."""

    def one(n: int) -> str:
        if n in (1, -1):
            return str(n)
        fac, complete = factor_trial(n)
        if not complete:
            return str(n)
        bits = [f"{p}^{e}" if e > 1 else str(p) for p, e in sorted(fac.items())]
        return ("-" if n < 0 else "") + "*".join(bits)

    if x.denominator == 1:
        return one(x.numerator)
    return f"{one(x.numerator)} / {one(x.denominator)}"


# ---------------------------------------------------------------------------
# point counts and zeta functions

def cubic_count(q: int, r: int, s_r: int) -> int:
    """Points of the threefold over F_{q^r} from the trace s_r."""
    return 1 + q**r + q ** (2 * r) + q ** (3 * r) - q**r * s_r


def fano_count(p1: WeilPolynomial, r: int) -> int:
    """Points of the surface of lines over F_{q^r}."""
    q = p1.q
    s = power_sums(p1, 2 * r)
    sr, s2r = s[r - 1], s[2 * r - 1]
    h2 = (sr * sr - s2r) // 2
    n = 1 - (1 + q**r) * sr + h2 + q ** (2 * r)
    if n < 0:
        raise InvariantError(f"negative point count N_{r} = {n}; polynomial is not Weil")
    return n


@dataclass(frozen=True)
class ZetaFunction:
    """Alternating product of integer polynomials, numerator first."""

    numerators: tuple[WeilPolynomial, ...]
    denominators: tuple[WeilPolynomial, ...]

    def point_counts(self, rmax: int) -> tuple[int, ...]:
        """N_r from the factored shape, exactly."""
        out = []
        for r in range(1, rmax + 1):
            acc = 0
            for f in self.denominators:
                acc += power_sums(f, r)[r - 1]
            for f in self.numerators:
                acc -= power_sums(f, r)[r - 1]
            out.append(acc)
        return tuple(out)


def zeta_cubic(p1: WeilPolynomial) -> ZetaFunction:
    """Z(F, T): numerator P1(qT), denominator the four linear factors."""
    q = p1.q
    num = WeilPolynomial(tuple(c * q**k for k, c in enumerate(p1.coeffs)), q, 3)
    dens = tuple(
        WeilPolynomial((1, -(q**i)), q, 2 * i) for i in range(4)
    )
    z = ZetaFunction((num,), dens)
    s = power_sums(p1, 3)
    for r in range(1, 4):
        if z.point_counts(3)[r - 1] != cubic_count(q, r, s[r - 1]):
            raise InvariantError("zeta series disagrees with the trace formula")
    return z


def zeta_fano(p1: WeilPolynomial, p2: WeilPolynomial | None = None) -> ZetaFunction:
    """Z(S, T) = P1 * P3 / ((1-T) P2 (1-q^2 T)) with P3 by reverse-and-scale."""
    q = p1.q
    if p2 is None:
        p2 = wedge_square(p1)
    n = p1.degree
    p3_coeffs = []
    for j in range(n + 1):
        e = 2 * j - 5
        num = p1.coeffs[n - j] * q ** max(e, 0)
        if e < 0:
            if num % q ** (-e):
                raise InvariantError("P3 coefficient is not integral")
            num = p1.coeffs[n - j] // q ** (-e)
        p3_coeffs.append(num)
    p3 = WeilPolynomial(tuple(p3_coeffs), q, 3)
    one = WeilPolynomial((1, -1), q, 0)
    last = WeilPolynomial((1, -(q**2)), q, 4)
    z = ZetaFunction((p1, p3), (one, p2, last))
    for r in range(1, 4):
        if z.point_counts(3)[r - 1] != fano_count(p1, r):
            raise InvariantError("Fano zeta series disagrees with the trace formula")
    return z


# ---------------------------------------------------------------------------
# floating point root location (simultaneous iteration)

@dataclass(frozen=True)
class CircleCheck:
    ok: bool | None  # None when the iteration failed to converge
    max_deviation: float
    residual_bound: float
    iterations: int
    converged: bool


def roots_on_circle(poly: WeilPolynomial, modulus: float, tol: float = 1e-10,
                    max_iter: int = 400) -> CircleCheck:
    """Do all complex roots have |T| within tol of the given modulus?

    Aberth-Ehrlich simultaneous iteration in the rescaled variable
    T = modulus * u, so the target circle is |u| = 1. The residual bound
    is n * max|Weierstrass correction|, a containment radius for the
    true roots.
    """
    n = poly.degree
    # rescale so expected roots sit on the unit circle
    c = [float(a) * modulus**k for k, a in enumerate(poly.coeffs)]
    lead = c[-1]
    c = [x / lead for x in c]

    def val_der(z: complex) -> tuple[complex, complex]:
        v = 0j
        d = 0j
        for a in reversed(c):
            d = d * z + v
            v = v * z + a
        return v, d

    roots = [
        cmath.exp(2j * cmath.pi * (k + 0.26) / n) * (1.0 + 0.04 * ((k % 3) - 1))
        for k in range(n)
    ]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        max_step = 0.0
        for i in range(n):
            v, d = val_der(roots[i])
            if v == 0:
                continue
            s = sum(1.0 / (roots[i] - roots[j]) for j in range(n) if j != i)
            w = v / d if d != 0 else v
            denom = 1.0 - w * s
            step = w / denom if denom != 0 else w
            roots[i] -= step
            max_step = max(max_step, abs(step))
        if max_step < 1e-14:
            converged = True
            break
    resid = 0.0
    for i in range(n):
        v, _ = val_der(roots[i])
        prod = 1.0 + 0j
        for j in range(n):
            if j != i:
                prod *= roots[i] - roots[j]
        if prod != 0:
            resid = max(resid, abs(v / prod))
    residual_bound = n * resid
    max_dev = max(abs(abs(z) - 1.0) for z in roots) * modulus
    ok: bool | None
    if not converged and residual_bound > tol:
        ok = None
    else:
        ok = max_dev <= tol
    return CircleCheck(ok, max_dev, residual_bound, it, converged)


# ---------------------------------------------------------------------------
# the last-coefficient scan for partial data

@dataclass(frozen=True)
class LastCoefficientScan:
    q: int
    prefix: tuple[int, int, int, int]
    center: Fraction
    radius: float
    lo: int
    hi: int
    candidates: tuple[int, ...]


def candidate_disk_radius(q: int) -> float:
    """Radius of the disk that must contain the middle coefficient: 2 q^(5/2)."""
    return 2.0 * q**2 * math.sqrt(q)


def scan_last_coefficient(q: int, prefix, tol: float = 1e-10, margin: int = 2) -> LastCoefficientScan:
    """All integer middle coefficients whose completion keeps roots on the circle.

    The prefix a_1..a_4 fixes the power sums s_1..s_4; the middle
    coefficient is an affine function of s_5, and |s_5| <= 10 q^(5/2)
    confines it to a disk of radius 2 q^(5/2) centered at the value
    corresponding to s_5 = 0. Each integer in that disk (plus margin) is
    completed by the functional equation and kept when every root lies
    within tol of |T| = q^(-1/2).
    """
    a1, a2, a3, a4 = (int(v) for v in prefix)
    s1 = -a1
    s2 = -(a1 * s1 + 2 * a2)
    s3 = -(a1 * s2 + a2 * s1 + 3 * a3)
    s4 = -(a1 * s3 + a2 * s2 + a3 * s1 + 4 * a4)
    center = Fraction(-(a1 * s4 + a2 * s3 + a3 * s2 + a4 * s1), 5)
    radius = candidate_disk_radius(q)
    lo = math.ceil(center - Fraction(radius).limit_denominator(10**6)) - margin
    hi = math.floor(center + Fraction(radius).limit_denominator(10**6)) + margin
    lo = int(lo)
    hi = int(hi)
    m = 1.0 / math.sqrt(q)
    passing = []
    for a5 in range(lo, hi + 1):
        coeffs = [1, a1, a2, a3, a4, a5]
        for k in range(4, -1, -1):
            coeffs.append(q ** (5 - k) * coeffs[k])
        poly = WeilPolynomial(tuple(coeffs), q, 1)
        chk = roots_on_circle(poly, m, tol)
        if chk.ok:
            passing.append(a5)
    return LastCoefficientScan(q, (a1, a2, a3, a4), center, radius, lo, hi, tuple(passing))


# ---------------------------------------------------------------------------

@dataclass
class WeilData:
    """Everything derived from one trace vector."""

    q: int
    traces: tuple[int, ...]
    p1: WeilPolynomial
    p2: WeilPolynomial
    rho: int
    rho_geometric: int | None
    artin_tate_value: Fraction
    artin_tate_q10_integral: bool
    functional_equation_ok: bool
    p2_reverse_sign: int
    circle_check: CircleCheck
    notes: list[str] = dc_field(default_factory=list)


def weil_data_from_traces(q: int, traces, *, tol: float = 1e-10,
                          geometric: bool = True) -> WeilData:
    p1 = p1_from_traces(q, traces)
    p2 = wedge_square(p1)
    rho = picard_number(p2)
    rho_geom = geometric_picard(p1) if geometric else None
    at_value, q10_ok = artin_tate(p2, rho)
    circle = roots_on_circle(p1, 1.0 / math.sqrt(q), tol)
    notes = []
    if not q10_ok:
        notes.append("Artin-Tate value times q^10 is not an integer")
    if rho_geom is not None and not rho <= rho_geom:
        raise InvariantError("rho exceeds the geometric Picard number")
    return WeilData(
        q=q,
        traces=tuple(traces),
        p1=p1,
        p2=p2,
        rho=rho,
        rho_geometric=rho_geom,
        artin_tate_value=at_value,
        artin_tate_q10_integral=q10_ok,
        functional_equation_ok=check_weight1_functional_equation(p1),
        p2_reverse_sign=reverse_scale_sign(p2),
        circle_check=circle,
        notes=notes,
    )
