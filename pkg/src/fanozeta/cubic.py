"""Cubic threefolds, rational lines, and the conic-bundle frame.

Given a cubic F in P^4 containing a rational line L, a coordinate change
puts L at {x1 = x2 = x3 = 0}. The residual conic over each plane through
L has a symmetric 3x3 Gram matrix whose entries are forms in x1..x3:
three linear forms, two quadratics and a cubic. Its determinant is the
degree-5 discriminant curve, and the diagonal minors decide whether a
degenerate conic splits into rational lines. Everything downstream
(point counting, the whole zeta pipeline) consumes the LineFrame built
here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bulk import BulkEval, decode_grid, iter_ranges, prepare_terms
from .errors import InputError, InvariantError, ResourceError
from .field import Field, make_embedding, make_field
from .forms import Form

DEFAULT_LINE_BUDGET = 300_000_000
BULK_CHUNK = 1 << 20


@dataclass(frozen=True)
class Line:
    """A line in P^4 as the row span of a 2x5 matrix in reduced echelon form."""

    field: Field
    rows: tuple[tuple[int, ...], tuple[int, ...]]

    @classmethod
    def from_rows(cls, field: Field, rows) -> "Line":
        mat = [list(r) for r in rows]
        if len(mat) != 2 or any(len(r) != 5 for r in mat):
            raise InputError("a line needs two spanning vectors of length 5")
        red = rref(field, mat)
        if len(red) != 2:
            raise InputError("spanning vectors are dependent; not a line")
        return cls(field, (tuple(red[0]), tuple(red[1])))

    def pivots(self) -> tuple[int, int]:
        out = []
        for row in self.rows:
            out.append(next(i for i, c in enumerate(row) if c))
        return tuple(out)


def rref(field: Field, mat) -> list[list[int]]:
    """Reduced row echelon form over the field; returns the nonzero rows."""
    mat = [list(r) for r in mat]
    nrows, ncols = len(mat), len(mat[0])
    pivot_row = 0
    for col in range(ncols):
        sel = next((r for r in range(pivot_row, nrows) if mat[r][col]), None)
        if sel is None:
            continue
        mat[pivot_row], mat[sel] = mat[sel], mat[pivot_row]
        inv = field.inv(mat[pivot_row][col])
        mat[pivot_row] = [field.mul(inv, c) for c in mat[pivot_row]]
        for r in range(nrows):
            if r != pivot_row and mat[r][col]:
                factor = mat[r][col]
                mat[r] = [
                    field.sub(a, field.mul(factor, b))
                    for a, b in zip(mat[r], mat[pivot_row])
                ]
        pivot_row += 1
        if pivot_row == nrows:
            break
    return [r for r in mat if any(r)]


def line_cubic_coefficients(cubic: Form, line: Line) -> tuple[int, int, int, int]:
    """Coefficients of F(a*v + b*w) as a binary cubic in (a, b).

    Uses the polar expansion c1 = sum_i w_i dF/dx_i(v) (and symmetrically
    c2), which matches the direct monomial expansion in every odd
    characteristic, including 3.
    """
    f = cubic.field
    v, w = line.rows
    c0 = cubic.evaluate(v)
    c3 = cubic.evaluate(w)
    c1 = 0
    c2 = 0
    for i in range(5):
        di = cubic.partial(i)
        c1 = f.add(c1, f.mul(w[i], di.evaluate(v)))
        c2 = f.add(c2, f.mul(v[i], di.evaluate(w)))
    return c0, c1, c2, c3


def contains_line(cubic: Form, line: Line) -> bool:
    """True iff F vanishes identically on the line."""
    return line_cubic_coefficients(cubic, line) == (0, 0, 0, 0)


# ---------------------------------------------------------------------------
# Grassmannian enumeration

def _pivot_patterns():
    """All pivot pairs (i, j) with the free column slots of each row."""
    for i, j in itertools.combinations(range(5), 2):
        free1 = [c for c in range(i + 1, 5) if c != j]
        free2 = [c for c in range(j + 1, 5)]
        yield i, j, free1, free2


def grassmannian_size(q: int) -> int:
    return (q**5 - 1) * (q**4 - 1) // ((q**2 - 1) * (q - 1))


def grassmannian_lines(field: Field):
    """All lines of P^4 in a fixed deterministic order.

    Pivot pairs ascend lexicographically; within a pair the free entries
    run through an odometer with the last slot fastest, elements in
    packed-int order. The vectorized searches reproduce this order.
    """
    q = field.order
    for i, j, free1, free2 in _pivot_patterns():
        nfree = len(free1) + len(free2)
        for values in itertools.product(range(q), repeat=nfree):
            row1 = [0] * 5
            row2 = [0] * 5
            row1[i] = 1
            row2[j] = 1
            for c, v in zip(free1, values[: len(free1)]):
                row1[c] = v
            for c, v in zip(free2, values[len(free1) :]):
                row2[c] = v
            yield Line(field, (tuple(row1), tuple(row2)))


def _pattern_rows_bulk(field: Field, i, j, free1, free2, flat: np.ndarray):
    """Row coordinate arrays for a block of the odometer of one pivot pattern."""
    q = field.order
    nfree = len(free1) + len(free2)
    coords = decode_grid(flat, q, nfree) if nfree else []
    n = flat.shape[0]
    zeros = np.zeros(n, dtype=np.uint32)
    ones = np.ones(n, dtype=np.uint32)
    row1 = [zeros] * 5
    row2 = [zeros] * 5
    row1 = list(row1)
    row2 = list(row2)
    row1[i] = ones
    row2[j] = ones
    for k, c in enumerate(free1):
        row1[c] = coords[k]
    for k, c in enumerate(free2):
        row2[c] = coords[len(free1) + k]
    return row1, row2


def _line_vanishing_mask(cubic: Form, be: BulkEval, row1, row2, n: int) -> np.ndarray:
    """Mask of candidate lines on which the cubic vanishes identically."""
    terms = prepare_terms(cubic)
    partial_terms = [prepare_terms(cubic.partial(i)) for i in range(5)]
    f = cubic.field
    mask = be.is_zero(be.accumulate(terms, row1, (n,)))
    if not mask.any():
        return mask
    mask &= be.is_zero(be.accumulate(terms, row2, (n,)))
    # polar coefficients: sum_i w_i dF/dx_i(v) and the symmetric one
    for rows_a, rows_b in ((row1, row2), (row2, row1)):
        if not mask.any():
            return mask
        acc = np.zeros(n, dtype=np.uint64)
        pending = 0
        for i in range(5):
            vals = be.eval_terms(partial_terms[i], rows_a, (n,))
            prod = f.vec_mul(vals, rows_b[i])
            acc += be.term64(f.log[prod].astype(np.int64))
            pending += 1
            if pending >= be.batch:
                acc = be.renorm(acc)
                pending = 0
        mask &= be.is_zero(acc)
    return mask


def _scan_lines_bulk(cubic: Form, budget: int, first_only: bool):
    field = cubic.field
    q = field.order
    total = grassmannian_size(q)
    if total > budget:
        raise ResourceError(
            f"line enumeration over F_{q} needs {total} candidates, budget is {budget}"
        )
    be = BulkEval(field)
    found: list[Line] = []
    for i, j, free1, free2 in _pivot_patterns():
        nfree = len(free1) + len(free2)
        size = q**nfree
        for t0, t1 in iter_ranges(size, BULK_CHUNK):
            flat = np.arange(t0, t1, dtype=np.int64)
            row1, row2 = _pattern_rows_bulk(field, i, j, free1, free2, flat)
            mask = _line_vanishing_mask(cubic, be, row1, row2, t1 - t0)
            hits = np.flatnonzero(mask)
            for h in hits:
                rows = (
                    tuple(int(r[h]) for r in row1),
                    tuple(int(r[h]) for r in row2),
                )
                found.append(Line(field, rows))
                if first_only:
                    return found
    return found


def find_rational_line(cubic: Form, budget: int = DEFAULT_LINE_BUDGET) -> Line | None:
    """First line of the deterministic enumeration lying on the cubic, if any."""
    field = cubic.field
    if field.has_tables:
        hits = _scan_lines_bulk(cubic, budget, first_only=True)
        return hits[0] if hits else None
    if grassmannian_size(field.order) > budget:
        raise ResourceError("line enumeration exceeds budget and field has no tables")
    for line in grassmannian_lines(field):
        if contains_line(cubic, line):
            return line
    return None


def all_lines_on_cubic(cubic: Form, budget: int = DEFAULT_LINE_BUDGET) -> list[Line]:
    field = cubic.field
    if field.has_tables:
        return _scan_lines_bulk(cubic, budget, first_only=False)
    if grassmannian_size(field.order) > budget:
        raise ResourceError("line enumeration exceeds budget and field has no tables")
    return [ln for ln in grassmannian_lines(field) if contains_line(cubic, ln)]


# ---------------------------------------------------------------------------
# normal form and the discriminant data

@dataclass(frozen=True)
class LineFrame:
    """Everything the counting loop needs, in coordinates where L = {x1=x2=x3=0}."""

    field: Field
    cubic: Form
    line: Line
    basis: tuple[tuple[int, ...], ...]  # rows; last two span the line
    transformed: Form  # the cubic in the new coordinates
    ell1: Form
    ell2: Form
    ell3: Form
    q1: Form
    q2: Form
    f3: Form
    quintic: Form  # det of the Gram matrix, degree 5 in x1..x3
    delta1: Form  # (1,1) minor: ell3*f3 - q2^2
    delta2: Form  # (2,2) minor: ell1*f3 - q1^2
    delta3: Form  # (3,3) minor: ell1*ell3 - ell2^2

    def gram_entries(self):
        return ((self.ell1, self.ell2, self.q1),
                (self.ell2, self.ell3, self.q2),
                (self.q1, self.q2, self.f3))


def _complete_basis(field: Field, line: Line) -> list[list[int]]:
    """Deterministic basis: line rows last, standard vectors filling the rest."""
    chosen: list[list[int]] = [list(r) for r in line.rows]
    fill: list[list[int]] = []
    for idx in range(5):
        cand = [1 if c == idx else 0 for c in range(5)]
        if len(rref(field, chosen + [cand])) == len(chosen) + 1:
            chosen.append(cand)
            fill.append(cand)
        if len(fill) == 3:
            break
    if len(fill) != 3:
        raise InvariantError("failed to complete line to a basis")
    return fill + [list(r) for r in line.rows]


def _project3(form: Form) -> Form:
    """Drop the (zero) x4, x5 exponents of a form supported on x1..x3."""
    return Form(form.field, 3, {e[:3]: c for e, c in form.terms.items()})


def _lift5(form: Form, e4: int, e5: int) -> Form:
    return Form(form.field, 5, {e + (e4, e5): c for e, c in form.terms.items()})


def normalize(cubic: Form, line: Line) -> LineFrame:
    """Build the LineFrame for a cubic and a rational line on it."""
    field = cubic.field
    if not contains_line(cubic, line):
        raise InputError("the given line does not lie on the cubic")
    basis = _complete_basis(field, line)
    # new coordinates x with point = sum_i x_i * basis[i]; substitute the
    # transpose so old variable j becomes sum_i basis[i][j] x_i
    rows_t = [[basis[i][j] for i in range(5)] for j in range(5)]
    transformed = cubic.substitute_linear(rows_t)

    inv2 = field.inv(2)
    buckets: dict[tuple[int, int], dict[tuple[int, ...], int]] = {}
    for e, c in transformed.terms.items():
        key = (e[3], e[4])
        buckets.setdefault(key, {})[e[:3] + (0, 0)] = c
    for bad in ((3, 0), (2, 1), (1, 2), (0, 3)):
        if buckets.get(bad):
            raise InvariantError("pure x4/x5 terms survived; line containment broke")

    def part(e4, e5, scale_half):
        terms = buckets.get((e4, e5), {})
        form = Form(field, 5, terms)
        if scale_half:
            form = form.scale(inv2)
        return _project3(form)

    ell1 = part(2, 0, False)
    ell2 = part(1, 1, True)
    ell3 = part(0, 2, False)
    q1 = part(1, 0, True)
    q2 = part(0, 1, True)
    f3 = part(0, 0, False)

    delta1 = ell3 * f3 - q2 * q2
    delta2 = ell1 * f3 - q1 * q1
    delta3 = ell1 * ell3 - ell2 * ell2
    quintic = ell1 * delta1 - ell2 * (ell2 * f3 - q1 * q2) + q1 * (ell2 * q2 - ell3 * q1)

    frame = LineFrame(
        field=field,
        cubic=cubic,
        line=line,
        basis=tuple(tuple(r) for r in basis),
        transformed=transformed,
        ell1=ell1,
        ell2=ell2,
        ell3=ell3,
        q1=q1,
        q2=q2,
        f3=f3,
        quintic=quintic,
        delta1=delta1,
        delta2=delta2,
        delta3=delta3,
    )
    _validate_frame(frame)
    return frame


def _validate_frame(frame: LineFrame) -> None:
    f = frame.field
    two = 2 % f.p
    reassembled = (
        _lift5(frame.ell1, 2, 0)
        + _lift5(frame.ell2.scale(two), 1, 1)
        + _lift5(frame.ell3, 0, 2)
        + _lift5(frame.q1.scale(two), 1, 0)
        + _lift5(frame.q2.scale(two), 0, 1)
        + _lift5(frame.f3, 0, 0)
    )
    if reassembled != frame.transformed:
        raise InvariantError("frame forms do not reassemble the transformed cubic")
    if frame.quintic.is_zero():
        raise InvariantError("discriminant determinant is identically zero")
    if frame.quintic.degree() != 5 or not frame.quintic.is_homogeneous():
        raise InvariantError("discriminant is not a homogeneous quintic")
    # second cofactor expansion of the same determinant (along the last row)
    alt = (
        frame.q1 * (frame.ell2 * frame.q2 - frame.q1 * frame.ell3)
        - frame.q2 * (frame.ell1 * frame.q2 - frame.q1 * frame.ell2)
        + frame.f3 * frame.delta3
    )
    if alt != frame.quintic:
        raise InvariantError("cofactor expansions of the discriminant disagree")


# ---------------------------------------------------------------------------
# singular point searches

@dataclass(frozen=True)
class SingularSearch:
    found: bool
    point: tuple[int, ...] | None  # packed coordinates in F_{q^r}
    extension: int | None  # the r where the witness lives

    def __bool__(self):
        return self.found


def _p4_chart_sizes(q: int):
    """Charts of P^4: leading coordinate 1 at position k, free tail."""
    for k in range(5):
        yield k, q ** (4 - k)


def find_singular_point(cubic: Form, rmax: int = 2, budget: int = 500_000_000) -> SingularSearch:
    """Search P^4 over extensions r = 1..rmax for a singular point of the cubic.

    Heuristic by design: returning no witness proves nothing. A point is
    singular when the cubic and all five partials vanish (the form itself
    must be checked; in characteristic 3 the Euler relation is void).
    """
    base = cubic.field
    for r in range(1, rmax + 1):
        ext = make_field(base.p, base.r * r)
        if sum(n for _, n in _p4_chart_sizes(ext.order)) > budget:
            raise ResourceError(f"singular search over extension {r} exceeds budget")
        emb = make_embedding(base, ext)
        cub = cubic.map_coefficients(emb)
        forms = [cub] + [cub.partial(i) for i in range(5)]
        if ext.has_tables:
            hit = _common_zero_bulk(ext, forms)
        else:
            hit = _common_zero_scalar(ext, forms)
        if hit is not None:
            return SingularSearch(True, hit, r)
    return SingularSearch(False, None, None)


def _common_zero_bulk(field: Field, forms) -> tuple[int, ...] | None:
    be = BulkEval(field)
    q = field.order
    terms = [prepare_terms(fm) for fm in forms]
    for k, size in _p4_chart_sizes(q):
        nfree = 4 - k
        for t0, t1 in iter_ranges(size, BULK_CHUNK):
            flat = np.arange(t0, t1, dtype=np.int64)
            n = t1 - t0
            free = decode_grid(flat, q, nfree) if nfree else []
            coords = [np.zeros(n, dtype=np.uint32)] * k + [np.ones(n, dtype=np.uint32)] + free
            mask = be.is_zero(be.accumulate(terms[0], coords, (n,)))
            for tm in terms[1:]:
                if not mask.any():
                    break
                mask &= be.is_zero(be.accumulate(tm, coords, (n,)))
            hits = np.flatnonzero(mask)
            if hits.size:
                h = int(hits[0])
                return tuple(int(c[h]) for c in coords)
    return None


def _common_zero_scalar(field: Field, forms) -> tuple[int, ...] | None:
    q = field.order
    for k, size in _p4_chart_sizes(q):
        nfree = 4 - k
        for flat in range(size):
            tail = []
            t = flat
            for _ in range(nfree):
                tail.append(t % q)
                t //= q
            tail.reverse()
            point = tuple([0] * k + [1] + tail)
            if all(fm.evaluate(point) == 0 for fm in forms):
                return point
    return None


def discriminant_singular_points(frame: LineFrame, r: int, budget: int = 50_000_000):
    """Points of P^2(F_{q^r}) where the quintic and all three minors vanish."""
    base = frame.field
    ext = make_field(base.p, base.r * r)
    npoints = ext.order**2 + ext.order + 1
    if npoints > budget:
        raise ResourceError(f"P^2 enumeration over extension {r} exceeds budget")
    emb = make_embedding(base, ext)
    quintic = frame.quintic.map_coefficients(emb)
    deltas = [d.map_coefficients(emb) for d in (frame.delta1, frame.delta2, frame.delta3)]
    from .counting import enumerate_p2

    out = []
    for pt in enumerate_p2(ext):
        if quintic.evaluate(pt) == 0 and all(d.evaluate(pt) == 0 for d in deltas):
            out.append(pt)
    return out
