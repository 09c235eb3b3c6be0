"""Multivariate polynomial forms with coefficients in a finite field.

A Form is a sparse map from exponent tuples to packed field elements.
These stay tiny (at most 35 monomials for a quinary cubic, 21 for the
trivariate quintic), so all symbolic work here is plain dict algebra;
the heavy per-point evaluation lives in bulk.py.
"""

from __future__ import annotations

from .errors import InputError
from .field import Embedding, Field


class Form:
    """Sparse homogeneous polynomial over a Field. Treated as immutable."""

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: Field, nvars: int, terms: dict[tuple[int, ...], int]):
        self.field = field
        self.nvars = nvars
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @classmethod
    def zero(cls, field: Field, nvars: int) -> "Form":
        return cls(field, nvars, {})

    @classmethod
    def monomial(cls, field: Field, nvars: int, exps: tuple[int, ...], coeff: int) -> "Form":
        return cls(field, nvars, {tuple(exps): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Form)
            and self.field is other.field
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((id(self.field), self.nvars, tuple(sorted(self.terms.items()))))

    def __add__(self, other: "Form") -> "Form":
        f = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = f.add(out.get(e, 0), c)
        return Form(f, self.nvars, out)

    def __sub__(self, other: "Form") -> "Form":
        f = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = f.sub(out.get(e, 0), c)
        return Form(f, self.nvars, out)

    def __mul__(self, other: "Form") -> "Form":
        f = self.field
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = f.add(out.get(e, 0), f.mul(c1, c2))
        return Form(f, self.nvars, out)

    def scale(self, c: int) -> "Form":
        f = self.field
        return Form(f, self.nvars, {e: f.mul(c, v) for e, v in self.terms.items()})

    def neg(self) -> "Form":
        f = self.field
        return Form(f, self.nvars, {e: f.neg(v) for e, v in self.terms.items()})

    def pow_small(self, n: int) -> "Form":
        out = Form.monomial(self.field, self.nvars, (0,) * self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, i: int) -> "Form":
        f = self.field
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms.items():
            if e[i]:
                k = e[i] % f.p
                if k:
                    e2 = e[:i] + (e[i] - 1,) + e[i + 1 :]
                    out[e2] = f.add(out.get(e2, 0), f.mul(k, c))
        return Form(f, self.nvars, out)

    def evaluate(self, point) -> int:
        f = self.field
        acc = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = f.mul(v, f.pow(x, k))
                    if v == 0:
                        break
            acc = f.add(acc, v)
        return acc

    def substitute_linear(self, rows) -> "Form":
        """Replace variable i by the linear form sum_j rows[i][j] * y_j.

        rows has one row per old variable; the number of columns sets the
        variable count of the result.
        """
        f = self.field
        m = len(rows[0])
        linear = []
        for row in rows:
            linear.append(
                Form(f, m, {tuple(1 if j == k else 0 for j in range(m)): c for k, c in enumerate(row) if c})
            )
        out = Form.zero(f, m)
        for e, c in self.terms.items():
            term = Form.monomial(f, m, (0,) * m, c)
            for i, k in enumerate(e):
                for _ in range(k):
                    term = term * linear[i]
            out = out + term
        return out

    def map_coefficients(self, emb: Embedding) -> "Form":
        """Push coefficients through a field embedding."""
        return Form(emb.dst, self.nvars, {e: emb(c) for e, c in self.terms.items()})

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "Form(0)"
        bits = [f"{c}*x^{e}" for e, c in self.sorted_terms()]
        return "Form(" + " + ".join(bits) + f" over {self.field!r})"


def make_cubic(field: Field, coeff_map) -> Form:
    """Validated degree-3 form in 5 variables from (exponents, coeff) pairs.

    Integer coefficients are reduced into the prime field; exponents must
    be length-5 and sum to 3.
    """
    terms: dict[tuple[int, ...], int] = {}
    for exps, c in coeff_map.items() if isinstance(coeff_map, dict) else coeff_map:
        e = tuple(int(v) for v in exps)
        if len(e) != 5 or any(v < 0 for v in e) or sum(e) != 3:
            raise InputError(f"monomial exponents {e} do not describe a quinary cubic")
        c = int(c) % field.p
        if c:
            terms[e] = field.add(terms.get(e, 0), c)
    form = Form(field, 5, terms)
    if form.is_zero():
        raise InputError("cubic form is identically zero")
    return form
