"""Arithmetic in finite fields F_{p^r} of odd characteristic.

An element is a plain Python int in [0, p^r): its base-p digits, lowest
first, are the coefficients of the residue polynomial modulo the field
modulus. This packing is canonical (digits always reduced into [0, p)),
0 is the additive and 1 the multiplicative identity in every field, and
it doubles as a dense table index, which is what the bulk enumeration
kernels live off.

Field construction is deterministic: for given (p, r) the modulus is the
lexicographically smallest monic irreducible of degree r over F_p, with
coefficient tuples compared lowest degree first. Fields up to order
TABLE_MAX_ORDER carry exp/log tables (multiplication by discrete log), a
negation table and a square-class table; beyond that, scalar arithmetic
falls back to polynomial multiplication and the Euler criterion.

Everything on a Field is immutable after construction, so instances and
their tables can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .errors import InputError, InvariantError, ResourceError

TABLE_MAX_ORDER = 1 << 22
# Above this order the padded exp table (16q entries) gets too large, so
# bulk kernels switch to reducing log sums modulo q-1 on the fly.
FAST_EXP_MAX_ORDER = 1 << 18
DEFAULT_MAX_ORDER = 1 << 26

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class SquareClass(IntEnum):
    ZERO = 0
    SQUARE = 1
    NONSQUARE = 2


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# ---------------------------------------------------------------------------
# dense polynomials over F_p (coefficient lists, lowest degree first)

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # long division by monic m
    dm = len(m) - 1
    for i in range(len(prod) - 1, dm - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(dm):
                prod[i - dm + j] = (prod[i - dm + j] - c * m[j]) % p
    del prod[dm:]
    return _poly_trim(prod)


def _poly_powmod(a: list[int], n: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = list(a)
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, m, p)
        n >>= 1
        if n:
            base = _poly_mulmod(base, base, m, p)
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = list(a), list(b)
    while b:
        inv = pow(b[-1], p - 2, p)
        bm = [(c * inv) % p for c in b]
        r = list(a)
        while len(r) >= len(bm) and r:
            c = r[-1]
            if c:
                for j in range(len(bm)):
                    r[len(r) - len(bm) + j] = (r[len(r) - len(bm) + j] - c * bm[j]) % p
            r.pop()
            _poly_trim(r)
        a, b = b, r
    return a


def _poly_is_irreducible(low: tuple[int, ...], p: int) -> bool:
    r = len(low)
    m = list(low) + [1]
    x = [0, 1]
    x_red = _poly_mulmod([1], x, m, p)
    # x^(p^r) must equal x, and x^(p^(r/l)) - x must be coprime to m
    fr = x_red
    for _ in range(r):
        fr = _poly_powmod(fr, p, m, p)
    if fr != x_red:
        return False
    for ell in _factorize(r):
        k = r // ell
        g = x
        for _ in range(k):
            g = _poly_powmod(g, p, m, p)
        diff = list(g) + [0] * (2 - len(g))
        diff[1] = (diff[1] - 1) % p
        diff = _poly_trim(diff)
        if not diff:
            return False
        if len(_poly_gcd(m, diff, p)) != 1:
            return False
    return True


def _smallest_irreducible(p: int, r: int) -> tuple[int, ...]:
    """Low coefficients (c0..c_{r-1}) of the lex-smallest monic irreducible."""
    for low in itertools.product(range(p), repeat=r):
        if _poly_is_irreducible(low, p):
            return low
    raise InvariantError(f"no irreducible of degree {r} over F_{p}")  # unreachable


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Repack:
    """Lane layout for carry-free digit accumulation in uint64 words."""

    lane_bits: int
    batch: int  # how many summands fit before lanes must be renormalized
    table: np.ndarray  # packed base-p value -> lane-packed uint64


class Field:
    """The finite field F_{p^r} with its lookup tables.

    Use make_field() rather than calling this directly; the factory
    caches instances so tables are built once per process.
    """

    def __init__(self, p: int, r: int, max_order: int = DEFAULT_MAX_ORDER):
        if p == 2 or not _is_prime(p):
            raise InputError(
                f"odd characteristic required: p must be an odd prime, got {p}"
            )
        if r < 1:
            raise InputError(f"extension degree must be >= 1, got {r}")
        order = p**r
        if order > max_order:
            raise ResourceError(
                f"field order {p}^{r} = {order} exceeds the configured bound {max_order}"
            )
        self.p = p
        self.r = r
        self.order = order
        self.modulus = _smallest_irreducible(p, r)
        self.has_tables = order <= TABLE_MAX_ORDER
        # t^(r+i) mod modulus for i = 0..r-2, to reduce schoolbook products
        red = []
        if r > 1:
            cur = [(-c) % p for c in self.modulus]
            red.append(tuple(cur))
            for _ in range(r - 2):
                top = cur[-1]
                cur = [0] + cur[:-1]
                if top:
                    for j in range(r):
                        cur[j] = (cur[j] - top * self.modulus[j]) % p
                red.append(tuple(cur))
        self._red_rows = tuple(red)
        self.log_zero = 4 * (order - 1)
        self.exp = None
        self.log = None
        self.sq = None
        self.negt = None
        self._pows: list[np.ndarray] | None = None
        self._logpows: list[np.ndarray] | None = None
        self._repack: _Repack | None = None
        self._exp64 = None
        if self.has_tables:
            self._build_tables()

    # -- scalar representation helpers ------------------------------------

    def coeffs(self, x: int) -> tuple[int, ...]:
        """Base-p digits of x, lowest degree first, length r."""
        out = []
        for _ in range(self.r):
            x, d = divmod(x, self.p)
            out.append(d)
        return tuple(out)

    def from_coeffs(self, cs) -> int:
        x = 0
        for c in reversed(list(cs)):
            x = x * self.p + c % self.p
        return x

    def elements(self):
        return range(self.order)

    # -- scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.r == 1:
            return (a + b) % p
        x, out, shift = 0, 0, 1
        for _ in range(self.r):
            a, da = divmod(a, p)
            b, db = divmod(b, p)
            out += ((da + db) % p) * shift
            shift *= p
        return out

    def neg(self, a: int) -> int:
        if self.negt is not None:
            return int(self.negt[a])
        p = self.p
        out, shift = 0, 1
        for _ in range(self.r):
            a, d = divmod(a, p)
            out += ((p - d) % p) * shift
            shift *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.has_tables:
            return int(self.exp[int(self.log[a]) + int(self.log[b])])
        return self._mul_poly(a, b)

    def _mul_poly(self, a: int, b: int) -> int:
        p, r = self.p, self.r
        da = self.coeffs(a)
        db = self.coeffs(b)
        prod = [0] * (2 * r - 1)
        for i, ai in enumerate(da):
            if ai:
                for j, bj in enumerate(db):
                    prod[i + j] += ai * bj
        low = [c % p for c in prod[:r]]
        for i, row in enumerate(self._red_rows):
            c = prod[r + i] % p
            if c:
                for j in range(r):
                    low[j] = (low[j] + c * row[j]) % p
        return self.from_coeffs(low)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if self.has_tables:
            la = int(self.log[a])
            return int(self.exp[(self.order - 1 - la) % (self.order - 1)])
        return self.pow(a, self.order - 2)

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 1 if n == 0 else 0
        n %= self.order - 1
        result, base = 1, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def square_class(self, a: int) -> SquareClass:
        if self.sq is not None:
            return SquareClass(int(self.sq[a]))
        return self.square_class_euler(a)

    def square_class_euler(self, a: int) -> SquareClass:
        """Square test via a^((q-1)/2); kept separate so both routes can be compared."""
        if a == 0:
            return SquareClass.ZERO
        e = self.pow(a, (self.order - 1) // 2)
        return SquareClass.SQUARE if e == 1 else SquareClass.NONSQUARE

    # -- table construction -------------------------------------------------

    def _find_generator(self) -> int:
        q1 = self.order - 1
        primes = list(_factorize(q1))
        for g in range(2, self.order):
            if all(self._pow_no_tables(g, q1 // ell) != 1 for ell in primes):
                return g
        raise InvariantError("no multiplicative generator found")  # unreachable

    def _mul_by_const_matrix(self, c: int) -> np.ndarray:
        """r x r matrix over F_p of multiplication by c in the digit basis."""
        cols = []
        t = c
        for _ in range(self.r):
            cols.append(self.coeffs(t))
            t = self._shift_up(t)
        return np.array(cols, dtype=np.int64).T % self.p

    def _shift_up(self, a: int) -> int:
        """Multiply by t (the residue class of the variable)."""
        p, r = self.p, self.r
        digits = list(self.coeffs(a))
        top = digits.pop()
        digits = [0] + digits
        if top:
            for j in range(r):
                digits[j] = (digits[j] - top * self.modulus[j]) % p
        return self.from_coeffs(digits)

    def _build_tables(self) -> None:
        q = self.order
        g = self._find_generator()
        self.generator = g
        # exp cycle of length q-1, filled blockwise: a scalar seed block,
        # then repeated linear maps (multiplication by g^B) applied to digits
        cycle = np.zeros(q - 1, dtype=np.uint32)
        block = min(4096, q - 1)
        x = 1
        seed = []
        for _ in range(block):
            seed.append(x)
            x = self._mul_poly_or_int(x, g)
        cycle[:block] = seed
        if q - 1 > block:
            gb = self._pow_no_tables(g, block)
            m = self._mul_by_const_matrix(gb)
            radix = self.p ** np.arange(self.r, dtype=np.int64)
            prev = cycle[:block].astype(np.int64)
            pos = block
            while pos < q - 1:
                n = min(block, q - 1 - pos)
                digits = (prev[:n, None] // radix[None, :]) % self.p
                nxt = (digits @ m.T) % self.p
                packed = (nxt * radix[None, :]).sum(axis=1)
                cycle[pos : pos + n] = packed
                prev = packed
                pos += n
        log = np.full(q, self.log_zero, dtype=np.int32)
        log[cycle] = np.arange(q - 1, dtype=np.int32)
        if int((log[1:] == self.log_zero).sum()) != 0:
            raise InvariantError("exp table does not enumerate the unit group")
        self.log = log
        if q <= FAST_EXP_MAX_ORDER:
            # padded table: one lookup absorbs sums of up to four logs,
            # including the zero sentinel at 4(q-1) and above
            idx = np.arange(16 * (q - 1) + 1, dtype=np.int64)
            exp = np.zeros_like(idx, dtype=np.uint32)
            real = idx < 4 * (q - 1)
            exp[real] = cycle[idx[real] % (q - 1)]
            self.exp = exp
        else:
            exp = np.zeros(q, dtype=np.uint32)
            exp[: q - 1] = cycle
            self.exp = None  # scalar/bulk paths must reduce mod q-1 first
            self._exp_cycle = exp
        # negation table
        arange = np.arange(q, dtype=np.int64)
        packed = np.zeros(q, dtype=np.int64)
        radix = 1
        a = arange
        for _ in range(self.r):
            a, d = np.divmod(a, self.p)
            packed += ((self.p - d) % self.p) * radix
            radix *= self.p
        self.negt = packed.astype(np.uint32)
        # square classes: 2 = nonsquare by default, overwrite squares
        sq = np.full(q, 2, dtype=np.uint8)
        sq[0] = 0
        squares = self.vec_mul(arange.astype(np.uint32)[1:], arange.astype(np.uint32)[1:])
        sq[squares] = 1
        self.sq = sq

    def _mul_poly_or_int(self, a: int, b: int) -> int:
        if self.r == 1:
            return (a * b) % self.p
        return self._mul_poly(a, b)

    def _pow_no_tables(self, a: int, n: int) -> int:
        result, base = 1, a
        while n:
            if n & 1:
                result = self._mul_poly_or_int(result, base)
            n >>= 1
            if n:
                base = self._mul_poly_or_int(base, base)
        return result

    # -- vector arithmetic (numpy, packed uint32 arrays) ---------------------

    def _require_tables(self) -> None:
        if not self.has_tables:
            raise ResourceError(
                f"field of order {self.order} has no tables; vector ops unavailable"
            )

    def vec_exp(self, idx: np.ndarray) -> np.ndarray:
        """exp of summed logs; idx may contain zero sentinels (>= 4(q-1))."""
        if self.exp is not None:
            return self.exp[idx]
        q1 = self.order - 1
        reduced = np.where(idx < 4 * q1, idx % q1, q1)
        return self._exp_cycle[reduced]

    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        self._require_tables()
        return self.vec_exp(self.log[a].astype(np.int64) + self.log[b])

    def vec_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p = self.p
        if self.r == 1:
            return ((a.astype(np.int64) + b) % p).astype(np.uint32)
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        radix = 1
        aa, bb = a.astype(np.int64), b.astype(np.int64)
        for _ in range(self.r):
            aa, da = np.divmod(aa, p)
            bb, db = np.divmod(bb, p)
            out += ((da + db) % p) * radix
            radix *= p
        return out.astype(np.uint32)

    def pow_tables(self, emax: int):
        """(pows, logpows): x^e and log(x^e) for all x, e = 0..emax."""
        self._require_tables()
        if self._pows is None or len(self._pows) <= emax:
            q = self.order
            ones = np.ones(q, dtype=np.uint32)
            base = np.arange(q, dtype=np.uint32)
            pows = [ones, base]
            while len(pows) <= max(emax, 5):
                pows.append(self.vec_mul(pows[-1], base))
            self._pows = pows
            self._logpows = [self.log[pw].astype(np.int32) for pw in pows]
        return self._pows, self._logpows

    def repack(self) -> _Repack:
        """Carry-free lane layout for summing many products, see bulk.py."""
        self._require_tables()
        if self._repack is None:
            q, p, r = self.order, self.p, self.r
            lane_bits = 64 // r
            batch = ((1 << lane_bits) - 1) // (p - 1)
            if batch < 1:
                raise ResourceError(f"cannot lane-pack digits for p={p}, r={r}")
            arange = np.arange(q, dtype=np.uint64)
            table = np.zeros(q, dtype=np.uint64)
            a = arange.copy()
            for i in range(r):
                a, d = np.divmod(a, np.uint64(p))
                table |= d << np.uint64(lane_bits * i)
            self._repack = _Repack(lane_bits, batch, table)
        return self._repack

    def exp64(self) -> np.ndarray:
        """Lane-packed exp table (only for fast-path orders)."""
        self._require_tables()
        if self._exp64 is None:
            if self.exp is None:
                raise ResourceError("no padded exp table at this field order")
            self._exp64 = self.repack().table[self.exp]
        return self._exp64

    def __repr__(self) -> str:
        return f"Field(p={self.p}, r={self.r}, order={self.order})"


@lru_cache(maxsize=None)
def make_field(p: int, r: int, max_order: int = DEFAULT_MAX_ORDER) -> Field:
    """Deterministic F_{p^r}: same (p, r) always yields the same field."""
    return Field(p, r, max_order)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    """Ring embedding F_{p^a} -> F_{p^{ab}}.

    The source generator maps to the smallest root (in packed-int order)
    of the source modulus inside the target field, so the embedding is
    deterministic and respects + and *.
    """

    src: Field
    dst: Field
    root_powers: tuple[int, ...]

    def __call__(self, x: int) -> int:
        dst = self.dst
        out = 0
        for d, rp in zip(self.src.coeffs(x), self.root_powers):
            if d:
                out = dst.add(out, dst.mul(d, rp))
        return out


def make_embedding(src: Field, dst: Field) -> Embedding:
    if src.p != dst.p or dst.r % src.r != 0:
        raise InputError(
            f"no embedding F_{src.p}^{src.r} -> F_{dst.p}^{dst.r}: "
            "target degree must be a multiple of the source degree"
        )
    root = _first_modulus_root(src, dst)
    powers = [1]
    for _ in range(src.r - 1):
        powers.append(dst.mul(powers[-1], root))
    emb = Embedding(src, dst, tuple(powers))
    if emb(1) != 1:
        raise InvariantError("embedding does not fix 1")
    return emb


def _first_modulus_root(src: Field, dst: Field) -> int:
    coeffs = list(src.modulus) + [1]
    if dst.has_tables:
        vals = np.zeros(dst.order, dtype=np.uint32)
        vals[:] = coeffs[-1]
        base = np.arange(dst.order, dtype=np.uint32)
        for c in reversed(coeffs[:-1]):
            vals = dst.vec_mul(vals, base)
            if c:
                vals = dst.vec_add(vals, np.full(dst.order, c, dtype=np.uint32))
        zeros = np.flatnonzero(vals == 0)
        if zeros.size == 0:
            raise InvariantError("source modulus has no root in target field")
        return int(zeros[0])
    for x in dst.elements():
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = dst.add(dst.mul(acc, x), c)
        if acc == 0:
            return x
    raise InvariantError("source modulus has no root in target field")
