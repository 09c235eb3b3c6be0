"""Vectorized evaluation of forms at many field points at once.

Strategy: elements are table indices, so a product of up to three
variable powers and a coefficient becomes one gather from a padded exp
table indexed by the sum of their discrete logs (zeros ride along as a
sentinel log that lands in a zeroed stretch of the table). Sums of many
such products are accumulated carry-free in uint64 lanes, one base-p
digit per lane, and reduced mod p only at batch boundaries. This keeps
the inner loops at a handful of numpy ops per monomial.
"""

from __future__ import annotations

import numpy as np

from .field import Field
from .forms import Form


def prepare_terms(form: Form):
    """Compile a form into (log coeff, ((var, exp), ...)) tuples."""
    log = form.field.log
    out = []
    for e, c in form.sorted_terms():
        factors = tuple((i, k) for i, k in enumerate(e) if k)
        if len(factors) > 3:
            raise ValueError("bulk evaluation supports at most 3 distinct variables per monomial")
        out.append((int(log[c]), factors))
    return out


class BulkEval:
    """Per-field scratch state for vectorized form evaluation."""

    def __init__(self, field: Field, max_exp: int = 5):
        field._require_tables()
        self.field = field
        self.pows, self.logpows = field.pow_tables(max_exp)
        self.p = field.p
        self.r = field.r
        if field.r == 1:
            self.lane_bits = 0
            self.batch = (1 << 62) // (field.p - 1)
        else:
            rp = field.repack()
            self.lane_bits = rp.lane_bits
            self.batch = rp.batch
            self._rp_table = rp.table
        self._exp64 = field.exp64() if (field.r > 1 and field.exp is not None) else None

    # -- lane helpers -------------------------------------------------------

    def term64(self, idx: np.ndarray) -> np.ndarray:
        """Lane-packed field value exp(idx) for an array of log sums."""
        if self.r == 1:
            return self.field.vec_exp(idx).astype(np.uint64)
        if self._exp64 is not None:
            return self._exp64[idx]
        return self._rp_table[self.field.vec_exp(idx)]

    def renorm(self, acc: np.ndarray) -> np.ndarray:
        p = np.uint64(self.p)
        if self.r == 1:
            return acc % p
        out = np.zeros_like(acc)
        mask = np.uint64((1 << self.lane_bits) - 1)
        for i in range(self.r):
            sh = np.uint64(self.lane_bits * i)
            out |= ((acc >> sh) & mask) % p << sh
        return out

    def extract(self, acc: np.ndarray) -> np.ndarray:
        """Lane accumulator -> packed field values."""
        p = np.uint64(self.p)
        if self.r == 1:
            return (acc % p).astype(np.uint32)
        mask = np.uint64((1 << self.lane_bits) - 1)
        out = np.zeros(acc.shape, dtype=np.uint32)
        radix = np.uint32(1)
        for i in range(self.r):
            sh = np.uint64(self.lane_bits * i)
            out += (((acc >> sh) & mask) % p).astype(np.uint32) * radix
            radix *= np.uint32(self.p)
        return out

    def is_zero(self, acc: np.ndarray) -> np.ndarray:
        p = np.uint64(self.p)
        if self.r == 1:
            return (acc % p) == 0
        mask = np.uint64((1 << self.lane_bits) - 1)
        bad = np.zeros(acc.shape, dtype=np.uint64)
        for i in range(self.r):
            sh = np.uint64(self.lane_bits * i)
            bad |= ((acc >> sh) & mask) % p
        return bad == 0

    # -- generic form evaluation ---------------------------------------------

    def accumulate(self, terms, coords, shape) -> np.ndarray:
        """Sum the prepared terms at the given coordinate arrays (lane packed)."""
        acc = np.zeros(shape, dtype=np.uint64)
        pending = 0
        for logc, factors in terms:
            idx = None
            for var, k in factors:
                lp = self.logpows[k][coords[var]]
                idx = lp.astype(np.int64) if idx is None else idx + lp
            idx = np.int64(logc) + (0 if idx is None else idx)
            if np.isscalar(idx) or idx.shape == ():
                idx = np.broadcast_to(np.asarray(idx), shape)
            acc += self.term64(idx)
            pending += 1
            if pending >= self.batch:
                acc = self.renorm(acc)
                pending = 0
        return acc

    def eval_terms(self, terms, coords, shape) -> np.ndarray:
        return self.extract(self.accumulate(terms, coords, shape))

    def eval_form(self, form: Form, coords) -> np.ndarray:
        shape = np.broadcast(*coords).shape if len(coords) > 1 else coords[0].shape
        return self.eval_terms(prepare_terms(form), coords, shape)


def decode_grid(flat: np.ndarray, order: int, nvars: int) -> list[np.ndarray]:
    """Flat odometer index -> packed coordinates, last variable fastest."""
    coords = []
    t = flat.astype(np.int64)
    for j in range(nvars - 1, -1, -1):
        coords.append((t % order).astype(np.uint32))
        t //= order
    coords.reverse()
    return coords


def iter_ranges(total: int, chunk: int):
    for t0 in range(0, total, chunk):
        yield t0, min(total, t0 + chunk)
