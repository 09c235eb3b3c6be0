"""The counting loop: degenerate conics over P^2(F_{q^r}), split or not.

For each point x of the projective plane with vanishing discriminant,
the first nonzero diagonal minor (taken in the order delta3, delta1,
delta2) decides the two lines of the degenerate conic: minus-the-minor a
nonzero square means both are rational (+1), a nonsquare means a
conjugate pair (-1), and all minors vanishing marks a singular point of
the discriminant curve (0). The per-extension totals D_r feed the Weil
polynomial reconstruction.

Counting is data-parallel over contiguous chunks of the canonical point
enumeration; per-chunk tallies are summed, so results are independent of
chunk size and thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .bulk import BulkEval, prepare_terms
from .cubic import LineFrame
from .errors import InvariantError, PartialDataError, ResourceError
from .field import Field, make_embedding, make_field

DEFAULT_CHUNK = 1 << 16


def p2_size(q: int) -> int:
    return q * q + q + 1


def enumerate_p2(field: Field):
    """Canonical P^2 representatives: (1:y:z), then (0:1:z), then (0:0:1)."""
    q = field.order
    for y in range(q):
        for z in range(q):
            yield (1, y, z)
    for z in range(q):
        yield (0, 1, z)
    yield (0, 0, 1)


def p2_point_at(q: int, t: int) -> tuple[int, int, int]:
    """The t-th point of the canonical enumeration."""
    if t < q * q:
        return (1, t // q, t % q)
    t -= q * q
    if t < q:
        return (0, 1, t)
    return (0, 0, 1)


@dataclass(frozen=True)
class CountRow:
    """Tallies for one extension degree r."""

    r: int
    d: int
    split: int
    nonsplit: int
    singular: int
    gamma_points: int
    coherence_checked: int
    seconds: float

    def __post_init__(self):
        if self.split + self.nonsplit + self.singular != self.gamma_points:
            raise InvariantError("split + nonsplit + singular != points on the quintic")
        if self.d != self.split - self.nonsplit:
            raise InvariantError("D_r != split - nonsplit")

    def same_counts(self, other: "CountRow") -> bool:
        keys = ("r", "d", "split", "nonsplit", "singular", "gamma_points")
        return all(getattr(self, k) == getattr(other, k) for k in keys)


@dataclass
class CountReport:
    """Per-extension counts for r = 1..rmax."""

    p: int
    base_degree: int
    q: int
    rows: dict[int, CountRow] = dc_field(default_factory=dict)

    def d_values(self, rmax: int) -> list[int]:
        missing = [r for r in range(1, rmax + 1) if r not in self.rows]
        if missing:
            raise PartialDataError(f"count report lacks extensions {missing}")
        return [self.rows[r].d for r in range(1, rmax + 1)]

    def max_r(self) -> int:
        return max(self.rows, default=0)


class _Context:
    """Embedded forms and tables for one extension degree."""

    def __init__(self, frame: LineFrame, r: int):
        base = frame.field
        self.ext = make_field(base.p, base.r * r)
        self.q = self.ext.order
        emb = make_embedding(base, self.ext)
        self.quintic = frame.quintic.map_coefficients(emb)
        self.deltas = [
            frame.delta1.map_coefficients(emb),
            frame.delta2.map_coefficients(emb),
            frame.delta3.map_coefficients(emb),
        ]
        self.bulk_ready = self.ext.has_tables
        if self.bulk_ready:
            self._prep_bulk()

    def _prep_bulk(self):
        ext = self.ext
        self.be = BulkEval(ext)
        _, logpows = ext.pow_tables(5)
        self.logpows = logpows
        # chart 1 (x1 = 1): value = sum_k coeff_k(y) z^k with
        # coeff_k(y) = sum_j c[(5-j-k, j, k)] y^j
        self.zcoeffs: list[list[tuple[int, int]]] = [[] for _ in range(6)]
        for (i, j, k), c in self.quintic.sorted_terms():
            self.zcoeffs[k].append((j, c))
        # chart 2 (0:1:z): only i == 0 monomials contribute c * z^k
        chart2 = [0] * 6
        for (i, j, k), c in self.quintic.terms.items():
            if i == 0:
                chart2[k] = c
        self.chart2_coeffs = chart2
        self.chart3_value = self.quintic.terms.get((0, 0, 5), 0)
        self.delta_terms = [prepare_terms(d) for d in self.deltas]

    def row_coeff_logs(self, y: int):
        """Logs of the six z-coefficients of the quintic along the row x2 = y."""
        ext = self.ext
        out = []
        for pairs in self.zcoeffs:
            acc = 0
            for j, c in pairs:
                acc = ext.add(acc, ext.mul(c, ext.pow(y, j)))
            out.append(int(ext.log[acc]))
        return out


def _classify_bulk(ctx: _Context, x1, x2, x3):
    """Split/nonsplit/singular tallies for points on the quintic."""
    ext = ctx.ext
    be = ctx.be
    n = x1.shape[0]
    coords = [x1, x2, x3]
    d3 = be.eval_terms(ctx.delta_terms[2], coords, (n,))
    cls3 = ext.sq[ext.negt[d3]]
    split = int((cls3 == 1).sum())
    nonsplit = int((cls3 == 2).sum())
    rest = np.flatnonzero(cls3 == 0)
    singular = 0
    checked = 0
    if rest.size:
        sub = [c[rest] for c in coords]
        d1 = be.eval_terms(ctx.delta_terms[0], sub, (rest.size,))
        d2 = be.eval_terms(ctx.delta_terms[1], sub, (rest.size,))
        cls1 = ext.sq[ext.negt[d1]]
        cls2 = ext.sq[ext.negt[d2]]
        both = (cls1 != 0) & (cls2 != 0)
        checked = int(both.sum())
        if checked and int((cls1[both] != cls2[both]).sum()):
            raise InvariantError(
                "square classes of -delta1 and -delta2 disagree at a delta3 = 0 point"
            )
        use = np.where(cls1 != 0, cls1, cls2)
        split += int((use == 1).sum())
        nonsplit += int((use == 2).sum())
        singular = int((use == 0).sum())
    return split, nonsplit, singular, checked


def _chunk_bulk(ctx: _Context, t0: int, t1: int):
    q = ctx.q
    ext = ctx.ext
    be = ctx.be
    logz = ctx.logpows
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    zs: list[np.ndarray] = []

    a1 = min(t1, q * q)
    if t0 < a1:
        y0, y_last = t0 // q, (a1 - 1) // q
        for y in range(y0, y_last + 1):
            z_lo = t0 - y * q if y == y0 else 0
            z_hi = a1 - y * q if y == y_last else q
            clogs = ctx.row_coeff_logs(y)
            acc = np.zeros(z_hi - z_lo, dtype=np.uint64)
            pending = 0
            for k in range(6):
                idx = clogs[k] + logz[k][z_lo:z_hi].astype(np.int64)
                acc += be.term64(idx)
                pending += 1
                if pending >= be.batch:
                    acc = be.renorm(acc)
                    pending = 0
            hits = np.flatnonzero(be.is_zero(acc))
            if hits.size:
                zz = (hits + z_lo).astype(np.uint32)
                xs.append(np.ones(zz.size, dtype=np.uint32))
                ys.append(np.full(zz.size, y, dtype=np.uint32))
                zs.append(zz)

    b0, b1 = max(t0, q * q), min(t1, q * q + q)
    if b0 < b1:
        z_lo, z_hi = b0 - q * q, b1 - q * q
        acc = np.zeros(z_hi - z_lo, dtype=np.uint64)
        pending = 0
        for k in range(6):
            c = ctx.chart2_coeffs[k]
            idx = int(ext.log[c]) + logz[k][z_lo:z_hi].astype(np.int64)
            acc += be.term64(idx)
            pending += 1
            if pending >= be.batch:
                acc = be.renorm(acc)
                pending = 0
        hits = np.flatnonzero(be.is_zero(acc))
        if hits.size:
            zz = (hits + z_lo).astype(np.uint32)
            xs.append(np.zeros(zz.size, dtype=np.uint32))
            ys.append(np.ones(zz.size, dtype=np.uint32))
            zs.append(zz)

    if t1 == q * q + q + 1 and ctx.chart3_value == 0:
        xs.append(np.zeros(1, dtype=np.uint32))
        ys.append(np.zeros(1, dtype=np.uint32))
        zs.append(np.ones(1, dtype=np.uint32))

    if not xs:
        return 0, 0, 0, 0, 0
    x1 = np.concatenate(xs)
    x2 = np.concatenate(ys)
    x3 = np.concatenate(zs)
    split, nonsplit, singular, checked = _classify_bulk(ctx, x1, x2, x3)
    return split, nonsplit, singular, int(x1.size), checked


def _chunk_scalar(ctx: _Context, t0: int, t1: int):
    ext = ctx.ext
    q = ctx.q
    split = nonsplit = singular = gamma = checked = 0
    for t in range(t0, t1):
        pt = p2_point_at(q, t)
        if ctx.quintic.evaluate(pt) != 0:
            continue
        gamma += 1
        d3 = ctx.deltas[2].evaluate(pt)
        cls = int(ext.square_class(ext.neg(d3)))
        if cls == 0:
            d1 = ctx.deltas[0].evaluate(pt)
            d2 = ctx.deltas[1].evaluate(pt)
            c1 = int(ext.square_class(ext.neg(d1)))
            c2 = int(ext.square_class(ext.neg(d2)))
            if c1 and c2:
                checked += 1
                if c1 != c2:
                    raise InvariantError(
                        "square classes of -delta1 and -delta2 disagree at a delta3 = 0 point"
                    )
            cls = c1 if c1 else c2
        if cls == 1:
            split += 1
        elif cls == 2:
            nonsplit += 1
        else:
            singular += 1
    return split, nonsplit, singular, gamma, checked


def count_difference(
    frame: LineFrame,
    r: int,
    *,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    engine: str = "auto",
    progress=None,
) -> CountRow:
    """Run the delta-test loop over P^2(F_{q^r}) and tally the outcome."""
    t_start = time.perf_counter()
    ctx = _Context(frame, r)
    if engine == "auto":
        engine = "bulk" if ctx.bulk_ready else "scalar"
    if engine == "bulk" and not ctx.bulk_ready:
        raise ResourceError(f"field of order {ctx.q} has no tables; bulk engine unavailable")
    worker = _chunk_bulk if engine == "bulk" else _chunk_scalar
    total = p2_size(ctx.q)
    ranges = [(t0, min(total, t0 + chunk_size)) for t0 in range(0, total, chunk_size)]
    tallies = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(worker, ctx, t0, t1) for t0, t1 in ranges]
            done = 0
            for (t0, t1), fut in zip(ranges, futures):
                tallies.append(fut.result())
                done += t1 - t0
                if progress:
                    progress(done, total)
    else:
        done = 0
        for t0, t1 in ranges:
            tallies.append(worker(ctx, t0, t1))
            done += t1 - t0
            if progress:
                progress(done, total)
    split = sum(t[0] for t in tallies)
    nonsplit = sum(t[1] for t in tallies)
    singular = sum(t[2] for t in tallies)
    gamma = sum(t[3] for t in tallies)
    checked = sum(t[4] for t in tallies)
    return CountRow(
        r=r,
        d=split - nonsplit,
        split=split,
        nonsplit=nonsplit,
        singular=singular,
        gamma_points=gamma,
        coherence_checked=checked,
        seconds=time.perf_counter() - t_start,
    )


def count_all(
    frame: LineFrame,
    rmax: int = 5,
    *,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    engine: str = "auto",
    progress=None,
    completed: dict[int, CountRow] | None = None,
    row_done=None,
) -> CountReport:
    """Counts for r = 1..rmax, reusing completed rows and reporting new ones.

    row_done(row) fires after each freshly computed extension, which is
    the checkpointing hook. On a resource error the partial report is
    attached to the exception.
    """
    base = frame.field
    report = CountReport(p=base.p, base_degree=base.r, q=base.order)
    if completed:
        report.rows.update({r: row for r, row in completed.items() if r <= rmax})
    for r in range(1, rmax + 1):
        if r in report.rows:
            continue
        try:
            row = count_difference(
                frame,
                r,
                threads=threads,
                chunk_size=chunk_size,
                engine=engine,
                progress=progress,
            )
        except ResourceError as exc:
            exc.partial = report
            raise
        report.rows[r] = row
        if row_done:
            row_done(row)
    return report
