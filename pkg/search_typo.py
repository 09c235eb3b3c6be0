"""Pair-edit search for the intended example cubic.

The displayed equation does not reproduce the displayed invariants; this
scans two-coefficient modifications for one that does.
"""
import itertools
import sys
import time

from fanozeta import make_field
from fanozeta.forms import make_cubic
from fanozeta.cubic import Line, normalize
from fanozeta.counting import count_difference

ELL = {('l1', (1, 0, 0)): 1, ('l2', (0, 1, 0)): 1, ('l3', (0, 0, 1)): 1}
Q1 = {(2, 0, 0): 1, (0, 2, 0): 2, (0, 1, 1): 1, (0, 0, 2): 1}
Q2 = {(1, 1, 0): 1, (0, 1, 1): 4, (0, 0, 2): 1}
FC = {(0, 2, 1): 1, (3, 0, 0): -1, (1, 2, 0): -4, (0, 3, 0): -2}

mons1 = [m for m in itertools.product(range(2), repeat=3) if sum(m) == 1]
mons2 = [m for m in itertools.product(range(3), repeat=3) if sum(m) == 2]
mons3 = [m for m in itertools.product(range(4), repeat=3) if sum(m) == 3]

# slot: (form_name, monomial); current value
slots = {}
for m in mons1:
    slots[('l1', m)] = 1 if m == (1, 0, 0) else 0
    slots[('l2', m)] = 1 if m == (0, 1, 0) else 0
    slots[('l3', m)] = 1 if m == (0, 0, 1) else 0
for m in mons2:
    slots[('q1', m)] = Q1.get(m, 0)
    slots[('q2', m)] = Q2.get(m, 0)
for m in mons3:
    slots[('f', m)] = FC.get(m, 0)

VALUES = {
    'l1': range(-2, 3), 'l2': range(-2, 3), 'l3': range(-2, 3),
    'q1': range(-4, 5), 'q2': range(-4, 5), 'f': range(-4, 5),
}

FIELDS = {p: make_field(p, 1) for p in (5, 7, 11)}
LINES = {p: Line.from_rows(FIELDS[p], [(0, 0, 0, 1, 0), (0, 0, 0, 0, 1)]) for p in FIELDS}
WANT_D1 = {5: 0, 7: 4, 11: -1}
WANT_D2 = {5: 14, 7: 14, 11: 25}


def build_terms(edits):
    cur = dict(slots)
    cur.update(edits)
    terms = []
    for (name, m), c in cur.items():
        if not c:
            continue
        if name == 'l1':
            terms.append((m + (2, 0), c))
        elif name == 'l2':
            terms.append((m + (1, 1), 2 * c))
        elif name == 'l3':
            terms.append((m + (0, 2), c))
        elif name == 'q1':
            terms.append((m + (1, 0), 2 * c))
        elif name == 'q2':
            terms.append((m + (0, 1), 2 * c))
        else:
            terms.append((m + (0, 0), c))
    return terms


def passes(terms, p, r, want):
    F = FIELDS[p]
    try:
        cub = make_cubic(F, terms)
        fr = normalize(cub, LINES[p])
    except Exception:
        return False
    return count_difference(fr, r, engine='scalar').d == want


def full_check(terms):
    for p in (5, 7, 11):
        if not passes(terms, p, 1, WANT_D1[p]):
            return False
    for p in (5, 7, 11):
        if not passes(terms, p, 2, WANT_D2[p]):
            return False
    return True


def main():
    slot_list = list(slots)
    hits = []
    t0 = time.time()
    tried = 0
    for i, j in itertools.combinations(range(len(slot_list)), 2):
        s1, s2 = slot_list[i], slot_list[j]
        for v1 in VALUES[s1[0]]:
            if v1 == slots[s1]:
                continue
            for v2 in VALUES[s2[0]]:
                if v2 == slots[s2]:
                    continue
                terms = build_terms({s1: v1, s2: v2})
                tried += 1
                if passes(terms, 5, 1, 0) and passes(terms, 7, 1, 4):
                    if full_check(terms):
                        hits.append((s1, v1, s2, v2))
                        print('FULL HIT:', s1, v1, s2, v2, flush=True)
        if i % 5 == 0:
            print(f'... slot {i}/{len(slot_list)} tried={tried} {time.time()-t0:.0f}s', flush=True)
    print('done', tried, 'candidates', len(hits), 'hits in', time.time() - t0, 's')


if __name__ == '__main__':
    main()
