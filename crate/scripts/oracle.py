"""Independent exact oracle for pattern and step-permuton densities.

Shares no code with the Rust crates. Step densities sum over assignments of the
k sample points to grid cells; within a shared row (or column) block the order
is uniform, so each tie structure has a fixed pattern distribution.
"""
from fractions import Fraction as Fr
from itertools import combinations, permutations, product
from functools import lru_cache
import json
import sys

import sympy


def pattern_of(seq):
    s = sorted(seq)
    return tuple(s.index(v) + 1 for v in seq)


def density(pattern, host):
    k = len(pattern)
    subs = list(combinations(range(len(host)), k))
    hit = sum(pattern_of([host[i] for i in c]) == tuple(pattern) for c in subs)
    return Fr(hit, len(subs))


@lru_cache(maxsize=None)
def tie_distribution(rows, cols):
    """Pattern distribution of k points whose row and column blocks are given."""
    k = len(rows)
    counts = {}
    total = 0
    for xs in permutations(range(k)):
        if any(rows[a] < rows[b] and xs[a] > xs[b] for a in range(k) for b in range(k)):
            continue
        for ys in permutations(range(k)):
            if any(cols[a] < cols[b] and ys[a] > ys[b] for a in range(k) for b in range(k)):
                continue
            order = sorted(range(k), key=lambda p: xs[p])
            pat = pattern_of([ys[p] for p in order])
            counts[pat] = counts.get(pat, 0) + 1
            total += 1
    return {p: Fr(c, total) for p, c in counts.items()}


def normalize(t):
    ranks = sorted(set(t))
    return tuple(ranks.index(v) for v in t)


def step_sum(a, patterns, k):
    """Sum over `patterns` of densities in the step permuton of `a` (rows = positions)."""
    n = len(a)
    cells = [(r, c) for r in range(n) for c in range(n) if a[r][c] != 0]
    total = Fr(0)
    for assign in product(cells, repeat=k):
        w = Fr(1)
        for r, c in assign:
            w *= a[r][c] / n
        dist = tie_distribution(normalize([r for r, _ in assign]), normalize([c for _, c in assign]))
        total += w * sum(dist.get(p, 0) for p in patterns)
    return total


def perturbed(x, n):
    a = [[Fr(1, n)] * n for _ in range(n)]
    m = n - 1
    for i in range(m):
        for j in range(m):
            v = x[i * m + j]
            a[i][j] += v
            a[i + 1][j + 1] += v
            a[i][j + 1] -= v
            a[i + 1][j] -= v
    return a


def line_poly(patterns, n, direction, degree=4):
    """Coefficients of t -> h(t * direction), by exact interpolation."""
    ts = [Fr(i, 64 * n) for i in range(-2, degree - 1)]
    vals = [step_sum(perturbed([t * d for d in direction], n), patterns, 4) for t in ts]
    t = sympy.symbols("t")
    poly = sympy.interpolate(list(zip([sympy.Rational(v.numerator, v.denominator) for v in ts],
                                      [sympy.Rational(v.numerator, v.denominator) for v in vals])), t)
    return sympy.Poly(poly, t).all_coeffs()[::-1]


def unit(m2, a, b=None):
    v = [Fr(0)] * m2
    v[a] += 1
    if b is not None:
        v[b] += 1
    return v


def gradient(patterns, n):
    m2 = (n - 1) ** 2
    out = []
    for a in range(m2):
        c = line_poly(patterns, n, unit(m2, a))
        out.append(c[1] if len(c) > 1 else 0)
    return out


def hessian(patterns, n):
    m2 = (n - 1) ** 2
    q = lambda v: 2 * (lambda c: c[2] if len(c) > 2 else 0)(line_poly(patterns, n, v))
    diag = [q(unit(m2, a)) for a in range(m2)]
    h = sympy.zeros(m2, m2)
    for a in range(m2):
        h[a, a] = diag[a]
        for b in range(a + 1, m2):
            h[a, b] = h[b, a] = (q(unit(m2, a, b)) - diag[a] - diag[b]) / 2
    return h


def inertia(h):
    ev = h.eigenvals()
    pos = sum(m for e, m in ev.items() if e > 0)
    neg = sum(m for e, m in ev.items() if e < 0)
    return pos, neg, h.shape[0] - pos - neg


def parse_set(text):
    return [tuple(int(ch) for ch in w) for w in text.split(",")]


if __name__ == "__main__":
    report = {}
    report["density 21 in 312"] = str(density((2, 1), (3, 1, 2)))
    report["density 132 in 2413"] = str(density((1, 3, 2), (2, 4, 1, 3)))
    report["density 2413 in 35142"] = str(density((2, 4, 1, 3), (3, 5, 1, 4, 2)))
    a = [[Fr(1, 2), Fr(1, 2), Fr(0)], [Fr(1, 4), Fr(1, 4), Fr(1, 2)], [Fr(1, 4), Fr(1, 4), Fr(1, 2)]]
    for p in ["1234", "2143", "1324", "4321", "2413"]:
        report[f"step {p}"] = str(step_sum(a, [tuple(map(int, p))], 4))
    report["step 12"] = str(step_sum(a, [(1, 2)], 2))
    report["step 231"] = str(step_sum(a, [(2, 3, 1)], 3))
    six = [[Fr(int(j == c)) for j in range(1, 7)] for c in [4, 5, 1, 3, 6, 2]]
    report["six_by_six"] = str(step_sum(six, parse_set("1342,1423,2314,2431,3124,3241,4132,4213"), 4))
    for name, s in [("1234", "1234"), ("2413,3142", "2413,3142")]:
        for n in (3, 4):
            report[f"gradient {name} n={n}"] = [str(v) for v in gradient(parse_set(s), n)]
    for name in ["1234", "1234,2143,3412,4321", "1342,1423,2314,2431,3124,3241,4132,4213"]:
        h = hessian(parse_set(name), 3)
        report[f"hessian {name} n=3"] = [[str(v) for v in row] for row in h.tolist()]
        report[f"inertia {name} n=3"] = inertia(h)
    json.dump(report, sys.stdout, indent=1)
