"""Independent reference computations used as oracles by the test suite.

Nothing here calls the library's loop, broken-line or extraction code; the
arithmetic goes through sympy polynomials instead of TruncatedSeries.
"""

from __future__ import annotations

import math
from fractions import Fraction

import sympy

Z1, Z2 = sympy.symbols("zeta1 zeta2")
ZETAS = (Z1, Z2)


def truncate(expr, order):
    expr = sympy.expand(expr)
    if expr == 0:
        return sympy.Integer(0)
    poly = sympy.Poly(expr, *ZETAS)
    return sum((c * Z1 ** a * Z2 ** b for (a, b), c in poly.terms() if a + b <= order), sympy.Integer(0))


def series_to_sympy(f):
    return sum((sympy.Rational(c.numerator, c.denominator) * Z1 ** n[0] * Z2 ** n[1] for n, c in f.terms.items()),
               sympy.Integer(0))


def sympy_power(f, e, order):
    """f**e truncated, for f with constant term 1 and any integer e."""
    if e >= 0:
        out = sympy.Integer(1)
        for _ in range(e):
            out = truncate(out * f, order)
        return out
    u = sympy.expand(1 - f)
    inv = sympy.Integer(1)
    term = sympy.Integer(1)
    for _ in range(order):
        term = truncate(term * u, order)
        inv = inv + term
    return sympy_power(truncate(inv, order), -e, order)


def n_circ(n, d):
    t = 1
    while any((t * x) % di for x, di in zip(n, d)):
        t += 1
    return tuple(t * x for x in n)


def pair(m, n, d):
    return sum(Fraction(a * b, di) for a, b, di in zip(m, n, d))


def wall_rays(diagram):
    """(angle, direction, normal, f) for every ray of every wall, unmerged."""
    out = []
    for w in diagram.walls:
        if w.direction is not None:
            dirs = [w.direction]
        else:
            n = w.normal
            g = math.gcd(n[0], n[1])
            p = (-n[1] // g, n[0] // g)
            dirs = [p, (-p[0], -p[1])]
        for r in dirs:
            out.append((math.atan2(r[1], r[0]) % (2 * math.pi), tuple(r), w.normal, w.f))
    out.sort(key=lambda t: t[0])
    return out


def loop_images(diagram, order, generators=((1, 0), (0, 1), (-1, 0), (0, -1))):
    """Images of the z^g under the counterclockwise loop, as {g: {g': sympy series}}."""
    B, d = diagram.B, diagram.d
    rays = wall_rays(diagram)
    results = {}
    for g0 in generators:
        elem = {tuple(g0): sympy.Integer(1)}
        for _, r, n, f in rays:
            velocity = (-r[1], r[0])
            eps = -1 if pair(velocity, n, d) > 0 else 1
            nc = n_circ(n, d)
            fs = series_to_sympy(f.truncate(order))
            new = {}
            for g, expr in elem.items():
                poly = sympy.Poly(sympy.expand(expr), *ZETAS) if expr != 0 else None
                if poly is None:
                    continue
                acc = sympy.Integer(0)
                for (a, b), c in poly.terms():
                    m = (g[0] + a * B[0][0] + b * B[1][0], g[1] + a * B[0][1] + b * B[1][1])
                    e = eps * pair(m, nc, d)
                    assert e.denominator == 1
                    acc += c * Z1 ** a * Z2 ** b * sympy_power(fs, int(e), order)
                new[g] = truncate(acc, order)
            elem = new
        results[tuple(g0)] = elem
    return results


def loop_is_identity(diagram, order) -> bool:
    for g0, elem in loop_images(diagram, order).items():
        for g, expr in elem.items():
            target = 1 if g == g0 else 0
            if sympy.expand(expr - target) != 0:
                return False
    return True


# broken lines -----------------------------------------------------------------------


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _primitive(v):
    g = math.gcd(*[abs(x) for x in v])
    return tuple(x // g for x in v)


def walls_through(diagram, P):
    """(normal, f) of every wall ray that contains the point P != 0."""
    return [(n, f) for _, r, n, f in wall_rays(diagram) if _cross(r, P) == 0 and _dot(r, P) > 0]


def _segment_hits_origin(a, b):
    if a is None:
        return False
    return _cross(a, b) == 0 and _dot(a, b) <= 0


def broken_line_violations(diagram, line, m, Q, order=None):
    """Reasons the path fails the broken-line conditions; empty when it is a broken line."""
    B, d = diagram.B, diagram.d
    problems = []
    doms = line.domains
    Q = tuple(Fraction(x) for x in Q)
    if tuple(doms[-1].end) != Q:
        problems.append("(i) path does not end at Q")
    first = doms[0]
    if first.start is not None or any(dom.start is None for dom in doms[1:]):
        problems.append("only the first domain may be unbounded")
    if (first.coeff, tuple(first.m), tuple(first.n)) != (1, tuple(m), (0,) * len(m)):
        problems.append("(iv) unbounded domain is not labelled z^m")
    for dom in doms:
        if tuple(dom.m) != tuple(a + sum(dom.n[i] * B[i][j] for i in range(2)) for j, a in enumerate(m)):
            problems.append(f"label {dom.m} is not m + n B for n = {dom.n}")
        if dom.start is not None:
            step = tuple(b - a for a, b in zip(dom.start, dom.end))
            if _cross(step, dom.m) != 0 or _dot(step, dom.m) >= 0:
                problems.append(f"(iii) segment {dom.start}->{dom.end} does not move along -{dom.m}")
        if _segment_hits_origin(dom.start, dom.end) or not any(dom.end):
            problems.append("(ii) path meets the origin")
    for a, b in zip(doms, doms[1:]):
        P = b.start
        if tuple(a.end) != tuple(P):
            problems.append("domains are not contiguous")
            continue
        walls = walls_through(diagram, P)
        if not walls:
            problems.append(f"(v) bend at {P} lies on no wall")
            continue
        normals = {w[0] for w in walls}
        if len(normals) != 1:
            problems.append(f"(ii) bend at {P} meets walls in different hyperplanes")
            continue
        n = normals.pop()
        f = sympy.Integer(1)
        for _, fw in walls:
            f = f * series_to_sympy(fw)
        e = abs(pair(a.m, n_circ(n, d), d))
        assert e.denominator == 1
        jump = tuple(y - x for x, y in zip(a.n, b.n))
        if not any(jump):
            problems.append(f"(v) no change of slope at {P}")
            continue
        ratio = {Fraction(x, y) for x, y in zip(jump, n) if y} | ({None} if any(x and not y for x, y in zip(jump, n)) else set())
        if len(ratio) != 1 or None in ratio or next(iter(ratio)).denominator != 1 or next(iter(ratio)) < 1:
            problems.append(f"(v) exponent jump {jump} is not a positive multiple of {n}")
            continue
        j = int(next(iter(ratio)))
        deg = j * sum(n)
        power = truncate(sympy_power(f, int(e), deg), deg)
        coeff = sympy.Poly(power, *ZETAS).coeff_monomial(Z1 ** (j * n[0]) * Z2 ** (j * n[1])) if power != 0 else 0
        if Fraction(b.coeff) / Fraction(a.coeff) != Fraction(int(sympy.fraction(coeff)[0]), int(sympy.fraction(coeff)[1])):
            problems.append(f"(v) contribution at {P} is not a term of f^{e}")
    return problems


# change of basis ------------------------------------------------------------------


def random_table(rng, B, ps, max_degree=5):
    """Sparse c^{(p)}_n for every p reachable from ps by adding nB with |n| <= max_degree."""
    table = {}
    support = [
        (a, b) for a in range(max_degree + 1) for b in range(max_degree + 1) if 0 < a + b <= max_degree
    ]
    reach = set()
    for p in ps:
        for a in range(max_degree + 1):
            for b in range(max_degree + 1 - a):
                reach.add(tuple(x + y for x, y in zip(p, _row_times_B((a, b), B))))
    for q in sorted(reach):
        table[q] = {n: rng.randint(-3, 3) for n in rng.sample(support, 4)}
    return table


def reconstruction_defect(c, d, B, p, bound):
    """Coefficients of sigma^s v_{p+sB} in sum_r d_r sigma^r sum_n c^{(p+rB)}_n sigma^n v_{p+(r+n)B}, minus delta."""
    out = {}
    for r, dr in d.items():
        q = tuple(x + y for x, y in zip(p, _row_times_B(r, B)))
        row = dict(c.get(q, {}))
        row[(0, 0)] = 1
        for n, cn in row.items():
            s = (r[0] + n[0], r[1] + n[1])
            if sum(s) <= bound:
                out[s] = out.get(s, 0) + dr * cn
    out[(0, 0)] -= 1
    return {s: x for s, x in out.items() if x}


def _row_times_B(n, B):
    return tuple(sum(n[i] * B[i][j] for i in range(len(n))) for j in range(len(B[0])))
