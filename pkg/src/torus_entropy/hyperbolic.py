"""One-holed hyperbolic tori: pentagon boundary lengths, entropy bound, Schottky dimension.

A one-holed torus is cut by two simple closed geodesics of lengths 2a and
2b whose lifted axes meet at angle gamma.  The four boundary arcs come from
right-angled pentagons; the volume entropy h of the surface satisfies
1/(1 + e^{ha}) + 1/(1 + e^{hb}) <= 1/2.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class PentagonParams:
    a: float
    b: float
    gamma: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("a and b must be positive")
        if not 0 < self.gamma < np.pi:
            raise ValueError("gamma must lie in (0, pi)")


@dataclass(frozen=True)
class SchottkyParams:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")

    @property
    def t(self):
        return float(np.tanh(self.a))

    def isometric_circles(self):
        """(center, radius) of the four isometric circles of alpha^{+-1}, beta^{+-1}."""
        t = self.t
        c = 1.0 / t
        r = np.sqrt(1.0 - t * t) / t
        return [(complex(-c, 0), r), (complex(c, 0), r), (complex(0, -c), r), (complex(0, c), r)]

    def ping_pong(self):
        """True iff the four isometric circles are pairwise disjoint."""
        circ = self.isometric_circles()
        for (c1, r1), (c2, r2) in [(circ[i], circ[j]) for i in range(4) for j in range(i + 1, 4)]:
            if abs(c1 - c2) <= r1 + r2:
                return False
        return True


def boundary_lengths(p):
    """(L1, L2, L3, L4, L) with L the total boundary length (sum of the L_i over 2)."""
    sa, sb = np.sinh(p.a), np.sinh(p.b)
    ca, cb = np.cosh(p.a), np.cosh(p.b)
    cg = np.cos(p.gamma)
    even = sa * sb - ca * cb * cg
    odd = sa * sb + ca * cb * cg
    if min(even, odd) < 1.0 + 1e-12:
        raise ValueError("no right-angled pentagon for these parameters")
    L2 = float(np.arccosh(even))
    L1 = float(np.arccosh(odd))
    return L1, L2, L1, L2, float(L1 + L2)


def entropy_lower_bound(a, b, tol=1e-12):
    """Root h* of 1/(1 + e^{ha}) + 1/(1 + e^{hb}) = 1/2 by bisection."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")

    def f(h):
        # 1/(1+e^x) written via tanh to avoid overflow
        return 0.5 * (1 - np.tanh(0.5 * h * a)) + 0.5 * (1 - np.tanh(0.5 * h * b)) - 0.5

    lo, hi = 1e-9, 50.0 / min(a, b)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def contraction_ratio(a):
    """(1 + e^a) / (1 + e^{2a})."""
    return (1.0 + np.exp(a)) / (1.0 + np.exp(2.0 * a))


def schottky_hdim_formula(a):
    """-log 3 / log r with the contraction ratio r of the generators."""
    if a < 1:
        raise ValueError("a must be at least 1")
    r = contraction_ratio(a)
    if r >= 1:
        raise ValueError("contraction ratio is not below 1")
    return float(-np.log(3.0) / np.log(r))


def _generators(t):
    # z -> (z + t)/(1 + t z) translates along the real diameter by 2 artanh t;
    # beta is the same map conjugated by the rotation z -> i z.  Matrices are
    # normalised to determinant 1, i.e. [[A, B], [conj B, conj A]].
    A = np.array([[1.0, t], [t, 1.0]], dtype=complex) / np.sqrt(1.0 - t * t)
    R = np.diag([1j, 1.0])
    B = R @ A @ np.linalg.inv(R)
    return [A, np.linalg.inv(A), B, np.linalg.inv(B)]


def _word_matrices(t, depth):
    """Matrices of all reduced words of exactly ``depth`` letters (letter l has inverse l ^ 1)."""
    gens = _generators(t)
    mats = np.array(gens)
    first = np.arange(4)
    for _ in range(depth - 1):
        ms, fs = [], []
        for letter in range(4):
            ok = first != (letter ^ 1)
            ms.append(np.einsum("ij,njk->nik", gens[letter], mats[ok]))
            fs.append(np.full(ok.sum(), letter))
        mats = np.concatenate(ms)
        first = np.concatenate(fs)
    return mats


def orbit_angles(p, depth):
    """Boundary angles (in turns) of w(0) for all reduced words w of length ``depth``.

    For w = [[A, B], [conj B, conj A]] one has w(0) = B / conj A, so the angle
    is arg B + arg A and stays accurate however close w(0) is to the circle.
    """
    W = _word_matrices(p.t, depth)
    return np.mod((np.angle(W[:, 0, 1]) + np.angle(W[:, 0, 0])) / (2 * np.pi), 1.0)


def limit_set_dimension_oracle(p, depth=10, scales=None):
    """Box-counting dimension of the boundary angles of a deep orbit sample.

    Boxes are dyadic, of side 2^-j turns, and the dimension is the
    least-squares slope of log N(j) against j log 2.  By default the scales
    run from the size of the four first-level arcs down to 2^-40, the finest
    side at which a depth-10 sample in double precision is still resolved.
    """
    if depth > 12:
        raise ValueError("depth must be at most 12")
    if depth < 2:
        raise ValueError("insufficient sample: depth must be at least 2")
    if not p.ping_pong():
        raise ValueError("not in Schottky regime")
    theta = orbit_angles(p, depth)
    if scales is None:
        _, r = p.isometric_circles()[0]
        arc = 2.0 * np.arcsin(min(1.0, r * p.t)) / (2 * np.pi)
        scales = range(int(np.ceil(-np.log2(arc))), 41)
    js = np.array(list(scales))
    counts = np.array([np.unique(np.floor(theta * 2.0**j)).size for j in js])
    slope, _ = np.polyfit(js * np.log(2.0), np.log(counts), 1)
    return float(slope)


def critical_exponent(p, depth=10):
    """Exponent s with sum over words of length n of exp(-s d(o, w o)) constant in n.

    Solves Z_depth(s) = Z_{depth-1}(s) for the orbit sums Z_n, using
    cosh d(o, w o) = 2 |A|^2 - 1.  For a convex cocompact group this is the
    Hausdorff dimension of the limit set.
    """
    if not p.ping_pong():
        raise ValueError("not in Schottky regime")
    d = [np.arccosh(2.0 * np.abs(_word_matrices(p.t, n)[:, 0, 0]) ** 2 - 1.0)
         for n in (depth - 1, depth)]

    def f(s):
        lo = np.log(np.sum(np.exp(-s * (d[0] - d[0].min())))) - s * d[0].min()
        hi = np.log(np.sum(np.exp(-s * (d[1] - d[1].min())))) - s * d[1].min()
        return hi - lo

    return float(brentq(f, 1e-6, 2.0))


def teichmuller_scan(a_values, b_values, gamma_values, thresholds=(0.5, 0.3, 0.2, 0.1)):
    """Rows (a, b, gamma, L, h*) over a grid, pentagon-invalid points skipped.

    Returns (rows, n_excluded).  Asserts that the smallest boundary length
    among rows with h* < t does not decrease as t decreases.
    """
    rows = []
    excluded = 0
    for a, b, g in product(a_values, b_values, gamma_values):
        try:
            L = boundary_lengths(PentagonParams(a, b, g))[4]
        except ValueError:
            excluded += 1
            continue
        rows.append((float(a), float(b), float(g), L, entropy_lower_bound(a, b)))
    if not rows:
        raise ValueError("empty grid")
    prev = -np.inf
    for t in sorted(thresholds, reverse=True):
        Ls = [r[3] for r in rows if r[4] < t]
        if not Ls:
            continue
        cur = min(Ls)
        if cur < prev:
            raise AssertionError("minimal boundary length decreased as the entropy threshold fell")
        prev = cur
    return rows, excluded
