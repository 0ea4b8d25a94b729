"""Entropy estimators and exact growth counts.

Three independent estimators of exponential growth rates: geodesic chord
counting averaged over point pairs, ball-volume growth in the lifted grid
graph, and greedy (delta, k)-separated sets.  Alongside them, exact counts of
reduced words and conjugacy classes in the free group on two letters.
"""
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import _kernels as K
from .geodesics import find_chords
from .metric import sample_grid


@dataclass
class GrowthSeries:
    T: np.ndarray
    count: np.ndarray
    tail: float = 0.5
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float)
        self.count = np.asarray(self.count, dtype=float)
        if self.T.shape != self.count.shape or self.T.ndim != 1:
            raise ValueError("T and count must be matching 1-D arrays")
        if np.any(np.diff(self.T) <= 0):
            raise ValueError("T must be strictly increasing")
        if np.any(self.count < 0):
            raise ValueError("counts must be nonnegative")
        if not 0 < self.tail <= 1:
            raise ValueError("tail fraction must lie in (0, 1]")

    def window(self):
        n = len(self.T)
        start = n - max(int(np.ceil(self.tail * n)), 1)
        return self.T[start:], self.count[start:]

    def rows(self):
        with np.errstate(divide="ignore"):
            logs = np.log(self.count)
        return list(zip(self.T.tolist(), self.count.tolist(), logs.tolist()))


def growth_rate(s, model="exp"):
    """Exponential growth rate of a count series over its tail window.

    ``model="exp"`` is the plain least-squares slope of log(count) against T.
    ``model="exp_poly"`` fits log(count) = h T + a log T + b and returns h,
    which removes the bias a polynomial prefactor puts on the plain slope
    over a finite window.
    """
    T, c = s.window()
    if len(T) < 4:
        raise ValueError("insufficient growth data: need 4 samples in the fit window")
    if np.any(c < 1):
        raise ValueError("insufficient growth data: zero counts in the fit window")
    y = np.log(c)
    if model == "exp":
        A = np.column_stack([T, np.ones_like(T)])
    elif model == "exp_poly":
        if np.any(T <= 0):
            raise ValueError("exp_poly needs positive T")
        A = np.column_stack([T, np.log(T), np.ones_like(T)])
    else:
        raise ValueError(f"unknown model {model!r}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


# -- chord counting -------------------------------------------------------

def mane_estimate(m, T_max=10.0, n_pairs=32, n_angles=1024, seed=0, n_T=20, model="exp_poly",
                  tail=0.5, h=0.02):
    """Growth rate of exp(mean log max(1, N_T(p, q))) over seeded random pairs.

    Returns (estimate, GrowthSeries).  The series meta records the plain
    slope estimate, chord diagnostics and all parameters.
    """
    if T_max < 5:
        raise ValueError("T_max must be at least 5")
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(0, 1, (n_pairs, 2, 2))
    Ts = np.linspace(T_max / n_T, T_max, n_T)
    logs = np.zeros((n_pairs, n_T))
    dropped = 0
    overflow = False
    for i, (p, q) in enumerate(pairs):
        cs = find_chords(m, p, q, T_max, n_angles=n_angles, h=h)
        dropped += cs.dropped
        overflow |= cs.overflow
        counts = np.searchsorted(np.sort(cs.lengths), Ts, side="left")
        logs[i] = np.log(np.maximum(1, counts))
    series = GrowthSeries(Ts, np.exp(logs.mean(axis=0)), tail)
    est = growth_rate(series, model)
    series.meta = {"estimator": "mane", "model": model, "slope_exp": growth_rate(series, "exp"),
                   "n_pairs": n_pairs, "n_angles": n_angles, "seed": seed, "dropped": dropped,
                   "overflow": bool(overflow), "h": h}
    return est, series


# -- volume entropy -------------------------------------------------------

def _grid_graph(m, X, h):
    """8-neighbour grid on [-X, X]^2 with g-lengths of edges at their midpoints."""
    n = int(round(2 * X / h)) + 1
    xs = -X + h * np.arange(n)
    idx = np.arange(n * n).reshape(n, n)
    rows, cols, wts = [], [], []
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        i0 = slice(0, n - di)
        i1 = slice(di, n)
        j0 = slice(max(0, -dj), n - max(0, dj))
        j1 = slice(max(0, dj), n - max(0, -dj))
        a = idx[i0, j0].ravel()
        b = idx[i1, j1].ravel()
        # node (i, j) sits at (xs[i], xs[j])
        mid = np.column_stack([xs[a // n] + 0.5 * di * h, xs[a % n] + 0.5 * dj * h])
        g = m.eval_many(np.mod(mid, 1.0))
        d = np.array([di * h, dj * h])
        w = np.sqrt(g[:, 0, 0] * d[0] ** 2 + 2 * g[:, 0, 1] * d[0] * d[1] + g[:, 1, 1] * d[1] ** 2)
        rows.append(a)
        cols.append(b)
        wts.append(w)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.concatenate(wts)
    G = coo_matrix((np.concatenate([w, w]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                   shape=(n * n, n * n)).tocsr()
    return G, xs, n


def _diameter_scale(m):
    g, _ = m.eval_with_derivatives(sample_grid(32))
    tr = g[:, 0] + g[:, 2]
    det = g[:, 0] * g[:, 2] - g[:, 1] ** 2
    lam_max = 0.5 * (tr + np.sqrt(np.maximum(tr * tr - 4 * det, 0)))
    return float(np.sqrt(lam_max.max()) * np.sqrt(0.5)), float(np.sqrt(np.median(lam_max)))


def volume_entropy_estimate(m, R_max=8.0, lattice_h=1 / 64, n_R=16, model="exp_poly", tail=0.5,
                            max_nodes=4_000_000):
    """Growth rate of ball volumes in the universal cover via grid-graph distances.

    Graph distances overestimate Riemannian ones, so balls are slightly
    small.  The coordinate box is enlarged until every ball of radius
    ``R_max`` around the origin lies inside it.
    """
    if lattice_h > 1 / 32:
        raise ValueError("lattice_h must be at most 1/32")
    diam, typical = _diameter_scale(m)
    if R_max < 4 * diam:
        raise ValueError("R_max must be at least four diameters of the torus")
    X = 1.1 * R_max / typical
    while True:
        X = np.ceil(X / lattice_h) * lattice_h
        n = int(round(2 * X / lattice_h)) + 1
        if n * n > max_nodes:
            raise ValueError("grid too large; raise lattice_h or lower R_max")
        G, xs, n = _grid_graph(m, X, lattice_h)
        origin = (n // 2) * n + n // 2
        dist = dijkstra(G, indices=origin, limit=1.5 * R_max)
        D = dist.reshape(n, n)
        edge = np.concatenate([D[0], D[-1], D[:, 0], D[:, -1]])
        if edge.min() > R_max:
            break
        X *= 1.5
    P = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    g = m.eval_many(np.mod(P, 1.0))
    dA = np.sqrt(g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2) * lattice_h**2
    Rs = np.linspace(R_max / n_R, R_max, n_R)
    order = np.argsort(dist)
    cum = np.cumsum(dA[order])
    k = np.searchsorted(dist[order], Rs, side="right")
    vol = np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)
    # normalised by the smallest ball; a constant factor does not change the rate
    series = GrowthSeries(Rs, vol / vol[0], tail)
    est = growth_rate(series, model)
    series.meta = {"estimator": "hvol", "model": model, "slope_exp": growth_rate(series, "exp"),
                   "lattice_h": lattice_h, "box": float(X), "volume": vol.tolist()}
    return est, series


# -- separated sets -------------------------------------------------------

def _orbit_samples(m, n_orbits, k_max, seed, h):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0, 1, (n_orbits, 3))
    packed = m.packed()
    S = np.empty((n_orbits, 4))
    for i, (x, y, t) in enumerate(raw):
        vx, vy = K.unit_velocity(x, y, 2 * np.pi * t, *packed)
        S[i] = (x, y, vx, vy)
    spp = int(round(1.0 / h))
    return K.rk4_sampled(S, 1.0 / spp, spp, k_max, *packed)


def _pair_distance(a, b):
    """Torus distance of positions plus coordinate distance of velocities."""
    d = a[..., :2] - b[..., :2]
    d -= np.round(d)
    return np.hypot(d[..., 0], d[..., 1]) + np.hypot(a[..., 2] - b[..., 2], a[..., 3] - b[..., 3])


def separated_set_estimate(m, delta=0.1, k_max=10, n_orbits=400, seed=0, h=0.01):
    """Greedy (delta, k)-separated subsets of seeded orbits; returns (sizes, log|set|/k).

    Orbits are visited in seed order, so a larger ``n_orbits`` only appends
    candidates and never shrinks the greedy set.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    orb = _orbit_samples(m, n_orbits, k_max, seed, h)
    # running max of the pairwise distance over times 0..k
    sizes = []
    dk = np.zeros((n_orbits, n_orbits))
    for k in range(k_max + 1):
        X = orb[:, k]
        dk = np.maximum(dk, _pair_distance(X[:, None], X[None]))
        if k == 0:
            continue
        chosen = []
        for i in range(n_orbits):
            if all(dk[i, j] >= delta for j in chosen):
                chosen.append(i)
        sizes.append(len(chosen))
    sizes = np.array(sizes)
    ks = np.arange(1, k_max + 1)
    return sizes, np.log(sizes) / ks


# -- free group -------------------------------------------------------------

@dataclass
class CountReport:
    n: int
    words: int
    conj_classes: int
    bound_8_3n: float
    bound_2n: float
    by_length: list = field(default_factory=list)

    @property
    def words_nontrivial(self):
        return self.words - 1


def _reduced_words(n):
    """Reduced words of each length 1..n as base-4 codes; letter l has inverse l ^ 1."""
    levels = [np.arange(4, dtype=np.int64)]
    lasts = [np.arange(4, dtype=np.int64)]
    firsts = [np.arange(4, dtype=np.int64)]
    for _ in range(1, n):
        w, last, first = levels[-1], lasts[-1], firsts[-1]
        new_w, new_l, new_f = [], [], []
        for letter in range(4):
            ok = last != (letter ^ 1)
            new_w.append(w[ok] * 4 + letter)
            new_l.append(np.full(ok.sum(), letter, dtype=np.int64))
            new_f.append(first[ok])
        levels.append(np.concatenate(new_w))
        lasts.append(np.concatenate(new_l))
        firsts.append(np.concatenate(new_f))
    return levels, lasts, firsts


def _classes_of_length(codes, L):
    """Distinct cyclic rotations classes among cyclically reduced words of length L."""
    best = codes.copy()
    cur = codes.copy()
    top = np.int64(4) ** (L - 1)
    for _ in range(L - 1):
        cur = (cur % top) * 4 + cur // top
        np.minimum(best, cur, out=best)
    return int(np.unique(best).size)


def count_free_group(n):
    """Exact reduced-word and conjugacy-class counts in the free group F(a, b).

    ``words`` counts reduced words of length <= n including the identity.
    ``conj_classes`` counts nontrivial conjugacy classes with a representative
    of length <= n, i.e. cyclically reduced words of length <= n up to
    rotation.
    """
    if not 1 <= n <= 14:
        raise ValueError("n must lie in 1..14")
    levels, lasts, firsts = _reduced_words(n)
    words = 1 + sum(len(w) for w in levels)
    by_length = []
    for L in range(1, n + 1):
        cyc = lasts[L - 1] != (firsts[L - 1] ^ 1)
        by_length.append(_classes_of_length(levels[L - 1][cyc], L))
    classes = int(sum(by_length))
    b8 = 8 * 3.0 ** (n - 2) / n
    b2 = (2.0**n - 2) / n
    if n >= 2 and not (classes >= b8 and classes >= b2):
        raise AssertionError("conjugacy class count violates the growth bounds")
    return CountReport(n, int(words), classes, b8, b2, by_length)


def coprime_classes(windings):
    """True iff no two winding vectors are rational multiples of each other."""
    ws = [tuple(int(c) for c in w) for w in windings]
    for w in ws:
        if w == (0, 0):
            raise ValueError("zero winding vector")
    prim = set()
    for p, q in ws:
        g = gcd(p, q)
        p, q = p // g, q // g
        if p < 0 or (p == 0 and q < 0):
            p, q = -p, -q
        if (p, q) in prim:
            return False
        prim.add((p, q))
    return True
