"""Closed polygonal loops in the universal cover and their energy landscape.

A loop is a vertex list v_0, ..., v_{M-1} together with an integer winding
vector w; the closing vertex is v_M = v_0 + w.  Length and energy use the
metric at segment midpoints::

    length = sum_i |dv_i|_g        energy = (M / 2) sum_i |dv_i|_g^2

so energy >= length^2 / 2 with equality iff all discrete speeds agree.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .metric import c0_distance, conformal_perturbation


@dataclass(frozen=True)
class DiscreteLoop:
    vertices: np.ndarray
    winding: tuple

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 8:
            raise ValueError("a loop needs at least 8 vertices in the plane")
        w = tuple(int(c) for c in self.winding)
        if len(w) != 2 or tuple(self.winding) != w:
            raise ValueError("winding must be an integer pair")
        gaps = np.linalg.norm(np.diff(np.vstack([v, v[:1] + w]), axis=0), axis=1)
        if np.any(gaps >= 0.5):
            raise ValueError("consecutive vertices must be closer than 0.5")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "winding", w)

    @property
    def M(self):
        return self.vertices.shape[0]

    def closed(self):
        """Vertices with the closing vertex v_0 + w appended."""
        return np.vstack([self.vertices, self.vertices[:1] + self.winding])

    def translated(self, offset):
        return DiscreteLoop(self.vertices + np.asarray(offset, float), self.winding)

    @classmethod
    def straight(cls, winding, M=32, start=(0.0, 0.0)):
        t = np.arange(M)[:, None] / M
        return cls(np.asarray(start, float) + t * np.asarray(winding, float), winding)

    @classmethod
    def circle(cls, center, radius, M=32):
        t = 2 * np.pi * np.arange(M) / M
        return cls(np.asarray(center) + radius * np.column_stack([np.cos(t), np.sin(t)]), (0, 0))

    @classmethod
    def wavy(cls, winding, M=32, start=(0.0, 0.0), amplitudes=(0.05,), phases=None):
        """Straight loop displaced along the normal by a sum of sine modes."""
        w = np.asarray(winding, float)
        nrm = np.array([-w[1], w[0]]) / np.linalg.norm(w)
        t = np.arange(M) / M
        phases = np.zeros(len(amplitudes)) if phases is None else phases
        disp = sum(a * np.sin(2 * np.pi * (j + 1) * t + ph)
                   for j, (a, ph) in enumerate(zip(amplitudes, phases)))
        return cls(np.asarray(start, float) + t[:, None] * w + disp[:, None] * nrm, winding)


def _energy_grad(m, V, shift):
    return K.loop_energy_grad(np.ascontiguousarray(V), float(shift[0]), float(shift[1]), *m.packed())


def loop_length(m, loop):
    return float(_energy_grad(m, loop.vertices, loop.winding)[2])


def loop_energy(m, loop):
    return float(_energy_grad(m, loop.vertices, loop.winding)[0])


def speeds(m, loop):
    """Discrete g-speed of each segment, M |dv_i|_g."""
    P = loop.closed()
    d = np.diff(P, axis=0)
    g = m.eval_many(0.5 * (P[1:] + P[:-1]))
    return loop.M * np.sqrt(np.einsum("ni,nij,nj->n", d, g, d))


def _respace(m, V, shift):
    """Move vertices to equal g-arc-length positions along the polyline, keeping v_0."""
    P = np.vstack([V, V[:1] + shift])
    d = np.diff(P, axis=0)
    g = m.eval_many(0.5 * (P[1:] + P[:-1]))
    seg = np.sqrt(np.einsum("ni,nij,nj->n", d, g, d))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] <= 0:
        return V
    M = V.shape[0]
    target = cum[-1] * np.arange(M) / M
    j = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, M - 1)
    frac = np.where(seg[j] > 0, (target - cum[j]) / np.where(seg[j] > 0, seg[j], 1.0), 0.0)
    out = P[j] + frac[:, None] * d[j]
    out[0] = V[0]
    return out


@dataclass
class ShortenResult:
    loop: object
    energy: float
    length: float
    iterations: int
    converged: bool
    collapsed: bool = False
    grad_norm: float = float("nan")
    energies: list = field(default_factory=list, repr=False)


def _descend(m, V, shift, max_iters=10000, grad_tol=1e-9, respace_every=50,
             collapse_tol=None, pinned=(), project=None, record=False, stall_window=200):
    """Preconditioned gradient descent of the discrete energy with Armijo steps.

    The search direction is the gradient smoothed by the inverse of a
    periodic discrete Laplacian (a Sobolev gradient), which makes the
    iteration count nearly independent of M.  ``project`` maps vertex arrays
    onto an admissible set; ``pinned`` vertices never move.
    """
    V = np.array(V, dtype=float)
    M = V.shape[0]
    k = np.arange(M)
    lap = M * (4.0 * np.sin(np.pi * k / M) ** 2 + (2 * np.pi / M) ** 2)
    pinned = np.asarray(pinned, dtype=int)
    if project is not None:
        V = project(V)
    E, G, L = _energy_grad(m, V, shift)
    history = [E] if record else []
    alpha = 1.0
    converged = False
    collapsed = False
    gn = np.inf
    it = 0
    last_check = E
    for it in range(1, max_iters + 1):
        if pinned.size:
            G[pinned] = 0.0
        gn = float(np.sqrt(np.sum(G * G) / M))
        if gn < grad_tol:
            converged = True
            break
        D = np.fft.ifft(np.fft.fft(G, axis=0) / lap[:, None], axis=0).real
        if pinned.size:
            D[pinned] = 0.0
        slope = float(np.sum(G * D))
        if slope <= 0:
            D = G / M
            slope = float(np.sum(G * D))
        accepted = False
        a = min(1.0, 2.0 * alpha)
        while a > 1e-18:
            Vn = V - a * D
            if project is not None:
                Vn = project(Vn)
            En, Gn, Ln = _energy_grad(m, Vn, shift)
            if En <= E - 1e-4 * a * slope or (project is not None and En < E):
                accepted = True
                break
            a *= 0.5
        if not accepted:
            converged = True
            break
        alpha = a
        if En > E:
            raise AssertionError("energy increased during shortening")
        V, E, G, L = Vn, En, Gn, Ln
        if respace_every and it % respace_every == 0:
            Vr = _respace(m, V, shift)
            if project is not None:
                Vr = project(Vr)
            Er, Gr, Lr = _energy_grad(m, Vr, shift)
            if Er <= E:
                V, E, G, L = Vr, Er, Gr, Lr
        if record:
            history.append(E)
        if collapse_tol is not None and L < collapse_tol:
            collapsed = True
            break
        if it % stall_window == 0:
            if last_check - E <= 1e-15 * max(E, 1e-300):
                converged = True
                break
            last_check = E
    return V, E, L, it, converged, collapsed, gn, history


def shorten(m, loop, max_iters=10000, grad_tol=1e-9, collapse_tol=1e-3, respace_every=50,
            project=None, record=False):
    """Energy-decreasing deformation of ``loop`` towards a closed geodesic.

    This is a discrete stand-in for curve shortening: it never increases the
    energy and preserves the winding vector, but it does not claim the
    embeddedness or avoidance properties of the smooth flow.  A contractible
    loop whose length drops below ``collapse_tol`` is reported collapsed.
    """
    ctol = collapse_tol if loop.winding == (0, 0) else None
    V, E, L, it, conv, col, gn, hist = _descend(
        m, loop.vertices, loop.winding, max_iters, grad_tol, respace_every, ctol,
        project=project, record=record)
    return ShortenResult(DiscreteLoop(V, loop.winding), float(E), float(L), it, conv, col, gn, hist)


def disc_avoider(centers, radius):
    """Projection pushing vertices radially out of the discs of ``radius`` (torus-periodic)."""
    C = np.asarray(centers, float).reshape(-1, 2)

    def project(V):
        V = V.copy()
        for c in C:
            d = V - c
            d -= np.floor(d + 0.5)
            r = np.hypot(d[:, 0], d[:, 1])
            bad = r < radius
            if np.any(bad):
                safe = np.where(r[bad] > 0, r[bad], 1.0)
                push = np.where(r[bad, None] > 0, d[bad] / safe[:, None], np.array([1.0, 0.0]))
                V[bad] += push * radius - d[bad]
        return V

    return project


def min_length_in_class(m, winding, n_starts=8, seed=0, M=32, amplitude=0.05, project=None,
                        **opts):
    """Best of ``n_starts`` seeded wavy starts, each shortened; returns (loop, length)."""
    winding = tuple(int(c) for c in winding)
    if winding == (0, 0) and project is None:
        raise ValueError("contractible class needs a constraint")
    rng = np.random.default_rng(seed)
    best = None
    for s in range(n_starts):
        amps = amplitude * rng.uniform(-1, 1, 3)
        start = rng.uniform(0, 1, 2)
        if winding == (0, 0):
            lp = DiscreteLoop.circle(start, rng.uniform(0.1, 0.3), M)
        else:
            lp = DiscreteLoop.wavy(winding, M, start, amps, rng.uniform(0, 2 * np.pi, 3))
        res = shorten(m, lp, project=project, **opts)
        if res.collapsed:
            continue
        if best is None or res.length < best.length:
            best = res
    if best is None:
        raise RuntimeError("all starts collapsed")
    return best.loop, best.length


# -- ribbons --------------------------------------------------------------

def _lift_segments(loop, offset, ks):
    P = loop.closed() + np.asarray(offset, float)
    w = np.asarray(loop.winding, float)
    A = np.concatenate([P[:-1] + k * w for k in ks])
    B = np.concatenate([P[1:] + k * w for k in ks])
    return A, B


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _crossing_masks(a0, a1, b0, b1, tol):
    """(proper, degenerate, |sin angle|) matrices between two segment sets."""
    da = a1 - a0
    db = b1 - b0
    o1 = _cross(da[:, None], b0[None] - a0[:, None])
    o2 = _cross(da[:, None], b1[None] - a0[:, None])
    o3 = _cross(db[None], a0[:, None] - b0[None])
    o4 = _cross(db[None], a1[:, None] - b0[None])
    la = np.linalg.norm(da, axis=1)[:, None]
    lb = np.linalg.norm(db, axis=1)[None]
    # bounding-box overlap, so that far-apart collinear pieces are ignored
    box = ((np.minimum(a0[:, None, 0], a1[:, None, 0]) <= np.maximum(b0[None, :, 0], b1[None, :, 0]) + tol)
           & (np.minimum(b0[None, :, 0], b1[None, :, 0]) <= np.maximum(a0[:, None, 0], a1[:, None, 0]) + tol)
           & (np.minimum(a0[:, None, 1], a1[:, None, 1]) <= np.maximum(b0[None, :, 1], b1[None, :, 1]) + tol)
           & (np.minimum(b0[None, :, 1], b1[None, :, 1]) <= np.maximum(a0[:, None, 1], a1[:, None, 1]) + tol))
    small = lambda o, l: np.abs(o) <= tol * l
    touch = (small(o1, la) | small(o2, la) | small(o3, lb) | small(o4, lb))
    # a touch only matters if the segments are not clearly separated by one of the lines
    apart = (o1 * o2 > 0) & ~small(o1, la) & ~small(o2, la)
    apart |= (o3 * o4 > 0) & ~small(o3, lb) & ~small(o4, lb)
    degenerate = box & touch & ~apart
    proper = box & ~touch & (o1 * o2 < 0) & (o3 * o4 < 0)
    sin = np.abs(_cross(da[:, None], db[None])) / (la * lb)
    return proper, degenerate, sin


def _reduce(proper, degenerate, sin):
    smin = float(sin[proper].min()) if proper.any() else 1.0
    return int(proper.sum()), int(degenerate.sum()), smin


def _span(loop, offset, w):
    P = loop.closed() + offset
    s = P @ w / (w @ w)
    return s.min(), s.max()


def _pair_crossings(la, oa, lb, ob, tol):
    """Crossings per period between the lifts (la + oa) and (lb + ob) and all translates of lb."""
    w = np.asarray(la.winding, float)
    sa = _span(la, oa, w)
    sb = _span(lb, ob, w)
    kmin = int(np.floor(sa[0] - sb[1])) - 1
    kmax = int(np.ceil(sa[1] - sb[0])) + 1
    a0, a1 = _lift_segments(la, oa, [0])
    b0, b1 = _lift_segments(lb, ob, range(kmin, kmax + 1))
    return _reduce(*_crossing_masks(a0, a1, b0, b1, tol))


def _self_crossings(lp, off, tol):
    """Crossings of one period of a lift with the rest of the lift, excluding neighbours."""
    w = np.asarray(lp.winding, float)
    lo, hi = _span(lp, off, w)
    K_ = int(np.ceil(hi - lo)) + 1
    M = lp.M
    a0, a1 = _lift_segments(lp, off, [0])
    b0, b1 = _lift_segments(lp, off, range(-K_, K_ + 1))
    gi = np.arange(M)[:, None]
    gj = np.arange(-K_ * M, (K_ + 1) * M)[None]
    far = np.abs(gi - gj) > 1
    p, d, s = _crossing_masks(a0, a1, b0, b1, tol)
    # each crossing within the period-0 block is seen twice
    same = (gj >= 0) & (gj < M)
    c = int((p & far & ~same).sum()) + int((p & far & same).sum()) // 2
    deg = int((d & far).sum())
    return c, deg, float(s[p & far].min()) if (p & far).any() else 1.0


def _point_side(P, lp, off):
    """+1 if P lies left of the lift (lp + off), -1 if right (ray-parity test)."""
    w = np.asarray(lp.winding, float)
    u = w / np.linalg.norm(w)
    nrm = np.array([-u[1], u[0]])
    lo, hi = _span(lp, off, w)
    sP = P @ w / (w @ w)
    ks = range(int(np.floor(sP - hi)) - 1, int(np.ceil(sP - lo)) + 2)
    a0, a1 = _lift_segments(lp, off, ks)
    s0, s1 = a0 @ u, a1 @ u
    n0, n1 = a0 @ nrm, a1 @ nrm
    ps, pn = P @ u, P @ nrm
    hit = ((s0 <= ps) & (ps < s1)) | ((s1 <= ps) & (ps < s0))
    with np.errstate(invalid="ignore", divide="ignore"):
        nat = n0 + (ps - s0) * (n1 - n0) / (s1 - s0)
    count = int(np.sum(hit & (nat > pn)))
    return 1 if count % 2 == 0 else -1


@dataclass
class RibbonReport:
    is_ribbon: object
    embedded: list
    positions: dict
    intersections: np.ndarray
    transverse: bool
    indeterminate: bool
    reasons: list


def check_ribbon(m, loops, offsets=None, tol=1e-9):
    """Check the ribbon pattern (embedded lifts, left/right order, chain of crossings).

    ``loops`` are four loops of one winding class; ``offsets`` pick their
    lifts in the cover.  ``is_ribbon`` is None when a degenerate contact or
    tangency within ``tol`` makes the pattern undecidable.
    """
    if len(loops) != 4:
        raise ValueError("need exactly four loops")
    w = loops[0].winding
    if w == (0, 0) or any(lp.winding != w for lp in loops):
        raise ValueError("loops must share one nontrivial winding class")
    offs = [np.zeros(2) if offsets is None else np.asarray(offsets[i], float) for i in range(4)]
    reasons = []
    indeterminate = False
    embedded = []
    for lp, off in zip(loops, offs):
        c, d, _ = _self_crossings(lp, off, tol)
        embedded.append(c == 0 and d == 0)
        if d:
            indeterminate = True
            reasons.append("degenerate self-contact")
    X = np.zeros((4, 4), dtype=int)
    smin = 1.0
    for i in range(4):
        for j in range(i + 1, 4):
            c, d, s = _pair_crossings(loops[i], offs[i], loops[j], offs[j], tol)
            X[i, j] = X[j, i] = c
            smin = min(smin, s)
            if d:
                indeterminate = True
                reasons.append(f"degenerate contact between curves {i + 1} and {j + 1}")
    transverse = smin > tol

    def side(i, j):
        if X[i, j] > 0:
            return 0
        return _point_side(loops[i].vertices[0] + offs[i], loops[j], offs[j])

    positions = {
        "1 left of 3": side(0, 2) == 1,
        "1 left of 4": side(0, 3) == 1,
        "4 right of 1": side(3, 0) == -1,
        "4 right of 2": side(3, 1) == -1,
    }
    item0 = all(embedded)
    item1 = all(positions.values())
    item2 = X[0, 1] > 0 and X[1, 2] > 0 and X[2, 3] > 0 and transverse
    if not item0:
        reasons.append("a lift is not embedded")
    if not item1:
        reasons.append("left/right order fails")
    if not item2:
        reasons.append("required crossings missing or not transverse")
    verdict = None if indeterminate else bool(item0 and item1 and item2)
    return RibbonReport(verdict, embedded, positions, X, transverse, indeterminate, reasons)


# -- separation -----------------------------------------------------------

def separation_upper_bound(m, loop_a, loop_b, sweep, gap=0.1):
    """min(log(b / E(A)), log(b / E(B))) with b the largest energy along the sweep.

    The sweep is a list of loops from A to B with matching lifts; consecutive
    loops (and the ends against A and B) must stay within ``gap`` vertexwise.
    """
    path = list(sweep)
    if not path:
        raise ValueError("empty sweep")

    def close(p, q):
        return (p.winding == q.winding and p.M == q.M
                and np.max(np.linalg.norm(p.vertices - q.vertices, axis=1)) < gap)

    chain = [loop_a] + path + [loop_b]
    for p, q in zip(chain[:-1], chain[1:]):
        if not close(p, q):
            raise ValueError("sweep lifts are inconsistent or too far apart")
    b = max(loop_energy(m, lp) for lp in chain)
    return float(min(np.log(b / loop_energy(m, loop_a)), np.log(b / loop_energy(m, loop_b))))


def linear_sweep(loop_a, loop_b, n=20, bump=None):
    """Vertexwise interpolation from A to B, optionally displaced by ``bump(s, vertices)``."""
    out = []
    for s in np.linspace(0, 1, n + 1)[1:-1]:
        V = (1 - s) * loop_a.vertices + s * loop_b.vertices
        if bump is not None:
            V = V + bump(s, V)
        out.append(DiscreteLoop(V, loop_a.winding))
    return out


# -- annuli ---------------------------------------------------------------

def geodesic_arc(m, a, b, n=64, max_iters=4000):
    """Energy-minimising polyline from a to b with n segments (endpoints fixed)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    V0 = a + np.arange(n)[:, None] / n * (b - a)
    V, *_ = _descend(m, V0, b - a, max_iters=max_iters, grad_tol=1e-11, pinned=[0])
    return np.vstack([V, b])


@dataclass
class AnnulusRegion:
    """Annulus in the cylinder R/Z x R bounded by two piecewise-geodesic graphs.

    ``lower`` and ``upper`` are the corner points (x in [0, 1), y) of the two
    boundary chains, in increasing x.  Consecutive corners (cyclically, with
    the last joined to the first shifted by (1, 0)) are connected by
    g-geodesic arcs.  Corner angles are measured in g on the annulus side.
    """

    lower: np.ndarray
    upper: np.ndarray
    chains: tuple = field(default=None, repr=False)
    angles: tuple = field(default=None)
    admissible: tuple = field(default=None)

    @classmethod
    def build(cls, m, lower, upper, n_arc=32):
        lower = np.asarray(lower, float).reshape(-1, 2)
        upper = np.asarray(upper, float).reshape(-1, 2)
        chains = []
        angles = []
        for corners, inside_sign in ((lower, 1.0), (upper, -1.0)):
            pts = np.vstack([corners, corners[:1] + (1.0, 0.0)])
            arcs = [geodesic_arc(m, pts[i], pts[i + 1], n_arc) for i in range(len(corners))]
            chain = np.vstack([arc[:-1] for arc in arcs] + [arcs[-1][-1:]])
            if np.any(np.diff(chain[:, 0]) <= 0):
                raise ValueError("boundary chain must be a graph over x")
            chains.append(chain)
            ang = []
            for i in range(len(corners)):
                prev = arcs[i - 1]
                nxt = arcs[i]
                t_in = -(prev[-1] - prev[-2])
                t_out = nxt[1] - nxt[0]
                ang.append(_interior_angle(m, corners[i], t_in, t_out, inside_sign))
            angles.append(np.array(ang))
        for ch_lo, ch_hi in [(chains[0], chains[1])]:
            xs = np.linspace(0, 1, 257)
            if np.any(_chain_height(ch_lo, xs) >= _chain_height(ch_hi, xs)):
                raise ValueError("boundary chains intersect")
        adm = tuple(_admissible(a) for a in angles)
        return cls(lower, upper, tuple(chains), tuple(angles), adm)

    def height_bounds(self, x):
        return _chain_height(self.chains[0], x), _chain_height(self.chains[1], x)

    def projector(self, margin=0.0):
        def project(V):
            lo, hi = self.height_bounds(V[:, 0])
            out = V.copy()
            out[:, 1] = np.clip(V[:, 1], lo + margin, hi - margin)
            return out
        return project


def _chain_height(chain, x):
    xm = np.mod(x, 1.0)
    h = np.interp(xm, chain[:, 0] - np.floor(chain[0, 0]), chain[:, 1], period=None)
    return h


def _interior_angle(m, p, t_in, t_out, inside_sign):
    """g-angle at a corner between the two boundary tangents, on the annulus side."""
    g = m.eval_many(np.asarray(p)[None] % 1.0)[0]
    ang_in = _g_angle(g, t_in)
    ang_out = _g_angle(g, t_out)
    # inside is above the lower chain (to the left of t_out) and below the upper chain
    sweep = (ang_in - ang_out) % (2 * np.pi) if inside_sign > 0 else (ang_out - ang_in) % (2 * np.pi)
    return float(sweep)


def _g_angle(g, v):
    """Angle of v in a g-orthonormal frame."""
    L = np.linalg.cholesky(g)
    e = L.T @ v
    return np.arctan2(e[1], e[0])


def _admissible(angles, tol=1e-9):
    corners = np.abs(angles - np.pi) > tol
    return bool(corners.any() and np.all(angles[corners] < np.pi))


def annulus_min_gap(m, annulus, n_vertices=48, n_contacts=16, heights=5, max_iters=3000):
    """(d, d_tilde, eps) for the core class (1, 0) of an admissible annulus.

    ``d`` is the least energy of loops in the annulus, from several starting
    heights with the loop clamped between the chains; ``d_tilde`` is the
    least energy of loops pinned at a boundary point, scanning contact points
    on both chains.
    """
    if not all(annulus.admissible):
        raise ValueError("annulus boundary is not admissible")
    project = annulus.projector()
    d = np.inf
    x = np.arange(n_vertices) / n_vertices
    lo, hi = annulus.height_bounds(x)
    for f in np.linspace(0.2, 0.8, heights):
        V0 = np.column_stack([x, lo + f * (hi - lo)])
        V, E, *_ = _descend(m, V0, (1, 0), max_iters=max_iters, project=project)
        d = min(d, E)
    d_t = np.inf
    for chain in annulus.chains:
        for xc in (np.arange(n_contacts) + 0.5) / n_contacts:
            yc = _chain_height(chain, np.array([xc]))[0]
            xs = xc + x
            lo, hi = annulus.height_bounds(xs)
            V0 = np.column_stack([xs, 0.5 * (lo + hi)])
            V0[0] = (xc, yc)
            V, E, *_ = _descend(m, V0, (1, 0), max_iters=max_iters, pinned=[0], project=project)
            d_t = min(d_t, E)
    return float(d), float(d_t), float(np.log(d_t / d))


# -- perturbation experiments -------------------------------------------------

@dataclass
class PersistenceReport:
    energy: float
    delta: float
    trials: list
    all_within: bool
    band: tuple


def spectrum_persistence_experiment(m0, winding, delta, n_trials=20, seed=0, n_starts=4, M=32,
                                    modes=2, isolation_tol=1e-6, max_iters=5000):
    """Rerun the minimisation under random conformal perturbations at C0 distance delta.

    Every found energy E' is compared with the band [exp(-2 delta) E, exp(2 delta) E].
    A trial whose energy lies well above the best energy found from fresh
    starts under the same perturbed metric is flagged as a class jump.
    """
    rng = np.random.default_rng(seed)
    energies = []
    loops = []
    for s in range(n_starts):
        lp, _ = min_length_in_class(m0, winding, n_starts=1, seed=seed * 1000 + s, M=M,
                                    max_iters=max_iters)
        energies.append(loop_energy(m0, lp))
        loops.append(lp)
    if max(energies) - min(energies) > isolation_tol * max(1.0, max(energies)):
        raise RuntimeError("degenerate or non-isolated minimiser")
    i = int(np.argmin(energies))
    E, geo = energies[i], loops[i]
    band = (float(np.exp(-2 * delta) * E), float(np.exp(2 * delta) * E))
    trials = []
    for t in range(n_trials):
        if delta == 0:
            mp = m0
            measured = 0.0
        else:
            mp = conformal_perturbation(m0, delta, rng, modes=modes)
            measured = c0_distance(m0, mp)
        res = shorten(mp, geo, max_iters=max_iters)
        Ep = res.energy
        fresh, _ = min_length_in_class(mp, winding, n_starts=1, seed=seed + 7919 * (t + 1), M=M,
                                       max_iters=max_iters)
        Ef = loop_energy(mp, fresh)
        trials.append({"trial": t, "delta": measured, "energy": Ep, "fresh_energy": Ef,
                       "within": bool(band[0] <= Ep <= band[1]), "jump": bool(Ef < Ep - 1e-6)})
    return PersistenceReport(float(E), float(delta), trials, all(tr["within"] for tr in trials), band)



# -- files ----------------------------------------------------------------

def save_loop(path, loop):
    """CSV with a '# winding p q' header line, then x,y rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# winding {loop.winding[0]} {loop.winding[1]}\n")
        fh.write("x,y\n")
        for x, y in loop.vertices:
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def load_loop(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# winding"):
        raise ValueError(f"{path}: line 1: expected '# winding p q' header")
    parts = lines[0].split()
    if len(parts) != 4:
        raise ValueError(f"{path}: line 1: winding needs two integers")
    w = (int(parts[2]), int(parts[3]))
    if lines[1:2] != ["x,y"]:
        raise ValueError(f"{path}: line 2: expected column header 'x,y'")
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        try:
            x, y = (float(v) for v in line.split(","))
        except ValueError:
            raise ValueError(f"{path}: line {i}: expected two numbers") from None
        rows.append((x, y))
    return DiscreteLoop(np.array(rows), w)
