"""Riemannian metrics on the flat 2-torus R^2 / Z^2.

A metric is stored as an N x N grid of coefficient triples (g11, g12, g22)
sampled at the nodes (i/N, j/N) and interpolated by a periodic bicubic
B-spline.  The spline interpolates the nodes, is C^2, and is 1-periodic in
both coordinates by construction.  Retractable necks are stored as analytic
overlays on top of the grid so that the metric is left untouched outside the
neck tubes.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

SPD_TOL = 1e-12


def _prefilter(values):
    """B-spline coefficients interpolating periodic node values (last two axes)."""
    N = values.shape[-1]
    k = np.arange(N)
    sym = (4.0 + 2.0 * np.cos(2.0 * np.pi * k / N)) / 6.0
    spec = np.fft.fft2(values, axes=(-2, -1))
    spec /= sym[:, None] * sym[None, :]
    return np.ascontiguousarray(np.fft.ifft2(spec, axes=(-2, -1)).real)


class MetricField:
    """Periodic SPD coefficient field on the unit square.

    Parameters
    ----------
    coeffs : array_like, shape (N, N, 3)
        Node values of (g11, g12, g22); ``coeffs[i, j]`` sits at ``(i/N, j/N)``.
    scale : float
        Global multiplier, so ``MetricField(c, scale=C)`` is ``C * g``.
    necks : tuple
        Neck overlays, as produced by :func:`build_neck_metric`.
    """

    interpolation = "periodic cubic B-spline"

    def __init__(self, coeffs, scale=1.0, necks=(), _coef=None):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[0] != coeffs.shape[1] or coeffs.shape[2] != 3:
            raise ValueError("coeffs must have shape (N, N, 3)")
        if coeffs.shape[0] < 4:
            raise ValueError("resolution must be at least 4")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        det = coeffs[..., 0] * coeffs[..., 2] - coeffs[..., 1] ** 2
        if np.any(coeffs[..., 0] <= 0) or np.any(det <= SPD_TOL):
            raise ValueError("coefficients are not positive definite at every node")
        if not scale > 0:
            raise ValueError("scale must be positive")
        coeffs.setflags(write=False)
        self._coeffs = coeffs
        self.scale = float(scale)
        self.necks = tuple(necks)
        if _coef is None:
            if np.all(coeffs == coeffs[0, 0]):
                # a constant field is its own spline; store it as a 1 x 1 grid
                _coef = np.ascontiguousarray(coeffs[0, 0].reshape(3, 1, 1))
            else:
                _coef = _prefilter(np.moveaxis(coeffs, 2, 0))
        self._coef = _coef
        self._check_spd_interpolant()

    # -- construction -------------------------------------------------
    @classmethod
    def flat(cls, resolution=8):
        c = np.zeros((resolution, resolution, 3))
        c[..., 0] = 1.0
        c[..., 2] = 1.0
        return cls(c)

    @classmethod
    def from_function(cls, fn, resolution):
        """Sample ``fn(x, y) -> (g11, g12, g22)`` (vectorised) at the nodes."""
        x = np.arange(resolution) / resolution
        X, Y = np.meshgrid(x, x, indexing="ij")
        g11, g12, g22 = fn(X, Y)
        return cls(np.stack(np.broadcast_arrays(g11, g12, g22), axis=-1))

    @property
    def resolution(self):
        return self._coeffs.shape[0]

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def is_flat(self):
        c = self._coeffs
        return (not self.necks and np.all(c[..., 0] == 1.0) and np.all(c[..., 1] == 0.0)
                and np.all(c[..., 2] == 1.0) and self.scale == 1.0)

    def scaled(self, C):
        """The metric C * g."""
        return MetricField(self._coeffs, scale=self.scale * C, necks=self.necks, _coef=self._coef)

    def packed(self):
        if self.necks:
            centers = np.array([n.center for n in self.necks], dtype=float)
            blend = np.array([n.blend for n in self.necks], dtype=float)
            fk = np.array([n.fknots for n in self.necks], dtype=float)
            wk = np.array([n.wknots for n in self.necks], dtype=float)
        else:
            centers = np.zeros((0, 2))
            blend = np.zeros((0, 2))
            fk = np.zeros((0, 2, 3))
            wk = np.zeros((0, 2, 3))
        return (self._coef, self.scale, centers, blend, fk, wk)

    # -- evaluation ---------------------------------------------------
    def eval_many(self, pts):
        """Metric tensors at an (n, 2) array of points, shape (n, 2, 2)."""
        g, _ = self.eval_with_derivatives(pts)
        out = np.empty((g.shape[0], 2, 2))
        out[:, 0, 0] = g[:, 0]
        out[:, 0, 1] = out[:, 1, 0] = g[:, 1]
        out[:, 1, 1] = g[:, 2]
        return out

    def eval_with_derivatives(self, pts):
        """(g, dg) with g of shape (n, 3) and dg[:, k, :] = d/dx_k of (g11, g12, g22)."""
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pts, dtype=float)))
        return K.eval_batch(pts, *self.packed())

    def _check_spd_interpolant(self):
        n = 2 * self.resolution
        x = (np.arange(n) + 0.5) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        g, _ = self.eval_with_derivatives(np.column_stack([X.ravel(), Y.ravel()]))
        det = g[:, 0] * g[:, 2] - g[:, 1] ** 2
        if np.any(g[:, 0] <= 0) or np.any(det <= SPD_TOL):
            raise ValueError("interpolated metric is not positive definite")


@dataclass(frozen=True)
class ConformalSpec:
    """Conformal factor samples u on the node grid; the metric is exp(2u) g_flat."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("u must be a square grid")
        if not np.all(np.isfinite(u)):
            raise ValueError("u must be finite")
        object.__setattr__(self, "u", u)

    @classmethod
    def from_function(cls, fn, resolution):
        x = np.arange(resolution) / resolution
        X, Y = np.meshgrid(x, x, indexing="ij")
        return cls(np.broadcast_to(fn(X, Y), X.shape).copy())

    @property
    def sup_norm(self):
        return float(np.abs(self.u).max())

    def metric(self, base=None):
        e = np.exp(2.0 * self.u)
        if base is None:
            c = np.zeros(self.u.shape + (3,))
            c[..., 0] = e
            c[..., 2] = e
            return MetricField(c)
        if base.resolution != self.u.shape[0] or base.necks:
            raise ValueError("base must be a plain grid metric of the same resolution")
        return MetricField(base.coeffs * e[..., None], scale=base.scale)


def bump_u(amplitude=0.1):
    """The standard smooth test bump u = amplitude * sin(2 pi x) sin(2 pi y)."""
    return lambda x, y: amplitude * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


# -- necks ----------------------------------------------------------------

@dataclass(frozen=True)
class NeckSpec:
    """Parameters of a (c, k)-retractable neck around each center.

    The nested sets are discs around each center with radii
    ``r_U < r_V1 < r_V2 < r_W`` built from ``eps3`` and ``eps4``.  The profile
    knobs are: ``margin`` (how far the middle-neck circumference exceeds the
    required factor 1/c), ``w_low`` (radial weight on the lower neck), and
    ``head_factor`` (peak of the angular profile at the head, relative to the
    middle neck).
    """

    centers: tuple = ((0.5, 0.5),)
    eps1: float = 0.4
    eps2: float = 0.05
    eps3: float = 0.1
    eps4: float = 0.01
    c: float = float(np.exp(-1.0 / 8.0))
    k: float = 4.0
    margin: float = 0.05
    w_low: float = 0.005
    head_factor: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(tuple(float(v) % 1.0 for v in p) for p in self.centers))
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if self.k < 3:
            raise ValueError("k must be at least 3")
        if min(self.eps1, self.eps2, self.eps3, self.eps4) <= 0:
            raise ValueError("radii must be positive")
        if not (self.k * self.eps4 <= 0.5 * self.eps3 and self.eps3 < self.eps1):
            raise ValueError("need k*eps4 << eps3 < eps1")
        if 3 * self.eps3 >= 0.5:
            raise ValueError("neck tube 3*eps3 must fit inside the unit torus")
        if not (self.margin > 0 and 0 < self.w_low <= 1 and self.head_factor >= 1):
            raise ValueError("invalid profile parameters")

    @property
    def K(self):
        return self.k / (2.0 + (self.k - 2.0) * self.c)

    @property
    def r_U(self):
        return self.eps3 + self.eps4

    @property
    def r_V1(self):
        return self.eps3 + 2.0 * self.eps4

    @property
    def r_V2(self):
        return self.eps3 + (2.0 + self.K) * self.eps4

    @property
    def r_W(self):
        return self.eps3 + (3.0 + self.K) * self.eps4

    r_outer = r_W

    @property
    def taper(self):
        """Width of the transitions of the radial weight."""
        return 0.25 * self.eps4

    def profile_knots(self):
        """Hermite knots (r, value, slope) of the angular profile f and the radial weight w."""
        rW = self.r_W
        f_out = rW * rW
        f_mid = (1.0 + self.margin) * f_out / self.c**2
        f_top = self.head_factor * f_mid
        r_h = 0.5 * self.r_U
        r_B = 2.0 * self.eps3
        fk = [
            (r_h, r_h * r_h, 2.0 * r_h),
            (self.r_U, f_top, 0.0),
            (self.r_V2, f_mid, 0.0),
            (rW, f_out, 0.0),
            (r_B, r_B * r_B, 2.0 * r_B),
        ]
        t = self.taper
        wk = [
            (self.r_V2 - t, 1.0, 0.0),
            (self.r_V2, self.w_low, 0.0),
            (rW, self.w_low, 0.0),
            (rW + t, 1.0, 0.0),
        ]
        return np.array(fk), np.array(wk)


@dataclass(frozen=True)
class _NeckOverlay:
    spec: NeckSpec
    center: tuple
    blend: tuple
    fknots: np.ndarray = field(repr=False)
    wknots: np.ndarray = field(repr=False)


@dataclass
class NeckReport:
    d1: float
    d2: float
    c_eff: float
    retractable: bool
    ratio: float = float("nan")
    threshold: float = float("nan")
    margin: float = float("nan")
    contraction: float = float("nan")
    n_samples: int = 0

    def to_dict(self):
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in self.__dict__.items()}


def _torus_delta(a, b):
    d = np.asarray(a, float) - np.asarray(b, float)
    return d - np.floor(d + 0.5)


def build_neck_metric(base, spec):
    """Add a retractable neck around each center of ``spec`` to ``base``.

    Inside radius ``2 * eps3`` the metric is the warped product
    ``w(r)^2 dr^2 + f(r) dtheta^2``; between ``2 * eps3`` and ``3 * eps3`` it is
    blended into ``base``; outside it equals ``base``.  The radial weight
    ``w`` is 1 except on the lower neck, where it drops to ``spec.w_low``.
    """
    fk, wk = spec.profile_knots()
    existing = [n.center for n in base.necks] + list(spec.centers)
    R = 3.0 * spec.eps3
    radii = [n.blend[1] for n in base.necks] + [R] * len(spec.centers)
    for i in range(len(existing)):
        for j in range(i):
            if np.hypot(*_torus_delta(existing[i], existing[j])) < radii[i] + radii[j]:
                raise ValueError("neck tubes overlap")
    new = tuple(_NeckOverlay(spec, tuple(c), (2.0 * spec.eps3, R), fk, wk) for c in spec.centers)
    m = MetricField(base.coeffs, scale=base.scale, necks=base.necks + new, _coef=base._coef)
    # profile constraints and positivity, checked by direct sampling
    r = np.linspace(spec.r_U, spec.r_W, 2001)[1:-1]
    f = np.array([K.hermite(x, fk, True)[0] for x in r])
    f_out = K.hermite(spec.r_W, fk, True)[0]
    if np.any(f < f_out * (1 - 1e-12)):
        raise ValueError("profile violates f(r) >= f(r_outer) on the neck")
    mid = r < spec.r_V2
    if np.any(spec.c * np.sqrt(f[mid]) < np.sqrt(f_out) * (1 - 1e-12)):
        raise ValueError("profile violates c*sqrt(f) >= sqrt(f(r_outer)) on the middle and upper neck")
    for c in spec.centers:
        rr, th = np.meshgrid(np.linspace(1e-4, R, 300), np.linspace(0, 2 * np.pi, 64, endpoint=False))
        pts = np.column_stack([c[0] + (rr * np.cos(th)).ravel(), c[1] + (rr * np.sin(th)).ravel()])
        g, _ = m.eval_with_derivatives(pts)
        if np.any(g[:, 0] * g[:, 2] - g[:, 1] ** 2 <= SPD_TOL) or np.any(g[:, 0] <= 0):
            raise ValueError("neck metric is not positive definite")
    return m


def _radial_length(m, center, theta, r0, r1, n=400):
    """g-length of the radial segment from r0 to r1 at angle theta (Gauss-Legendre)."""
    xg, wg = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(r0, r1, n // 8 + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    r = (0.5 * (hi - lo) * xg + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * wg).ravel()
    d = np.array([np.cos(theta), np.sin(theta)])
    pts = np.asarray(center) + r[:, None] * d
    g = m.eval_many(pts)
    speed = np.sqrt(np.einsum("i,nij,j->n", d, g, d))
    return float(np.sum(w * speed))


def _curve_length(m, pts):
    """Polyline g-length using midpoint metric values."""
    d = np.diff(pts, axis=0)
    g = m.eval_many(0.5 * (pts[1:] + pts[:-1]))
    return float(np.sum(np.sqrt(np.einsum("ni,nij,nj->n", d, g, d))))


def check_retractable(m, spec, n_angles=16, n_curves=200, seed=0):
    """Measure d1, d2 and the contraction factor of the radial retraction by sampling.

    The retraction pushes every point of the neck radially out to ``r_W``.
    ``c_eff`` is the largest observed ratio l(rho o gamma) / l(gamma) over short
    sampled curves in V2 minus U; ``contraction`` is the same over the whole
    neck W minus U.
    """
    for n in m.necks:
        if n.center in spec.centers and n.spec != spec:
            raise ValueError("metric was built with a different neck spec")
    rng = np.random.default_rng(seed)
    thetas = 2 * np.pi * np.arange(n_angles) / n_angles
    d1 = 0.0
    d2 = np.inf
    c_eff = 0.0
    contraction = 0.0
    for c in spec.centers:
        for th in thetas:
            d1 = max(d1, _radial_length(m, c, th, spec.r_V2, spec.r_W))
            d2 = min(d2, _radial_length(m, c, th, spec.r_V1, spec.r_V2))
        for region, hi in (("mid", spec.r_V2), ("all", spec.r_W)):
            worst = 0.0
            for i in range(n_curves):
                r = rng.uniform(spec.r_U, hi)
                th = rng.uniform(0, 2 * np.pi)
                # half of the samples are purely angular arcs, the extremal case
                psi = 0.5 * np.pi if i % 2 == 0 else rng.uniform(0, 2 * np.pi)
                ell = 0.2 * spec.eps4
                s = np.linspace(0.0, ell, 33)
                er = np.array([np.cos(th), np.sin(th)])
                et = np.array([-np.sin(th), np.cos(th)])
                dirv = np.cos(psi) * er + np.sin(psi) * et
                base_pt = np.asarray(c) + r * er
                pts = base_pt + s[:, None] * dirv
                rel = pts - np.asarray(c)
                rad = np.hypot(rel[:, 0], rel[:, 1])
                keep = (rad > spec.r_U) & (rad < hi)
                if keep.sum() < 2 or not keep.all():
                    continue
                ang = np.arctan2(rel[:, 1], rel[:, 0])
                img = np.asarray(c) + spec.r_W * np.column_stack([np.cos(ang), np.sin(ang)])
                lg = _curve_length(m, pts)
                lr = _curve_length(m, img)
                worst = max(worst, lr / lg)
            if region == "mid":
                c_eff = max(c_eff, worst)
            else:
                contraction = max(contraction, worst)
    ratio = d1 / d2
    threshold = (1.0 - spec.c) / spec.k
    ok = bool(ratio < threshold and c_eff < spec.c and contraction <= 1.0 + 1e-9)
    return NeckReport(d1=d1, d2=float(d2), c_eff=c_eff, retractable=ok, ratio=ratio,
                      threshold=threshold, margin=threshold / ratio if ratio > 0 else np.inf,
                      contraction=contraction, n_samples=n_curves)


# -- operations -----------------------------------------------------------

def eval_metric(m, p):
    """2 x 2 metric tensor at a point (the point is reduced mod 1)."""
    p = np.asarray(p, dtype=float) % 1.0
    return m.eval_many(p[None, :])[0]


def christoffel(m, p, method="fd"):
    """Christoffel symbols (G1_11, G1_12, G1_22, G2_11, G2_12, G2_22) at ``p``.

    ``method="fd"`` differentiates the interpolated coefficients by central
    differences with step 1/N (second order in the grid spacing);
    ``method="spline"`` uses the exact derivatives of the interpolant.
    """
    p = np.asarray(p, dtype=float)
    if method == "spline":
        g, dg = m.eval_with_derivatives(p[None, :])
        e = tuple(g[0]) + tuple(dg[0, 0]) + tuple(dg[0, 1])
        return np.array(K.christoffel_from(e))
    if method != "fd":
        raise ValueError("method must be 'fd' or 'spline'")
    h = 1.0 / m.resolution
    pts = np.array([p, p + (h, 0), p - (h, 0), p + (0, h), p - (0, h)])
    g, _ = m.eval_with_derivatives(pts)
    gx = (g[1] - g[2]) / (2 * h)
    gy = (g[3] - g[4]) / (2 * h)
    return np.array(K.christoffel_from(tuple(g[0]) + tuple(gx) + tuple(gy)))


def sample_grid(n):
    x = np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def generalized_eigenvalues(a, b):
    """Eigenvalues (lo, hi) of a^-1 b for stacks of 2x2 SPD matrices given as (g11, g12, g22).

    The pencil is reduced by the Cholesky factor of a to a symmetric matrix,
    whose eigenvalues mean +- sqrt(half-gap^2 + offdiag^2) have no cancellation.
    """
    l11 = np.sqrt(a[:, 0])
    l21 = a[:, 1] / l11
    l22 = np.sqrt(a[:, 2] - l21 * l21)
    c11 = b[:, 0] / a[:, 0]
    c12 = (b[:, 1] - l21 * b[:, 0] / l11) / (l11 * l22)
    c22 = (b[:, 2] - 2.0 * l21 * b[:, 1] / l11 + l21 * l21 * b[:, 0] / a[:, 0]) / (l22 * l22)
    mean = 0.5 * (c11 + c22)
    rad = np.hypot(0.5 * (c11 - c22), c12)
    hi = mean + rad
    lo = (b[:, 0] * b[:, 2] - b[:, 1] ** 2) / (a[:, 0] * a[:, 2] - a[:, 1] ** 2) / hi
    return lo, hi


def c0_distance(m1, m2, samples=None):
    """Sampled C^0 distance: the least log C with g1 / C <= g2 <= C g1.

    The sample set is the regular ``samples x samples`` grid with default
    ``4 * max(N1, N2)``, so fields of different resolution are compared on
    the grid of the finer one.
    """
    n = samples or 4 * max(m1.resolution, m2.resolution)
    pts = sample_grid(n)
    a, _ = m1.eval_with_derivatives(pts)
    b, _ = m2.eval_with_derivatives(pts)
    lo, hi = generalized_eigenvalues(a, b)
    return float(max(np.log(hi).max(), -np.log(lo).min(), 0.0))


def D_of_g(m, samples=None):
    """Dilation exp(d_C0(g_flat, g))."""
    return float(np.exp(c0_distance(MetricField.flat(m.resolution), m, samples)))


def area(m, cells=None):
    """Area of the torus: 4 x 4 Gauss-Legendre per cell on a ``cells``-square grid.

    The default uses the grid of the field, for which the rule is exact on
    bicubic pieces of a conformal field; neck metrics default to 512 cells.
    """
    n = cells or (512 if m.necks else m.resolution)
    xg, wg = np.polynomial.legendre.leggauss(4)
    x = ((np.arange(n)[:, None] + 0.5 * (xg + 1)) / n).ravel()
    w = (np.ones(n)[:, None] * 0.5 * wg / n).ravel()
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w).ravel()
    total = 0.0
    pts = np.column_stack([X.ravel(), Y.ravel()])
    for lo in range(0, pts.shape[0], 1 << 18):
        g, _ = m.eval_with_derivatives(pts[lo:lo + (1 << 18)])
        total += float(np.sum(W[lo:lo + (1 << 18)] * np.sqrt(g[:, 0] * g[:, 2] - g[:, 1] ** 2)))
    return total


def conformal_perturbation(base, delta, rng, modes=2, samples=None):
    """Random smooth conformal multiple exp(2u) * base with c0_distance(base, .) = delta.

    ``u`` is a random trigonometric polynomial of degree ``modes``; its
    amplitude is tuned by secant steps until the sampled distance matches.
    """
    if base.necks:
        raise ValueError("perturbations are defined for plain grid metrics")
    if delta == 0:
        return base
    N = base.resolution
    x = np.arange(N) / N
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.zeros((N, N))
    for kx in range(-modes, modes + 1):
        for ky in range(0, modes + 1):
            if kx == 0 and ky == 0:
                continue
            amp = rng.normal() / (1.0 + kx * kx + ky * ky)
            u += amp * np.cos(2 * np.pi * (kx * X + ky * Y) + rng.uniform(0, 2 * np.pi))
    u /= np.abs(u).max()

    def build(s):
        return MetricField(base.coeffs * np.exp(2 * s * u)[..., None], scale=base.scale)

    def dist(s):
        return c0_distance(base, build(s), samples)

    s0, s1 = 0.5 * delta, 0.5 * delta * 1.01
    f0, f1 = dist(s0) - delta, dist(s1) - delta
    for _ in range(30):
        if abs(f1) < 1e-13 * max(delta, 1.0):
            break
        s0, s1 = s1, s1 - f1 * (s1 - s0) / (f1 - f0)
        f0, f1 = f1, dist(s1) - delta
    return build(s1)


# -- configs --------------------------------------------------------------

def metric_from_config(cfg):
    """Build a MetricField from a JSON-style dict (see README for the schema)."""
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise ValueError("metric config needs a 'type' field")
    kind = cfg["type"]
    N = int(cfg.get("resolution", 32))
    if kind == "flat":
        m = MetricField.flat(N)
    elif kind == "conformal":
        if "u" in cfg:
            u = np.asarray(cfg["u"], dtype=float)
        elif "modes" in cfg:
            x = np.arange(N) / N
            X, Y = np.meshgrid(x, x, indexing="ij")
            u = np.zeros((N, N))
            for md in cfg["modes"]:
                u += md["amp"] * np.cos(2 * np.pi * (md.get("kx", 0) * X + md.get("ky", 0) * Y)
                                        + md.get("phase", 0.0))
        elif "bump" in cfg:
            u = ConformalSpec.from_function(bump_u(float(cfg["bump"])), N).u
        else:
            raise ValueError("conformal metric needs 'u', 'modes' or 'bump'")
        m = ConformalSpec(u).metric()
    elif kind == "grid":
        m = MetricField(np.asarray(cfg["coefficients"], dtype=float))
    elif kind == "neck":
        base = metric_from_config(cfg.get("base", {"type": "flat", "resolution": N}))
        spec = NeckSpec(**{k: (tuple(map(tuple, v)) if k == "centers" else v)
                           for k, v in cfg.get("neck", {}).items()})
        m = build_neck_metric(base, spec)
    else:
        raise ValueError(f"unknown metric type {kind!r}")
    if "scale" in cfg:
        m = m.scaled(float(cfg["scale"]))
    return m


def metric_to_config(m):
    if m.necks:
        raise ValueError("neck metrics are serialised through their generating config")
    cfg = {"type": "grid", "resolution": m.resolution, "coefficients": m.coeffs.tolist()}
    if m.scale != 1.0:
        cfg["scale"] = m.scale
    return cfg
