"""Compiled inner loops: metric evaluation, Christoffel symbols, RK4, chord shooting.

Every kernel takes the packed metric description produced by
``MetricField.packed()``::

    coef     (3, N, N)  periodic cubic B-spline coefficients of g11, g12, g22
                        (N = 1 encodes a constant field)
    scale    float      global multiplier
    centers  (n, 2)     neck centers (n may be 0)
    blend    (n, 2)     inner/outer radius of the blend annulus
    fknots   (n, K, 3)  Hermite knots (r, f, f') of the angular profile
    wknots   (n, J, 3)  Hermite knots (r, w, w') of the radial weight
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _bspline(t):
    s = 1.0 - t
    t2 = t * t
    t3 = t2 * t
    w0 = s * s * s / 6.0
    w1 = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0
    w2 = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0
    w3 = t3 / 6.0
    d0 = -0.5 * s * s
    d1 = 0.5 * (3.0 * t2 - 4.0 * t)
    d2 = 0.5 * (-3.0 * t2 + 2.0 * t + 1.0)
    d3 = 0.5 * t2
    return w0, w1, w2, w3, d0, d1, d2, d3


@njit(cache=True, inline="always")
def spline_eval(x, y, coef):
    """Value and first derivatives of the three coefficient splines at (x, y)."""
    N = coef.shape[1]
    if N == 1:
        return (coef[0, 0, 0], coef[1, 0, 0], coef[2, 0, 0], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    u = x * N
    v = y * N
    fi = math.floor(u)
    fj = math.floor(v)
    tx = u - fi
    ty = v - fj
    i0 = int(fi) - 1
    j0 = int(fj) - 1
    a0, a1, a2, a3, da0, da1, da2, da3 = _bspline(tx)
    b0, b1, b2, b3, db0, db1, db2, db3 = _bspline(ty)
    wx = (a0, a1, a2, a3)
    dwx = (da0, da1, da2, da3)
    wy = (b0, b1, b2, b3)
    dwy = (db0, db1, db2, db3)
    g0 = 0.0
    g1 = 0.0
    g2 = 0.0
    gx0 = 0.0
    gx1 = 0.0
    gx2 = 0.0
    gy0 = 0.0
    gy1 = 0.0
    gy2 = 0.0
    for a in range(4):
        ii = (i0 + a) % N
        for b in range(4):
            jj = (j0 + b) % N
            w = wx[a] * wy[b]
            wdx = dwx[a] * wy[b]
            wdy = wx[a] * dwy[b]
            c0 = coef[0, ii, jj]
            c1 = coef[1, ii, jj]
            c2 = coef[2, ii, jj]
            g0 += w * c0
            g1 += w * c1
            g2 += w * c2
            gx0 += wdx * c0
            gx1 += wdx * c1
            gx2 += wdx * c2
            gy0 += wdy * c0
            gy1 += wdy * c1
            gy2 += wdy * c2
    return (g0, g1, g2, gx0 * N, gx1 * N, gx2 * N, gy0 * N, gy1 * N, gy2 * N)


@njit(cache=True, inline="always")
def hermite(r, knots, square_tail):
    """Piecewise cubic Hermite profile; outside the knots it is r**2 or constant."""
    K = knots.shape[0]
    if r <= knots[0, 0]:
        if square_tail:
            return r * r, 2.0 * r
        return knots[0, 1], 0.0
    if r >= knots[K - 1, 0]:
        if square_tail:
            return r * r, 2.0 * r
        return knots[K - 1, 1], 0.0
    j = 0
    while knots[j + 1, 0] <= r:
        j += 1
    r0 = knots[j, 0]
    h = knots[j + 1, 0] - r0
    s = (r - r0) / h
    s2 = s * s
    s3 = s2 * s
    v0 = knots[j, 1]
    m0 = knots[j, 2] * h
    v1 = knots[j + 1, 1]
    m1 = knots[j + 1, 2] * h
    val = (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * m1
    der = (6 * s2 - 6 * s) * v0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * v1 + (3 * s2 - 2 * s) * m1
    return val, der / h


@njit(cache=True, inline="always")
def _warped(dx, dy, r, fk, wk):
    """Cartesian form of w(r)^2 dr^2 + f(r) dtheta^2 and its gradient."""
    if r < fk[0, 0] and r < wk[0, 0]:
        return (1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    f, df = hermite(r, fk, True)
    w, dw = hermite(r, wk, False)
    phi = f / (r * r)
    dphi = df / (r * r) - 2.0 * f / (r * r * r)
    nx = dx / r
    ny = dy / r
    a = w * w - phi
    da = 2.0 * w * dw - dphi
    g0 = phi + a * nx * nx
    g1 = a * nx * ny
    g2 = phi + a * ny * ny
    # d(n_i n_j)/dx_k = (delta_ik n_j + delta_jk n_i - 2 n_i n_j n_k) / r
    ir = 1.0 / r
    g0x = dphi * nx + da * nx * nx * nx + a * (2.0 * nx - 2.0 * nx * nx * nx) * ir
    g1x = da * nx * nx * ny + a * (ny - 2.0 * nx * ny * nx) * ir
    g2x = dphi * nx + da * nx * ny * ny + a * (-2.0 * ny * ny * nx) * ir
    g0y = dphi * ny + da * ny * nx * nx + a * (-2.0 * nx * nx * ny) * ir
    g1y = da * ny * nx * ny + a * (nx - 2.0 * nx * ny * ny) * ir
    g2y = dphi * ny + da * ny * ny * ny + a * (2.0 * ny - 2.0 * ny * ny * ny) * ir
    return (g0, g1, g2, g0x, g1x, g2x, g0y, g1y, g2y)


@njit(cache=True, inline="always")
def metric_eval(x, y, coef, scale, centers, blend, fknots, wknots):
    """g11, g12, g22 and their x- and y-derivatives at a point of the cover."""
    b = spline_eval(x, y, coef)
    if centers.shape[0] == 0 and scale == 1.0:
        return b
    for c in range(centers.shape[0]):
        dx = x - centers[c, 0]
        dy = y - centers[c, 1]
        dx -= math.floor(dx + 0.5)
        dy -= math.floor(dy + 0.5)
        r = math.sqrt(dx * dx + dy * dy)
        r0 = blend[c, 0]
        r1 = blend[c, 1]
        if r >= r1:
            continue
        w = _warped(dx, dy, r, fknots[c], wknots[c])
        if r <= r0:
            b = w
            break
        s = (r1 - r) / (r1 - r0)
        chi = s * s * (3.0 - 2.0 * s)
        dchi = -6.0 * s * (1.0 - s) / (r1 - r0) / r
        cx = dchi * dx
        cy = dchi * dy
        d0 = w[0] - b[0]
        d1 = w[1] - b[1]
        d2 = w[2] - b[2]
        b = (b[0] + chi * d0, b[1] + chi * d1, b[2] + chi * d2,
             b[3] + chi * (w[3] - b[3]) + d0 * cx,
             b[4] + chi * (w[4] - b[4]) + d1 * cx,
             b[5] + chi * (w[5] - b[5]) + d2 * cx,
             b[6] + chi * (w[6] - b[6]) + d0 * cy,
             b[7] + chi * (w[7] - b[7]) + d1 * cy,
             b[8] + chi * (w[8] - b[8]) + d2 * cy)
        break
    if scale == 1.0:
        return b
    return (b[0] * scale, b[1] * scale, b[2] * scale, b[3] * scale, b[4] * scale,
            b[5] * scale, b[6] * scale, b[7] * scale, b[8] * scale)


@njit(cache=True)
def eval_batch(pts, coef, scale, centers, blend, fknots, wknots):
    n = pts.shape[0]
    g = np.empty((n, 3))
    dg = np.empty((n, 2, 3))
    for i in range(n):
        e = metric_eval(pts[i, 0], pts[i, 1], coef, scale, centers, blend, fknots, wknots)
        for q in range(3):
            g[i, q] = e[q]
            dg[i, 0, q] = e[3 + q]
            dg[i, 1, q] = e[6 + q]
    return g, dg


@njit(cache=True, inline="always")
def christoffel_from(e):
    """Six Christoffel symbols (G1_11, G1_12, G1_22, G2_11, G2_12, G2_22)."""
    g11, g12, g22 = e[0], e[1], e[2]
    g11x, g12x, g22x = e[3], e[4], e[5]
    g11y, g12y, g22y = e[6], e[7], e[8]
    det = g11 * g22 - g12 * g12
    i11 = g22 / det
    i12 = -g12 / det
    i22 = g11 / det
    # first-kind symbols [ij, l] = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    a111 = 0.5 * g11x
    a112 = g12x - 0.5 * g11y
    a121 = 0.5 * g11y
    a122 = 0.5 * g22x
    a221 = g12y - 0.5 * g22x
    a222 = 0.5 * g22y
    G111 = i11 * a111 + i12 * a112
    G211 = i12 * a111 + i22 * a112
    G112 = i11 * a121 + i12 * a122
    G212 = i12 * a121 + i22 * a122
    G122 = i11 * a221 + i12 * a222
    G222 = i12 * a221 + i22 * a222
    return G111, G112, G122, G211, G212, G222


@njit(cache=True, inline="always")
def _rhs(x, y, vx, vy, coef, scale, centers, blend, fknots, wknots):
    e = metric_eval(x, y, coef, scale, centers, blend, fknots, wknots)
    G111, G112, G122, G211, G212, G222 = christoffel_from(e)
    ax = -(G111 * vx * vx + 2.0 * G112 * vx * vy + G122 * vy * vy)
    ay = -(G211 * vx * vx + 2.0 * G212 * vx * vy + G222 * vy * vy)
    return vx, vy, ax, ay


@njit(cache=True)
def rk4_step(x, y, vx, vy, h, coef, scale, centers, blend, fknots, wknots):
    k1 = _rhs(x, y, vx, vy, coef, scale, centers, blend, fknots, wknots)
    k2 = _rhs(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], vx + 0.5 * h * k1[2], vy + 0.5 * h * k1[3],
              coef, scale, centers, blend, fknots, wknots)
    k3 = _rhs(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], vx + 0.5 * h * k2[2], vy + 0.5 * h * k2[3],
              coef, scale, centers, blend, fknots, wknots)
    k4 = _rhs(x + h * k3[0], y + h * k3[1], vx + h * k3[2], vy + h * k3[3],
              coef, scale, centers, blend, fknots, wknots)
    c = h / 6.0
    return (x + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            vx + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
            vy + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]))


@njit(cache=True)
def rk4_run(s0, h, nsteps, coef, scale, centers, blend, fknots, wknots):
    """Fixed-step trajectory; returns all states and the number of valid ones."""
    out = np.empty((nsteps + 1, 4))
    x, y, vx, vy = s0[0], s0[1], s0[2], s0[3]
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = vx
    out[0, 3] = vy
    for i in range(nsteps):
        x, y, vx, vy = rk4_step(x, y, vx, vy, h, coef, scale, centers, blend, fknots, wknots)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(vx) and math.isfinite(vy)):
            return out, i + 1
        out[i + 1, 0] = x
        out[i + 1, 1] = y
        out[i + 1, 2] = vx
        out[i + 1, 3] = vy
    return out, nsteps + 1


@njit(cache=True)
def rk4_sampled(states, h, steps_per_sample, n_samples, coef, scale, centers, blend, fknots, wknots):
    """Integrate many initial states, keeping every ``steps_per_sample``-th state."""
    n = states.shape[0]
    out = np.empty((n, n_samples + 1, 4))
    for k in range(n):
        x, y, vx, vy = states[k, 0], states[k, 1], states[k, 2], states[k, 3]
        out[k, 0, 0] = x
        out[k, 0, 1] = y
        out[k, 0, 2] = vx
        out[k, 0, 3] = vy
        for s in range(n_samples):
            for _ in range(steps_per_sample):
                x, y, vx, vy = rk4_step(x, y, vx, vy, h, coef, scale, centers, blend, fknots, wknots)
            out[k, s + 1, 0] = x
            out[k, s + 1, 1] = y
            out[k, s + 1, 2] = vx
            out[k, s + 1, 3] = vy
    return out


@njit(cache=True)
def unit_velocity(x, y, theta, coef, scale, centers, blend, fknots, wknots):
    e = metric_eval(x, y, coef, scale, centers, blend, fknots, wknots)
    vx = math.cos(theta)
    vy = math.sin(theta)
    nrm = math.sqrt(e[0] * vx * vx + 2.0 * e[1] * vx * vy + e[2] * vy * vy)
    return vx / nrm, vy / nrm


@njit(cache=True)
def _segment_events(x, y, x1, y1, t, h, qx, qy, r_near, ia, events, ne, only_m, only_n, use_only):
    dxs = x1 - x
    dys = y1 - y
    L2 = dxs * dxs + dys * dys
    if L2 == 0.0:
        return ne
    L = math.sqrt(L2)
    m_lo = int(math.ceil(min(x, x1) - r_near - qx))
    m_hi = int(math.floor(max(x, x1) + r_near - qx))
    n_lo = int(math.ceil(min(y, y1) - r_near - qy))
    n_hi = int(math.floor(max(y, y1) + r_near - qy))
    for m in range(m_lo, m_hi + 1):
        for n in range(n_lo, n_hi + 1):
            if use_only and (m != only_m or n != only_n):
                continue
            Qx = qx + m
            Qy = qy + n
            s = ((Qx - x) * dxs + (Qy - y) * dys) / L2
            if s < 0.0 or s >= 1.0:
                continue
            te = t + s * h
            if te < 1e-9:
                continue
            cr = (dxs * (Qy - y) - dys * (Qx - x)) / L
            if abs(cr) >= r_near:
                continue
            if ne < events.shape[0]:
                events[ne, 0] = ia
                events[ne, 1] = m
                events[ne, 2] = n
                events[ne, 3] = te
                events[ne, 4] = cr
            ne += 1
    return ne


@njit(cache=True)
def shoot_events(px, py, qx, qy, angles, t_end, h, r_near, max_events,
                 coef, scale, centers, blend, fknots, wknots):
    """Closest-approach events of rays from p to every lattice translate of q.

    Row layout: (angle index, m, n, time, signed distance).  The returned
    count may exceed ``max_events``; the caller treats that as overflow.
    """
    events = np.empty((max_events, 5))
    ne = 0
    nsteps = int(math.ceil(t_end / h))
    for ia in range(angles.shape[0]):
        vx, vy = unit_velocity(px, py, angles[ia], coef, scale, centers, blend, fknots, wknots)
        x = px
        y = py
        t = 0.0
        for _ in range(nsteps):
            x1, y1, vx1, vy1 = rk4_step(x, y, vx, vy, h, coef, scale, centers, blend, fknots, wknots)
            if not (math.isfinite(x1) and math.isfinite(y1)):
                break
            ne = _segment_events(x, y, x1, y1, t, h, qx, qy, r_near, ia, events, ne, 0, 0, False)
            x, y, vx, vy = x1, y1, vx1, vy1
            t += h
    return events, ne


@njit(cache=True)
def _target_value(px, py, qx, qy, theta, m, n, t0, h, r_near,
                  coef, scale, centers, blend, fknots, wknots):
    """Signed miss distance of the ray at ``theta`` for the pass nearest ``t0``."""
    buf = np.empty((64, 5))
    vx, vy = unit_velocity(px, py, theta, coef, scale, centers, blend, fknots, wknots)
    x = px
    y = py
    t = 0.0
    t_end = t0 + 0.5 + 4.0 * h
    nsteps = int(math.ceil(t_end / h))
    best = 1e300
    val = 0.0
    tb = 0.0
    for _ in range(nsteps):
        x1, y1, vx1, vy1 = rk4_step(x, y, vx, vy, h, coef, scale, centers, blend, fknots, wknots)
        if not (math.isfinite(x1) and math.isfinite(y1)):
            break
        k = _segment_events(x, y, x1, y1, t, h, qx, qy, r_near, 0, buf, 0, m, n, True)
        for i in range(min(k, 64)):
            dt = abs(buf[i, 3] - t0)
            if dt < best:
                best = dt
                val = buf[i, 4]
                tb = buf[i, 3]
        x, y, vx, vy = x1, y1, vx1, vy1
        t += h
    return best < 0.5, val, tb


@njit(cache=True)
def refine_brackets(px, py, qx, qy, brackets, h, r_near, tol, max_iter,
                    coef, scale, centers, blend, fknots, wknots):
    """Illinois regula falsi on each bracket row (theta_a, theta_b, f_a, f_b, m, n, t0).

    Returns rows (theta, length, converged flag).
    """
    nb = brackets.shape[0]
    out = np.empty((nb, 3))
    for k in range(nb):
        a = brackets[k, 0]
        b = brackets[k, 1]
        fa = brackets[k, 2]
        fb = brackets[k, 3]
        m = int(brackets[k, 4])
        n = int(brackets[k, 5])
        t0 = brackets[k, 6]
        ok = 0.0
        c = a
        tc = t0
        if fa == 0.0:
            ok = 1.0
        else:
            for _ in range(max_iter):
                c = b - fb * (b - a) / (fb - fa)
                found, fc, tnew = _target_value(px, py, qx, qy, c, m, n, tc, h, r_near,
                                                coef, scale, centers, blend, fknots, wknots)
                if not found:
                    break
                tc = tnew
                if abs(fc) < tol:
                    ok = 1.0
                    break
                if fc * fb < 0.0:
                    a = b
                    fa = fb
                else:
                    fa *= 0.5
                b = c
                fb = fc
                if abs(b - a) < 1e-15:
                    ok = 1.0 if abs(fc) < 1e3 * tol else 0.0
                    break
        out[k, 0] = c
        out[k, 1] = tc
        out[k, 2] = ok
    return out


@njit(cache=True)
def loop_energy_grad(verts, wx, wy, coef, scale, centers, blend, fknots, wknots):
    """Discrete energy (M/2) sum |dv|_g^2, its vertex gradient, and the length."""
    M = verts.shape[0]
    grad = np.zeros((M, 2))
    E = 0.0
    Lsum = 0.0
    for i in range(M):
        x0 = verts[i, 0]
        y0 = verts[i, 1]
        if i + 1 < M:
            x1 = verts[i + 1, 0]
            y1 = verts[i + 1, 1]
        else:
            x1 = verts[0, 0] + wx
            y1 = verts[0, 1] + wy
        dx = x1 - x0
        dy = y1 - y0
        e = metric_eval(0.5 * (x0 + x1), 0.5 * (y0 + y1), coef, scale, centers, blend, fknots, wknots)
        q = e[0] * dx * dx + 2.0 * e[1] * dx * dy + e[2] * dy * dy
        E += q
        Lsum += math.sqrt(max(q, 0.0))
        # d q / d(dx, dy)
        qdx = 2.0 * (e[0] * dx + e[1] * dy)
        qdy = 2.0 * (e[1] * dx + e[2] * dy)
        # d q / d(midpoint)
        qmx = e[3] * dx * dx + 2.0 * e[4] * dx * dy + e[5] * dy * dy
        qmy = e[6] * dx * dx + 2.0 * e[7] * dx * dy + e[8] * dy * dy
        j = i + 1 if i + 1 < M else 0
        grad[i, 0] += -qdx + 0.5 * qmx
        grad[i, 1] += -qdy + 0.5 * qmy
        grad[j, 0] += qdx + 0.5 * qmx
        grad[j, 1] += qdy + 0.5 * qmy
    f = 0.5 * M
    for i in range(M):
        grad[i, 0] *= f
        grad[i, 1] *= f
    return E * f, grad, Lsum
