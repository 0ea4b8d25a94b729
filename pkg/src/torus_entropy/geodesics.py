"""Geodesic flow on the unit tangent bundle and geodesic chord counting.

Positions live in the universal cover R^2; the metric is evaluated mod 1.
Geodesics solve x'' + Gamma(x)(x', x') = 0, integrated as a first-order
system by the classical fixed-step fourth-order Runge-Kutta method with the
exact derivatives of the interpolated metric.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels as K


class GeodesicError(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, msg, last_state):
        super().__init__(msg)
        self.last_state = last_state


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    vx: float
    vy: float

    @classmethod
    def from_angle(cls, m, p, theta):
        """Unit vector at p making coordinate angle theta with the x-axis."""
        vx, vy = K.unit_velocity(float(p[0]), float(p[1]), float(theta), *m.packed())
        return cls(float(p[0]), float(p[1]), vx, vy)

    def as_array(self):
        return np.array([self.x, self.y, self.vx, self.vy])

    def speed(self, m):
        return float(np.sqrt(speed_sq(m, self.as_array()[None, :])[0]))

    def normalized(self, m):
        s = self.speed(m)
        return PhaseState(self.x, self.y, self.vx / s, self.vy / s)


def speed_sq(m, states):
    """g(v, v) for an (n, 4) array of states."""
    states = np.atleast_2d(states)
    g, _ = m.eval_with_derivatives(states[:, :2])
    vx, vy = states[:, 2], states[:, 3]
    return g[:, 0] * vx * vx + 2 * g[:, 1] * vx * vy + g[:, 2] * vy * vy


@dataclass
class Trajectory:
    h: float
    states: np.ndarray
    T: float

    @property
    def times(self):
        return self.h * np.arange(self.states.shape[0])

    @property
    def final(self):
        return PhaseState(*self.states[-1])

    def speed_drift(self, m):
        """Largest relative deviation of g(v, v) from its initial value."""
        e = speed_sq(m, self.states)
        return float(np.max(np.abs(e - e[0])) / e[0])


def integrate(m, s0, T, h, check_unit=True, max_drift=1e-3):
    """RK4 trajectory from ``s0`` over total time ``T``.

    The step is shrunk to ``T / ceil(T / h)`` so the last state sits at ``T``.
    """
    if not h > 0 or T < 0:
        raise ValueError("need h > 0 and T >= 0")
    s0 = s0 if isinstance(s0, PhaseState) else PhaseState(*s0)
    if check_unit and abs(s0.speed(m) - 1.0) > 1e-9:
        raise ValueError("initial state is not a unit vector")
    n = int(np.ceil(T / h - 1e-9)) if T > 0 else 0
    step = T / n if n else h
    states, valid = K.rk4_run(s0.as_array(), step, n, *m.packed())
    if valid < n + 1:
        raise GeodesicError("non-finite state", PhaseState(*states[valid - 1]))
    e0, e1 = speed_sq(m, states[[0, -1]])
    if not abs(e1 - e0) <= max_drift * e0:
        # stiff metrics (thin necks) need much smaller steps than smooth ones
        raise GeodesicError("integration unstable: speed drift above max_drift, reduce h",
                            PhaseState(*states[-1]))
    return Trajectory(h=step, states=states, T=T)


@dataclass
class ChordSet:
    """Geodesic chords from p to lattice translates of q with length below T."""

    p: tuple
    q: tuple
    T: float
    n_angles: int
    angles: np.ndarray
    lengths: np.ndarray
    targets: np.ndarray
    dropped: int = 0
    overflow: bool = False

    def count(self, T=None):
        T = self.T if T is None else T
        return int(np.sum(self.lengths < T))

    def rows(self):
        """(angle, length, m, n) rows sorted by length."""
        order = np.lexsort((self.angles, self.lengths))
        return [(float(self.angles[i]), float(self.lengths[i]), int(self.targets[i, 0]),
                 int(self.targets[i, 1])) for i in order]


def _brackets(events, n_angles, angles):
    """Angle brackets where the miss distance to a target changes sign.

    Passes of neighbouring rays are matched by nearest passage time.
    """
    groups = {}
    for ia, m, n, t, f in events:
        groups.setdefault((int(m), int(n), int(ia)), []).append((t, f))
    rows = []
    for (m, n, ia), evs in groups.items():
        ja = ia + 1 if ia + 1 < n_angles else 0
        nxt = groups.get((m, n, ja))
        if nxt is None:
            continue
        tb = np.array([e[0] for e in nxt])
        for t, f in evs:
            j = int(np.argmin(np.abs(tb - t)))
            if abs(tb[j] - t) >= 0.5:
                continue
            f2 = nxt[j][1]
            if f == 0.0 or f * f2 < 0.0:
                b = angles[ja] + (2 * np.pi if ja == 0 else 0.0)
                rows.append((angles[ia], b, f, f2, m, n, t))
    return np.array(rows, dtype=float).reshape(-1, 7)


def find_chords(m, p, q, T, n_angles=4096, h=0.02, r_near=0.45, tol=1e-10, max_events=None):
    """Geodesic chords from p to q by angle shooting and bracket refinement.

    Rays are shot at ``n_angles`` equally spaced coordinate angles.  For each
    lattice translate of q, every pass of a ray within ``r_near`` records its
    signed miss distance; sign changes between neighbouring angles bracket a
    chord, which is then refined by Illinois regula falsi.  Brackets that fail
    to converge are counted in ``dropped``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if n_angles < 64:
        raise ValueError("n_angles must be at least 64")
    packed = m.packed()
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    t_shoot = T + 4 * h
    cap = max_events or int(n_angles * (2 * r_near * t_shoot + 8) * 2)
    events, ne = K.shoot_events(px, py, qx, qy, angles, t_shoot, h, r_near, cap, *packed)
    overflow = ne > cap
    events = events[:min(ne, cap)]
    br = _brackets(events, n_angles, angles)
    if br.shape[0] == 0:
        return ChordSet((px, py), (qx, qy), T, n_angles, np.zeros(0), np.zeros(0),
                        np.zeros((0, 2), int), 0, overflow)
    ref = K.refine_brackets(px, py, qx, qy, br, h, r_near, tol, 80, *packed)
    ok = ref[:, 2] > 0
    dropped = int(np.sum(~ok))
    ang = np.mod(ref[ok, 0], 2 * np.pi)
    lengths = ref[ok, 1]
    targets = br[ok, 4:6].astype(int)
    keep = lengths < T
    ang, lengths, targets = ang[keep], lengths[keep], targets[keep]
    # distinct chords: different target, or angles more than 1e-7 apart
    order = np.lexsort((ang, targets[:, 1], targets[:, 0]))
    ang, lengths, targets = ang[order], lengths[order], targets[order]
    dup = np.zeros(len(ang), bool)
    if len(ang) > 1:
        dup[1:] = (np.all(targets[1:] == targets[:-1], axis=1)) & (np.diff(ang) <= 1e-7)
    return ChordSet((px, py), (qx, qy), T, n_angles, ang[~dup], lengths[~dup], targets[~dup],
                    dropped, overflow)


def chord_count(m, p, q, T, n_angles=4096, **kw):
    """Number of distinct geodesic chords from p to q of length < T."""
    return find_chords(m, p, q, T, n_angles, **kw).count()
