"""Independent reference computations used by the tests.

Nothing here imports the package's algorithms; each oracle recomputes its
quantity by a different route (enumeration, closed forms, quadrature or
high-precision arithmetic).
"""
from itertools import product
from math import gcd

import mpmath as mp
import numpy as np
from scipy import integrate


def lattice_chord_count(p, q, T):
    """Flat chords from p to q shorter than T: lattice vectors v with 0 < |q - p + v| < T."""
    d = np.asarray(q, float) - np.asarray(p, float)
    R = int(np.ceil(T)) + 2
    count = 0
    for m, n in product(range(-R, R + 1), repeat=2):
        L = np.hypot(d[0] + m, d[1] + n)
        if 0 < L < T:
            count += 1
    return count


# -- free group ---------------------------------------------------------------

def _phi(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def cyclically_reduced_count(L):
    """Cyclically reduced words of length L in F2: 3^L + (-1)^L + 2 (transfer-matrix trace)."""
    return 3**L + (-1) ** L + 2


def burnside_classes(L):
    """Conjugacy classes of cyclically reduced length exactly L, by Burnside's lemma."""
    divs = [d for d in range(1, L + 1) if L % d == 0]
    return sum(_phi(L // d) * cyclically_reduced_count(d) for d in divs) // L


def brute_force_words(n):
    """(reduced words of length <= n incl. identity, classes of length <= n) by itertools."""
    inv = {0: 1, 1: 0, 2: 3, 3: 2}
    words = 1
    classes = set()
    for L in range(1, n + 1):
        for w in product(range(4), repeat=L):
            if any(w[i + 1] == inv[w[i]] for i in range(L - 1)):
                continue
            words += 1
            if w[-1] == inv[w[0]]:
                continue
            classes.add(min(w[i:] + w[:i] for i in range(L)))
    return words, len(classes)


# -- metrics --------------------------------------------------------------

def conformal_christoffel(du_dx, du_dy):
    """Gamma for e^{2u} * identity, ordered (G111, G112, G122, G211, G212, G222)."""
    return (du_dx, du_dy, -du_dx, -du_dy, du_dx, du_dy)


def conformal_area(u):
    """Integral of exp(2u) over the unit square by adaptive quadrature."""
    val, _ = integrate.dblquad(lambda y, x: np.exp(2 * u(x, y)), 0, 1, 0, 1,
                               epsabs=1e-13, epsrel=1e-13)
    return val


# -- bounds at 50 digits ----------------------------------------------------------

mp.mp.dps = 50


def mp_dm_bound_1(D, l, delta, bumpy):
    D, l, delta = mp.mpf(D), mp.mpf(l), mp.mpf(delta)
    lam = l if bumpy else 2 * (l + mp.sqrt(D))
    N = mp.ceil(mp.sqrt(D) * lam / 2 + delta)
    return mp.log(3) / (N * mp.sqrt(D + delta))


def mp_dm_bound_2(A, l, bumpy):
    A, l = mp.mpf(A), mp.mpf(l)
    L = l if bumpy else max(4 * mp.sqrt(4 * A + l**2), 3 * l)
    return min(1 / mp.sqrt(4 * A + L**2), mp.mpf(2) / (3 * L)) * mp.log(2)


def mp_ribbon(l1, l2, l3, l4):
    return mp.log(2) / min(mp.mpf(l1) + l2, mp.mpf(l3) + l4)


def mp_M(L, A):
    return mp.sqrt(mp.mpf(L) ** 2 + 4 * mp.mpf(A))


def mp_growth(M, n):
    return mp.log((mp.mpf(2) ** n - 2) / n) / (mp.mpf(M) * n)


def mp_C_max(c, k):
    return mp.mpf(k) / (2 + (mp.mpf(k) - 2) * c)


def mp_radius_r(s):
    s = mp.mpf(s)
    return (s + 3) / (2 + (s + 1) * mp.exp(-s / 8))


# -- hyperbolic ----------------------------------------------------------------

def symmetric_pentagon_side(a):
    """Side length when a = b and the axes are orthogonal: arccosh(sinh(a)^2)."""
    return float(mp.acosh(mp.sinh(a) ** 2))
