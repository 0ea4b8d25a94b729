"""Closed-form entropy lower bounds and thresholds.

All functions are pure and take plain floats.  Inputs: D is the C0
dilation against the flat metric, l the length of a shortest closed
geodesic, A the area; ``bumpy`` selects the sharper constant that holds when
all closed geodesics are nondegenerate.
"""
import math


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive")


def dm_bound_1(D, l, delta=0.0, bumpy=False):
    """log 3 / (ceil(sqrt(D) Lam / 2 + delta) sqrt(D + delta)) with Lam = l or 2 (l + sqrt(D))."""
    if D < 1:
        raise ValueError("D must be at least 1")
    _positive(l=l)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    lam = l if bumpy else 2.0 * (l + math.sqrt(D))
    N = math.ceil(math.sqrt(D) * lam / 2.0 + delta)
    return math.log(3.0) / (N * math.sqrt(D + delta))


def dm_bound_2(A, l, bumpy=False):
    """min(1 / sqrt(4A + L^2), 2 / (3L)) log 2 with L = l or max(4 sqrt(4A + l^2), 3l)."""
    _positive(A=A, l=l)
    L = l if bumpy else max(4.0 * math.sqrt(4.0 * A + l * l), 3.0 * l)
    return min(1.0 / math.sqrt(4.0 * A + L * L), 2.0 / (3.0 * L)) * math.log(2.0)


def ribbon_bound(l1, l2, l3, l4):
    """log 2 / min(l1 + l2, l3 + l4)."""
    _positive(l1=l1, l2=l2, l3=l3, l4=l4)
    return math.log(2.0) / min(l1 + l2, l3 + l4)


def generator_bound_M(L, A):
    """sqrt(L^2 + 4A), a length bound for a pair of generating loops."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    _positive(A=A)
    return math.sqrt(L * L + 4.0 * A)


def growth_from_generators(M, n):
    """log((2^n - 2) / n) / (M n): rate from at least (2^n - 2)/n classes of length <= M n."""
    _positive(M=M)
    if n < 2:
        raise ValueError("n must be at least 2")
    n = int(n)
    # log(2^n - 2) without forming huge integers
    log_count = n * math.log(2.0) + math.log1p(-2.0 ** (1 - n)) - math.log(n)
    return log_count / (M * n)


def growth_from_generators_sup(M, n_max=60):
    """Best rate over 2 <= n <= n_max, with the n attaining it."""
    best = max(range(2, n_max + 1), key=lambda n: growth_from_generators(M, n))
    return growth_from_generators(M, best), best


def growth_limit(M):
    """The n -> infinity limit log 2 / M."""
    _positive(M=M)
    return math.log(2.0) / M


def neck_C_max(c, k):
    """k / (2 + (k - 2) c): the largest admissible C0 dilation around a retractable neck."""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    if k < 3:
        raise ValueError("k must be at least 3")
    return k / (2.0 + (k - 2.0) * c)


def radius_r(s):
    """(s + 3) / (2 + (s + 1) exp(-s / 8))."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return (s + 3.0) / (2.0 + (s + 1.0) * math.exp(-s / 8.0))


def neck_entropy_bound(C, Gamma0):
    """Gamma0 / sqrt(C)."""
    if C < 1:
        raise ValueError("C must be at least 1")
    if Gamma0 < 0:
        raise ValueError("Gamma0 must be nonnegative")
    return Gamma0 / math.sqrt(C)


FORMULAS = {
    "dm1": dm_bound_1,
    "dm2": dm_bound_2,
    "ribbon": ribbon_bound,
    "M": generator_bound_M,
    "neck": neck_C_max,
    "rs": radius_r,
}
