"""Independent reference computations used by the tests.

Nothing here imports the package; each routine takes the slow, obvious
route so that agreement with the library is meaningful.
"""

import cmath
import math
from fractions import Fraction
from itertools import combinations


def set_partitions(n):
    """All set partitions of ``{0, ..., n-1}`` as lists of blocks."""
    if n == 0:
        yield []
        return
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n - 1]] + part[i + 1:]
        yield part + [[n - 1]]


def is_noncrossing(part):
    for b1, b2 in combinations(part, 2):
        for a, c in combinations(sorted(b1), 2):
            for b, d in combinations(sorted(b2), 2):
                if a < b < c < d or b < a < d < c:
                    return False
    return True


def moments_from_cumulants_brute(kappa, n, free):
    """``m_n = sum over (non-crossing) partitions of prod kappa_{|B|}``."""
    tot = 0
    for part in set_partitions(n):
        if free and not is_noncrossing(part):
            continue
        prod = 1
        for blk in part:
            prod = prod * kappa[len(blk) - 1]
        tot = tot + prod
    return tot


def narayana(n, k):
    return Fraction(math.comb(n, k) * math.comb(n, k - 1), n)


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def det3(m):
    """Cofactor expansion of a 3x3 matrix."""
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def principal_sqrt_root_of_quadratic(b, c, z):
    """Root ``w`` of ``w^2 - b w + c = 0`` with the larger imaginary part."""
    d = cmath.sqrt(b * b - 4 * c)
    r1, r2 = (b + d) / 2, (b - d) / 2
    return r1 if r1.imag >= r2.imag else r2


def rho_quarter_density(x):
    """Closed-form density of the Cauchy(1) minus MP(1, 1/4) law, written from
    the ``p_+ / p_-`` expression."""
    s = 1.0 if 4 * x - 3 >= 0 else -1.0
    d = abs(4 * x - 3)
    q = math.sqrt(16 * x * x - 24 * x + 73)
    pm, pp = math.sqrt(q - d), math.sqrt(q + d)
    return (5 * math.sqrt(2) + math.sqrt(d) * (x * pm - s * pp)) / (8 * math.sqrt(2) * math.pi * (x * x + 1))


def gamma_quarter_density(x):
    """Closed-form density of the Cauchy(1) minus S(0, 1/4) law."""
    x = abs(x)
    return math.sqrt(2) / math.pi * (math.sqrt(2) - math.sqrt(x * math.sqrt(x * x + 4) - x * x))
