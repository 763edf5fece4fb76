"""Distribution of a sum of n independent U(0, 1) draws.

The closed-form CDF is an alternating sum whose terms grow like n^n while
the result stays in [0, 1], so naive float evaluation is useless long before
n = 40 (terms near 1e63 would need ~210 bits to cancel correctly). The sum
is therefore accumulated in exact rational arithmetic and rounded once at
the end; x enters as the exact rational value of its float, making the
result correctly rounded, hence monotone and exactly symmetric on grids.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NonPositiveParameterError


def _check_n(n: int) -> int:
    if int(n) != n or int(n) < 1:
        raise NonPositiveParameterError(f"n must be a positive integer, got {n!r}")
    return int(n)


def irwin_hall_cdf(n: int, x: float) -> float:
    """Exact CDF of the sum of n uniforms, F_n(x), evaluated at float x.

    Clamps to 0 below the support and 1 above it. Exact for any n, though
    cost grows with n; the volume computations switch to
    :func:`irwin_hall_cdf_normal` past their configured size.
    """
    n = _check_n(n)
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    if x <= 0.0:
        return 0.0
    if x >= n:
        return 1.0
    xq = Fraction(x)
    total = Fraction(0)
    for k in range(math.floor(x) + 1):
        term = math.comb(n, k) * (xq - k) ** n
        total += -term if k % 2 else term
    value = total / math.factorial(n)
    # exact rationals can only leave [0, 1] through the final float rounding
    return min(1.0, max(0.0, float(value)))


def irwin_hall_cdf_normal(n: int, x: float) -> float:
    """Normal approximation N(n/2, n/12) to the same CDF."""
    n = _check_n(n)
    x = float(x)
    if math.isnan(x):
        raise ValueError("x must not be NaN")
    z = (x - n / 2.0) / math.sqrt(n / 12.0)
    return 0.5 * math.erfc(-z / math.sqrt(2.0))
