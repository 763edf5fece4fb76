"""How much of parameter space is reference-dependent.

Draw both groups' parameters uniformly from a cube and ask how often the
sign of a component depends on the reference group. In units where every
covariate gap is one (see :func:`obdflip.models.standardize_units`):

* the explained components are 1'beta_H and 1'beta_K, independent and
  symmetric, so the explained flip fraction is exactly 1/2 in every
  dimension and for every cube half-width;
* the unexplained flip event reduces to a sum I_2 of two uniforms against a
  sum J_2d of 2d uniforms, giving

      P_d = Pr(I_2 > 1, J_2d < d + 1 - I_2) + Pr(I_2 < 1, J_2d > d + 1 - I_2),

  a one-dimensional integral of the triangular I_2 density against the
  Irwin-Hall CDF. P_1 = 1/4 and P_d climbs toward 1/2 like 1/sqrt(d).

Everything is also available by direct Monte Carlo over the cube, with or
without the standardization, on a counter-based stream that makes the
estimate independent of chunking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDrawCountError,
    NonPositiveParameterError,
    QuadratureNotConvergedError,
)
from .irwinhall import irwin_hall_cdf, irwin_hall_cdf_normal
from .signflip import pair_flip_masks
from .simulation import draw_param_block

# largest uniform-sum count evaluated with the exact CDF by default
EXACT_MAX_N = 40
QUADRATURE_TOL = 1e-6
_MAX_DEPTH = 48
_MIN_DRAWS = 1000


@dataclass(frozen=True)
class VolumeEstimate:
    """A flip-fraction value with its provenance."""

    component: str            # "explained" | "unexplained"
    method: str               # "exact" | "normal_approx" | "monte_carlo"
    d: int
    fraction: float
    standard_error: float
    standardized: bool = True
    half_width: float | None = None
    n_draws: int | None = None
    seed: int | None = None
    n_boundary: int | None = None


def _adaptive_simpson(f, a, b, tol):
    """Adaptive Simpson with Richardson correction; absolute tolerance."""

    def simpson(left, right, fl, fm, fr):
        return (right - left) / 6.0 * (fl + 4.0 * fm + fr)

    def recurse(left, right, fl, fm, fr, whole, tol, depth):
        if depth > _MAX_DEPTH:
            raise QuadratureNotConvergedError(
                f"no convergence to {tol:g} on [{left:g}, {right:g}]"
            )
        mid = 0.5 * (left + right)
        lm = 0.5 * (left + mid)
        rm = 0.5 * (mid + right)
        flm, frm = f(lm), f(rm)
        part_l = simpson(left, mid, fl, flm, fm)
        part_r = simpson(mid, right, fm, frm, fr)
        delta = part_l + part_r - whole
        if abs(delta) <= 15.0 * tol:
            return part_l + part_r + delta / 15.0
        return recurse(left, mid, fl, flm, fm, part_l, tol / 2.0, depth + 1) + recurse(
            mid, right, fm, frm, fr, part_r, tol / 2.0, depth + 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0)


def _check_d(d: int) -> int:
    if int(d) != d or d < 1:
        raise NonPositiveParameterError(f"d must be a positive integer, got {d!r}")
    return int(d)


def explained_flip_fraction(d: int | None = None) -> VolumeEstimate:
    """Explained flip fraction in standardized units: exactly 1/2, every d."""
    return VolumeEstimate(
        component="explained",
        method="exact",
        d=0 if d is None else _check_d(d),
        fraction=0.5,
        standard_error=0.0,
    )


def unexplained_flip_fraction(
    d: int,
    exact_max_n: int = EXACT_MAX_N,
    tol: float = QUADRATURE_TOL,
) -> VolumeEstimate:
    """P_d by quadrature of the triangular density against the uniform-sum CDF.

    Uses the exact CDF while 2d <= ``exact_max_n`` and the normal
    approximation beyond; the integral is split at the density's kink and
    each half solved to tol/2, so the absolute error is at most ``tol``
    (plus the CDF approximation error in the normal regime).
    """
    d = _check_d(d)
    n = 2 * d
    if n <= exact_max_n:
        cdf, method = irwin_hall_cdf, "exact"
    else:
        cdf, method = irwin_hall_cdf_normal, "normal_approx"

    lower = _adaptive_simpson(
        lambda t: t * (1.0 - cdf(n, d + 1.0 - t)), 0.0, 1.0, tol / 2.0
    )
    upper = _adaptive_simpson(
        lambda t: (2.0 - t) * cdf(n, d + 1.0 - t), 1.0, 2.0, tol / 2.0
    )
    return VolumeEstimate(
        component="unexplained",
        method=method,
        d=d,
        fraction=lower + upper,
        standard_error=0.0,
    )


def monte_carlo_flip_fraction(
    component: str,
    d: int,
    n_draws: int,
    seed: int,
    half_width: float = 1.0,
    standardized: bool = True,
    chunk_size: int = 65536,
) -> VolumeEstimate:
    """Flip fraction by direct sampling of the parameter cube.

    Draws ``n_draws`` model pairs (all coordinates uniform on
    (-half_width, half_width); standardized draws pin mu_K = 0, mu_H = 1),
    classifies each with the same sign kernels as the scalar diagnostics,
    and counts boundary draws as non-flips. The stream is keyed by draw
    index, so the result is bit-identical for any ``chunk_size``.
    """
    if component not in ("explained", "unexplained"):
        raise ValueError(f"component must be 'explained' or 'unexplained', got {component!r}")
    d = _check_d(d)
    if n_draws < _MIN_DRAWS:
        raise InvalidDrawCountError(f"n_draws must be at least {_MIN_DRAWS}, got {n_draws}")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")

    flips = 0
    boundaries = 0
    done = 0
    while done < n_draws:
        m = min(chunk_size, n_draws - done)
        block = draw_param_block(d, half_width, standardized, seed, done, m)
        dbeta = block.beta_h - block.beta_k
        if component == "explained":
            dmu = block.mu_h - block.mu_k
            value_h = np.einsum("ij,ij->i", dmu, block.beta_h)
            value_k = np.einsum("ij,ij->i", dmu, block.beta_k)
        else:
            dalpha = block.alpha_h - block.alpha_k
            value_h = np.einsum("ij,ij->i", block.mu_k, dbeta) + dalpha
            value_k = np.einsum("ij,ij->i", block.mu_h, dbeta) + dalpha
        flip, boundary = pair_flip_masks(value_h, value_k)
        flips += int(np.count_nonzero(flip))
        boundaries += int(np.count_nonzero(boundary))
        done += m

    fraction = flips / n_draws
    return VolumeEstimate(
        component=component,
        method="monte_carlo",
        d=d,
        fraction=fraction,
        standard_error=float(np.sqrt(fraction * (1.0 - fraction) / n_draws)),
        standardized=standardized,
        half_width=half_width,
        n_draws=n_draws,
        seed=seed,
        n_boundary=boundaries,
    )
