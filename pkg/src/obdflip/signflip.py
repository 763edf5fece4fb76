"""Reference-dependence diagnostics: when does swapping the reference group
flip a component's sign?

With a = mu_H @ dbeta, b = mu_K @ dbeta and c = alpha_H - alpha_K, the two
unexplained components are U_H = b + c and U_K = a + c, so their signs differ
exactly when -c lies strictly between a and b. The explained components
(mu_H - mu_K) @ beta_H and (mu_H - mu_K) @ beta_K flip exactly when they have
strictly opposite signs. Every characterization here is evaluated in two
algebraically equivalent forms and cross-checked.

Signs are three-valued: anything within ``SIGN_RTOL`` (relative to the larger
of 1 and the compared magnitudes) of zero counts as sign zero, and a
comparison involving a zero sign is reported as a *boundary*, never a flip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .decomposition import decompose_both
from .errors import NonPositiveParameterError
from .models import GroupModel

# |x| <= SIGN_RTOL * max(1, compared magnitudes) classifies as sign zero
SIGN_RTOL = 1e-12


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


def sign_of(x: float, scale: float = 1.0) -> Sign:
    """Tolerance-aware sign of ``x`` in a comparison at magnitude ``scale``."""
    tol = SIGN_RTOL * max(1.0, abs(scale))
    if abs(x) <= tol:
        return Sign.ZERO
    return Sign.POSITIVE if x > 0 else Sign.NEGATIVE


def pair_flip_masks(first, second) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized flip/boundary classification of paired component values.

    Returns boolean arrays ``(flip, boundary)``: boundary marks pairs where
    either value sits within sign tolerance of zero; flip marks pairs with
    strictly opposite signs and no boundary. Boundary pairs are never flips.
    """
    a = np.asarray(first, dtype=float)
    b = np.asarray(second, dtype=float)
    tol = SIGN_RTOL * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    boundary = (np.abs(a) <= tol) | (np.abs(b) <= tol)
    flip = ~boundary & (np.sign(a) != np.sign(b))
    return flip, boundary


@dataclass(frozen=True)
class ComponentVerdict:
    """Flip verdict for one component under the two references."""

    component: str
    flip: bool
    boundary: bool
    value_h: float
    value_k: float


@dataclass(frozen=True)
class FlipQuantities:
    """Every scalar entering the characterizations."""

    explained_h: float      # (mu_H - mu_K) @ beta_H
    explained_k: float      # (mu_H - mu_K) @ beta_K
    mu_h_dbeta: float       # mu_H @ (beta_H - beta_K)
    mu_k_dbeta: float       # mu_K @ (beta_H - beta_K)
    delta_alpha: float      # alpha_H - alpha_K
    unexplained_h: float    # mu_K @ dbeta + dalpha
    unexplained_k: float    # mu_H @ dbeta + dalpha


@dataclass(frozen=True)
class BranchStep:
    """One evaluated predicate in the decision tree, with its outcome."""

    description: str
    outcome: bool


@dataclass(frozen=True)
class FlipReport:
    """Full reference-dependence report for a pair of group models."""

    explained_flip: bool
    explained_boundary: bool
    unexplained_flip: bool
    unexplained_boundary: bool
    alignment_holds: bool
    quantities: FlipQuantities
    branch_trace: tuple[BranchStep, ...]


def _quantities(model_h: GroupModel, model_k: GroupModel) -> FlipQuantities:
    dmu = model_h.mu - model_k.mu
    dbeta = model_h.beta - model_k.beta
    dalpha = model_h.alpha - model_k.alpha
    a = float(model_h.mu @ dbeta)
    b = float(model_k.mu @ dbeta)
    return FlipQuantities(
        explained_h=float(dmu @ model_h.beta),
        explained_k=float(dmu @ model_k.beta),
        mu_h_dbeta=a,
        mu_k_dbeta=b,
        delta_alpha=dalpha,
        unexplained_h=b + dalpha,
        unexplained_k=a + dalpha,
    )


def _pair_verdict(component: str, value_h: float, value_k: float) -> ComponentVerdict:
    flip, boundary = pair_flip_masks([value_h], [value_k])
    return ComponentVerdict(
        component=component,
        flip=bool(flip[0]),
        boundary=bool(boundary[0]),
        value_h=value_h,
        value_k=value_k,
    )


def explained_flip(model_h: GroupModel, model_k: GroupModel) -> ComponentVerdict:
    """Does the explained component change sign across references?

    Evaluated both as a direct sign comparison and as the interval form
    (values differ and straddle zero); the two must agree away from
    boundaries.
    """
    q = _quantities(model_h, model_k)
    verdict = _pair_verdict("explained", q.explained_h, q.explained_k)
    if not verdict.boundary:
        interval = q.explained_h != q.explained_k and (
            min(q.explained_h, q.explained_k) < 0.0 < max(q.explained_h, q.explained_k)
        )
        if interval != verdict.flip:  # pragma: no cover - algebraically impossible
            raise RuntimeError("explained-flip evaluations disagree")
    return verdict


def unexplained_flip(model_h: GroupModel, model_k: GroupModel) -> ComponentVerdict:
    """Does the unexplained component change sign across references?

    Evaluated as a direct sign comparison of U_H and U_K and, away from
    boundaries, cross-checked against the interval form: mu_H @ dbeta and
    mu_K @ dbeta differ and -dalpha lies strictly between them.
    """
    q = _quantities(model_h, model_k)
    verdict = _pair_verdict("unexplained", q.unexplained_h, q.unexplained_k)
    if not verdict.boundary:
        interval = q.mu_h_dbeta != q.mu_k_dbeta and (
            min(q.mu_h_dbeta, q.mu_k_dbeta)
            < -q.delta_alpha
            < max(q.mu_h_dbeta, q.mu_k_dbeta)
        )
        if interval != verdict.flip:  # pragma: no cover - algebraically impossible
            raise RuntimeError("unexplained-flip evaluations disagree")
    return verdict


def alignment_holds(model_h: GroupModel, model_k: GroupModel) -> bool:
    """True when dalpha, mu_H @ dbeta and mu_K @ dbeta share one strict sign.

    Under that alignment both unexplained components are sums of same-signed
    terms, so no reference choice can flip the unexplained sign.
    """
    q = _quantities(model_h, model_k)
    scale = max(abs(q.delta_alpha), abs(q.mu_h_dbeta), abs(q.mu_k_dbeta))
    signs = {
        sign_of(q.delta_alpha, scale),
        sign_of(q.mu_h_dbeta, scale),
        sign_of(q.mu_k_dbeta, scale),
    }
    return signs in ({Sign.POSITIVE}, {Sign.NEGATIVE})


def _fmt(x: float) -> str:
    return format(x, ".6g")


def decision_tree_unexplained(model_h: GroupModel, model_k: GroupModel) -> FlipReport:
    """Branch-by-branch unexplained-flip test with a readable trace.

    The trace records every predicate evaluated, in order. Comparisons that
    hinge on a sign within tolerance of zero short-circuit to a boundary
    verdict (reported, never counted as a flip); if a branch quantity's sign
    degenerates the tree falls back to the interval characterization, which
    needs no sign bookkeeping. The verdict always matches
    :func:`unexplained_flip`.
    """
    q = _quantities(model_h, model_k)
    a, b, c = q.mu_h_dbeta, q.mu_k_dbeta, q.delta_alpha
    trace: list[BranchStep] = []

    direct = _pair_verdict("unexplained", q.unexplained_h, q.unexplained_k)
    if direct.boundary:
        trace.append(
            BranchStep(
                "an unexplained component is within sign tolerance of zero "
                f"(U_H = {_fmt(q.unexplained_h)}, U_K = {_fmt(q.unexplained_k)})",
                True,
            )
        )
        flip = False
    else:
        trace.append(
            BranchStep(
                f"mu_H'db != mu_K'db ({_fmt(a)} vs {_fmt(b)})",
                a != b,
            )
        )
        scale = max(abs(a), abs(b), abs(c))
        sa, sb, sc = sign_of(a, scale), sign_of(b, scale), sign_of(c, scale)
        if a == b:
            flip = False
        elif Sign.ZERO in (sa, sb, sc):
            flip = min(a, b) < -c < max(a, b)
            trace.append(
                BranchStep(
                    "a compared sign is within tolerance of zero; interval test "
                    f"min(mu_H'db, mu_K'db) < -dalpha < max: "
                    f"{_fmt(min(a, b))} < {_fmt(-c)} < {_fmt(max(a, b))}",
                    flip,
                )
            )
        elif sa == sb:
            trace.append(
                BranchStep(
                    f"sign(mu_H'db) == sign(mu_K'db) ({_fmt(a)}, {_fmt(b)})",
                    True,
                )
            )
            opposite = sc != sa
            trace.append(
                BranchStep(
                    f"sign(dalpha) != their sign (dalpha = {_fmt(c)})",
                    opposite,
                )
            )
            between = min(abs(a), abs(b)) < abs(c) < max(abs(a), abs(b))
            if opposite:
                trace.append(
                    BranchStep(
                        "|dalpha| strictly between |mu_H'db| and |mu_K'db|: "
                        f"{_fmt(min(abs(a), abs(b)))} < {_fmt(abs(c))} < "
                        f"{_fmt(max(abs(a), abs(b)))}",
                        between,
                    )
                )
            flip = opposite and between
        else:
            trace.append(
                BranchStep(
                    f"sign(mu_H'db) != sign(mu_K'db) ({_fmt(a)} vs {_fmt(b)})",
                    True,
                )
            )
            first = sc == sa and abs(b) > abs(c)
            trace.append(
                BranchStep(
                    "sign(dalpha) == sign(mu_H'db) and |mu_K'db| > |dalpha| "
                    f"({_fmt(abs(b))} > {_fmt(abs(c))})",
                    first,
                )
            )
            second = sc != sa and abs(a) > abs(c)
            trace.append(
                BranchStep(
                    "sign(dalpha) != sign(mu_H'db) and |mu_H'db| > |dalpha| "
                    f"({_fmt(abs(a))} > {_fmt(abs(c))})",
                    second,
                )
            )
            flip = first or second

    if flip != direct.flip:  # pragma: no cover - algebraically impossible
        raise RuntimeError("decision tree disagrees with the direct sign test")

    explained = explained_flip(model_h, model_k)
    return FlipReport(
        explained_flip=explained.flip,
        explained_boundary=explained.boundary,
        unexplained_flip=direct.flip,
        unexplained_boundary=direct.boundary,
        alignment_holds=alignment_holds(model_h, model_k),
        quantities=q,
        branch_trace=tuple(trace),
    )


def _ulp_ladder(center: float, width: int = 3) -> list[float]:
    """center first, then +-1, +-2, ... ulp neighbors."""
    out = [center]
    lo = hi = center
    for _ in range(width):
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
        out.extend((lo, hi))
    return out


def unbounded_gap_instance(
    separation: float, slope_gap: float
) -> tuple[GroupModel, GroupModel]:
    """One-covariate pair whose components diverge while the gap stays 1.

    Means sit at +-separation/2 and slopes at 1/separation +- slope_gap/2, so
    the explained components are 1 +- separation * slope_gap / 2, the
    unexplained components are -+ separation * slope_gap / 2, and the total
    gap is exactly 1: the reference disagreement grows without bound as
    separation * slope_gap does, an unexplained flip at every size.

    Ideal slopes are rarely representable, so among the floats within 3 ulp
    of them this picks the pair whose decomposition lands closest to (and
    when possible exactly on) the float-rounded target components.
    """
    if not separation > 0:
        raise NonPositiveParameterError(f"separation must be positive, got {separation}")
    if not slope_gap > 0:
        raise NonPositiveParameterError(f"slope gap must be positive, got {slope_gap}")
    g = separation * slope_gap
    targets = (1.0 + g / 2.0, 1.0 - g / 2.0, -g / 2.0, g / 2.0, 1.0)
    mean_h = separation / 2.0
    mean_k = -separation / 2.0

    def build(bh: float, bk: float) -> tuple[GroupModel, GroupModel]:
        return (
            GroupModel(label="H", alpha=0.0, beta=[bh], mu=[mean_h]),
            GroupModel(label="K", alpha=0.0, beta=[bk], mu=[mean_k]),
        )

    center_h = 1.0 / separation + slope_gap / 2.0
    center_k = 1.0 / separation - slope_gap / 2.0
    best = None
    best_key = None
    for bh in _ulp_ladder(center_h):
        for bk in _ulp_ladder(center_k):
            pair = build(bh, bk)
            dual = decompose_both(*pair)
            got = (
                dual.by_h.explained,
                dual.by_k.explained,
                dual.by_h.unexplained,
                dual.by_k.unexplained,
                dual.total_gap,
            )
            misses = sum(x != t for x, t in zip(got, targets))
            key = (misses, abs(bh - center_h) + abs(bk - center_k))
            if best_key is None or key < best_key:
                best_key, best = key, pair
    return best
