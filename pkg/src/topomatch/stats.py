"""Normal-distribution primitives and the coverage / exclusion guarantees."""
from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass

_SQRT2 = math.sqrt(2.0)

# Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(z: float) -> float:
    """Standard normal CDF via ``erfc`` (accurate in both tails)."""
    return 0.5 * math.erfc(-z / _SQRT2)


def normal_sf(z: float) -> float:
    """Upper tail ``1 - normal_cdf(z)`` without cancellation."""
    return 0.5 * math.erfc(z / _SQRT2)


def normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _acklam(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        return (((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / (
            (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0)
    if q > 1.0 - _P_LOW:
        r = math.sqrt(-2.0 * math.log1p(-q))
        return -(((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / (
            (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0)
    s = q - 0.5
    r = s * s
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def normal_quantile(q: float) -> float:
    """Inverse of :func:`normal_cdf` for ``0 < q < 1``.

    Rational initial guess followed by one Newton step; the residual is taken
    in whichever tail is smaller so that the step does not lose precision.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q!r}")
    if q == 0.5:
        return 0.0
    x = _acklam(q)
    if q > 0.5:
        err = (1.0 - q) - normal_sf(x)
    else:
        err = normal_cdf(x) - q
    return x - err / normal_pdf(x)


def two_sided_critical(alpha: float) -> float:
    """``Phi^-1(1 - alpha / 2)``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    return normal_quantile(1.0 - alpha / 2.0)


def coverage_probability(alpha: float) -> float:
    """Probability that the feasible set retains the true match."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    return 1.0 - alpha


def exclusion_lower_bound(mu: float, c: int, alpha: float) -> float:
    """Lower bound on rejecting a wrong candidate of size ``c``.

    ``mu`` is the separation between unmatched edge weights in units of the
    noise standard deviation.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if c < 1:
        raise ValueError("c must be >= 1")
    z = two_sided_critical(alpha)
    shift = mu * math.sqrt(c)
    scale = math.sqrt(2.0 * c)
    return normal_cdf((-z - shift) / scale) + normal_sf((z - shift) / scale)


def estimate_sigma(residuals) -> float:
    """Sample standard deviation (``n - 1`` denominator) of edge residuals."""
    residuals = [float(r) for r in residuals]
    if len(residuals) < 2:
        raise ValueError("need at least two residuals to estimate sigma")
    return statistics.stdev(residuals)


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    independent: bool = True

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")


@dataclass(frozen=True)
class GuaranteeReport:
    coverage: float
    exclusion_lower_bound: float
    mu: float
    c: int
    alpha: float

    def to_dict(self) -> dict:
        return asdict(self)


def guarantee_report(mu: float, c: int, alpha: float) -> GuaranteeReport:
    return GuaranteeReport(
        coverage=coverage_probability(alpha),
        exclusion_lower_bound=exclusion_lower_bound(mu, c, alpha),
        mu=mu,
        c=c,
        alpha=alpha,
    )
