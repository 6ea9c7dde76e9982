"""Closed-form outage approximations and bounds, ergodic rates, antenna sizing.

Every evaluator reduces the accumulated per-round mutual information to a
Gaussian surrogate (or an exact CDF bound) and returns an OutageEstimate
carrying a method tag.  Monte Carlo lives in `simulate`; the two never share
code paths, so each validates the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from . import hardware, specfun
from .channel import (
    FsoExponential,
    FsoGammaGamma,
    GaussianApprox,
    RicianFading,
    clt_sum_gain_params,
    fso_pdf,
    rician_sum_pdf,
)
from .hardware import PaConfig, output_power

__all__ = [
    "RfHopParams",
    "FsoHopParams",
    "OutageEstimate",
    "ApproximationInvalidError",
    "InfeasibleError",
    "RF_LOW_SNR",
    "RF_PIECEWISE",
    "RF_LINEARIZED",
    "RF_SINGLE_SHOT",
    "RF_JENSEN_LOWER",
    "RF_JENSEN_UPPER",
    "FSO_CLT",
    "FSO_PRODUCT_BOUND",
    "MONTE_CARLO",
    "gaussian_outage",
    "rf_moments_low_snr",
    "rf_outage_low_snr",
    "log_moments_piecewise",
    "rf_outage_piecewise",
    "log_moments_linearized",
    "rf_outage_linearized",
    "fso_moments",
    "fso_outage_clt",
    "fso_outage_product_bound",
    "rf_outage_bounds_short",
    "rf_outage_single_shot",
    "rf_ergodic_rate",
    "fso_ergodic_rate",
    "min_rf_antennas",
    "hop_outage",
    "hop_ergodic_rate",
]

# method tags carried by OutageEstimate
RF_LOW_SNR = "rf_low_snr_clt"
RF_PIECEWISE = "rf_piecewise_clt"
RF_LINEARIZED = "rf_linearized_clt"
RF_SINGLE_SHOT = "rf_single_shot"
RF_JENSEN_LOWER = "rf_jensen_lower"
RF_JENSEN_UPPER = "rf_jensen_upper"
FSO_CLT = "fso_clt"
FSO_PRODUCT_BOUND = "fso_product_bound"
MONTE_CARLO = "monte_carlo"

_EULER_GAMMA = 0.5772156649015328606


class ApproximationInvalidError(ArithmeticError):
    """A surrogate produced a non-positive variance; the approximation does
    not apply to this configuration."""


class InfeasibleError(RuntimeError):
    """No feasible antenna count within the search cap."""


@dataclass(frozen=True)
class RfHopParams:
    fading: RicianFading
    pa: PaConfig
    M: int = 1    # maximum HARQ rounds
    C: int = 1    # channel realizations per round
    R: float = 1.0  # initial code rate (nats per channel use)

    def __post_init__(self):
        if self.M < 1 or self.M != int(self.M):
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if self.C < 1 or self.C != int(self.C):
            raise ValueError(f"C must be a positive integer, got {self.C}")
        if self.R <= 0:
            raise ValueError(f"R must be > 0, got {self.R}")

    @property
    def drive_power(self) -> float:
        """Radiated power per antenna (linear, noise-normalized)."""
        return output_power(self.pa)


@dataclass(frozen=True)
class FsoHopParams:
    model: object  # FsoExponential | FsoGammaGamma
    p_tx: float    # transmit power / SNR (linear, noise-normalized, > 0)
    M: int = 1
    C_tilde: int = 1  # channel realizations per round
    R: float = 1.0    # initial code rate (nats per channel use)

    def __post_init__(self):
        if not isinstance(self.model, (FsoExponential, FsoGammaGamma)):
            raise TypeError(f"unsupported FSO model {type(self.model).__name__}")
        if self.p_tx <= 0:
            raise ValueError(f"p_tx must be > 0, got {self.p_tx}")
        if self.M < 1 or self.M != int(self.M):
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if self.C_tilde < 1 or self.C_tilde != int(self.C_tilde):
            raise ValueError(f"C_tilde must be a positive integer, got {self.C_tilde}")
        if self.R <= 0:
            raise ValueError(f"R must be > 0, got {self.R}")


@dataclass(frozen=True)
class OutageEstimate:
    value: float
    method: str
    ci_halfwidth: float = 0.0  # 95% half-width; 0 for closed forms

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"outage must be in [0,1], got {self.value}")
        if self.ci_halfwidth < 0:
            raise ValueError(f"ci_halfwidth must be >= 0, got {self.ci_halfwidth}")


# ---------------------------------------------------------------------------
# Gaussian-surrogate outage
# ---------------------------------------------------------------------------

def gaussian_outage(g: GaussianApprox, M: int, CC: int, R: float) -> float:
    """Outage of a hop whose per-realization rate has surrogate g, with M
    rounds of CC realizations and initial rate R (threshold R/M)."""
    if g.variance <= 0:
        raise ApproximationInvalidError(f"surrogate variance {g.variance} <= 0")
    arg = math.sqrt(M * CC) * (R / M - g.mean) / math.sqrt(2.0 * g.variance)
    return 0.5 * (1.0 + specfun.erf(arg))


# ---------------------------------------------------------------------------
# low-SNR surrogate (sum-gain moments)
# ---------------------------------------------------------------------------

def rf_moments_low_snr(f: RicianFading) -> GaussianApprox:
    """Moments of the sum gain itself: mean from the confluent-hypergeometric
    closed form, variance from quadrature of the sum-gain density (the
    closed-form second moment is replaced by quadrature deliberately; see
    tests for the cross-check)."""
    K, Om, N = f.K, f.Omega, f.N
    kn = K * N
    if kn < 600.0:
        hyp = specfun.gen_hypergeometric([N + 1.0], [float(N)], kn)
        mean = Om * math.exp(-kn) * N / (K + 1.0) * hyp
    else:
        # same closed form with the exponential factored analytically:
        # 1F1(N+1; N; z) = e^z (1 + z/N)
        mean = Om * N / (K + 1.0) * (1.0 + kn / N)
    approx = clt_sum_gain_params(f)
    sd = math.sqrt(approx.variance)
    ub = approx.mean + 40.0 * sd
    second, _ = quad(lambda x: x * x * rician_sum_pdf(x, f), 0.0, ub, limit=400)
    return GaussianApprox(mean=mean, variance=second - mean * mean)


def rf_outage_low_snr(h: RfHopParams) -> OutageEstimate:
    """Outage from linearizing log(1+Px) ~ Px, i.e. comparing the mean sum
    gain against R/(M P').  Tight only when P'*G stays well below 1."""
    p = h.drive_power
    g = rf_moments_low_snr(h.fading)
    value = gaussian_outage(g, h.M, h.C, h.R / p)
    return OutageEstimate(value, RF_LOW_SNR)


# ---------------------------------------------------------------------------
# piecewise-linear log surrogate
# ---------------------------------------------------------------------------

def _kernel_q(a1, a2, a3, a4, x):
    """Antiderivative at x of (a1 t + a2) * Normal(t; a3, a4):
    -(a1 a3 + a2)/2 erf((a3-x)/sqrt(2 a4)) - a1 sqrt(a4/(2 pi)) exp(-(a3-x)^2/(2 a4))."""
    if x == math.inf:
        return 0.5 * (a1 * a3 + a2)
    c = a1 * a3 + a2
    return -0.5 * c * specfun.erf((a3 - x) / math.sqrt(2.0 * a4)) - a1 * math.sqrt(
        a4 / (2.0 * math.pi)
    ) * math.exp(-((a3 - x) ** 2) / (2.0 * a4))


def _kernel_t(a1, a2, a3, a4, x):
    """Antiderivative at x of (a1 t + a2)^2 * Normal(t; a3, a4)."""
    c = a1 * a3 + a2
    m = a1 * math.sqrt(a4)
    if x == math.inf:
        return c * c + m * m
    u = (x - a3) / math.sqrt(a4)
    big_phi = 0.5 * (1.0 + specfun.erf(u / math.sqrt(2.0)))
    small_phi = math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return (c * c + m * m) * big_phi - (2.0 * c * m + m * m * u) * small_phi


def log_moments_piecewise(p: float, g: GaussianApprox, theta: float = 1.0):
    """Mean and variance of log(1+p*G) under the Gaussian sum-gain surrogate
    g, with the log replaced by a two-piece linear map (exact slope p below
    the breakpoint, tangent-matched slope beyond)."""
    if theta <= 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    nz, nv = g.mean, g.variance
    s = theta / (p * (1.0 - math.exp(-theta))) - 1.0 / p
    r = p * math.exp(-theta)
    d = (math.exp(theta) - 1.0) / p
    c2 = theta - r * d
    mu = (
        _kernel_q(p, 0.0, nz, nv, s)
        - _kernel_q(p, 0.0, nz, nv, 0.0)
        + _kernel_q(r, c2, nz, nv, math.inf)
        - _kernel_q(r, c2, nz, nv, s)
    )
    second = (
        _kernel_t(p, 0.0, nz, nv, s)
        - _kernel_t(p, 0.0, nz, nv, 0.0)
        + _kernel_t(r, c2, nz, nv, math.inf)
        - _kernel_t(r, c2, nz, nv, s)
    )
    var = second - mu * mu
    if var <= 0:
        raise ApproximationInvalidError(
            f"piecewise log surrogate produced variance {var} <= 0"
        )
    return GaussianApprox(mean=mu, variance=var)


def rf_outage_piecewise(h: RfHopParams, theta: float = 1.0) -> OutageEstimate:
    """Outage with the per-realization rate approximated by the piecewise-
    linear log surrogate integrated against the Gaussian sum-gain surrogate."""
    p = h.drive_power
    g = clt_sum_gain_params(h.fading)
    lm = log_moments_piecewise(p, g, theta)
    value = gaussian_outage(lm, h.M, h.C, h.R)
    return OutageEstimate(value, RF_PIECEWISE)


# ---------------------------------------------------------------------------
# linearized-CDF surrogate
# ---------------------------------------------------------------------------

def log_moments_linearized(p: float, g: GaussianApprox):
    """Mean and variance of log(1+p*G) with the Gaussian survival function of
    G replaced by a linear ramp across [mean - w/2, mean + w/2],
    w = sqrt(2 pi var): E[log] = p * integral of ramp/(1 + p x)."""
    nz, nv = g.mean, g.variance
    w = math.sqrt(2.0 * math.pi * nv)
    x1 = nz - 0.5 * w
    x2 = nz + 0.5 * w
    a2 = -1.0 / w
    a3 = 0.5 + nz / w
    lo = max(x1, 0.0)

    def ramp_int(x):  # antiderivative of p*(a2 t + a3)/(1 + p t)
        return a2 * x + (a3 - a2 / p) * math.log1p(p * x)

    mu = math.log1p(p * lo) + ramp_int(x2) - ramp_int(lo)

    def b_kernel(x):  # antiderivative of 2 p (a2 t + a3) log(1 + p t)/(1 + p t)
        lg = math.log1p(p * x)
        return (p * a3 - a2) / p * lg * lg - 2.0 * a2 * x + (
            2.0 * p * a2 * x + 2.0 * a2
        ) / p * lg

    second = math.log1p(p * lo) ** 2 + b_kernel(x2) - b_kernel(lo)
    var = second - mu * mu
    if var <= 0:
        raise ApproximationInvalidError(
            f"linearized log surrogate produced variance {var} <= 0"
        )
    return GaussianApprox(mean=mu, variance=var)


def rf_outage_linearized(h: RfHopParams) -> OutageEstimate:
    p = h.drive_power
    g = clt_sum_gain_params(h.fading)
    lm = log_moments_linearized(p, g)
    value = gaussian_outage(lm, h.M, h.C, h.R)
    return OutageEstimate(value, RF_LINEARIZED)


# ---------------------------------------------------------------------------
# FSO surrogate moments
# ---------------------------------------------------------------------------

def _psi_alternating(z, ctl=specfun.DEFAULT_SERIES):
    """psi(z) = sum_{k>=1} (-1)^(k-1) z^k / (k^2 k!)  (= z * 3F3 series);
    asymptotic form 0.5 ln^2 z + euler_gamma ln z + (euler_gamma^2/2 + pi^2/12)
    beyond the cancellation-safe range."""
    if z <= 30.0:
        return z * specfun.gen_hypergeometric([1.0, 1.0, 1.0], [2.0, 2.0, 2.0], -z, ctl)
    lz = math.log(z)
    return 0.5 * lz * lz + _EULER_GAMMA * lz + (
        _EULER_GAMMA * _EULER_GAMMA / 2.0 + math.pi * math.pi / 12.0
    )


def _h_antiderivative(x, kappa):
    """H(x): antiderivative (up to constant) of 2 e^kappa e^{-kappa t} log(t)/t
    ... assembled from the alternating series, the log terms and Gamma(0, .)."""
    z = kappa * x
    lx = math.log(x)
    g0 = specfun.upper_incomplete_gamma(0.0, z)
    inner = _psi_alternating(z) + 0.5 * lx * (
        -2.0 * (math.log(z) + _EULER_GAMMA) - 2.0 * g0 + lx
    )
    return 2.0 * math.exp(kappa) * inner


def _fso_exp_second_moment(lam, p):
    """E[log^2(1 + p G)] for exponential G with rate lam."""
    kappa = lam / p
    if kappa <= 10.0:
        # difference of the antiderivative between 1 and its large-x limit;
        # the limit is taken numerically at two points with a consistency gate
        h_a = _h_antiderivative(40.0 / kappa, kappa)
        h_b = _h_antiderivative(80.0 / kappa, kappa)
        if abs(h_a - h_b) > 1e-8 * max(1.0, abs(h_a), abs(h_b)):
            raise specfun.ConvergenceError(
                f"large-x limit of the log^2 antiderivative did not settle "
                f"(kappa={kappa}: {h_a} vs {h_b})"
            )
        return h_b - _h_antiderivative(1.0, kappa)
    # large kappa: the antiderivative difference cancels catastrophically;
    # integrate the survival-function form directly
    val, _ = quad(
        lambda t: 2.0 * p * math.exp(-lam * t) * math.log1p(p * t) / (1.0 + p * t),
        0.0,
        math.inf,
        limit=400,
    )
    return val


def _gg_panel_quad(w, model: FsoGammaGamma):
    """Integral of w(x)*pdf(x) over the Gamma-Gamma support: log-spaced panels
    to the effective upper edge, then an explicit tail integral."""
    a, b = model.a, model.b
    x_hi = 3600.0 / (4.0 * a * b) * 4.0  # Bessel argument ~120: tail mass < 1e-45

    def f(x):
        return w(x) * fso_pdf(x, model)

    edges = [0.0, 1e-8]
    while edges[-1] < x_hi:
        edges.append(edges[-1] * 10.0 if edges[-1] < 1.0 else edges[-1] * 2.0)
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        part, _ = quad(f, left, min(right, x_hi), limit=200)
        total += part
    tail, _ = quad(f, x_hi, math.inf, limit=100)
    return total + tail


def fso_moments(h: FsoHopParams) -> GaussianApprox:
    """Surrogate moments of log(1 + p_tx * G) for one FSO realization:
    closed forms for the exponential model, adaptive quadrature for
    Gamma-Gamma."""
    p = h.p_tx
    if isinstance(h.model, FsoExponential):
        lam = h.model.lam
        kappa = lam / p
        mu = -math.exp(kappa) * specfun.expint_ei(-kappa) if kappa < 500.0 else (
            specfun.expint_e1_scaled(kappa)
        )
        second = _fso_exp_second_moment(lam, p)
        var = second - mu * mu
        if var <= 0:
            raise ApproximationInvalidError(f"exponential surrogate variance {var} <= 0")
        return GaussianApprox(mean=mu, variance=var)
    mu = _gg_panel_quad(lambda x: math.log1p(p * x), h.model)
    second = _gg_panel_quad(lambda x: math.log1p(p * x) ** 2, h.model)
    var = second - mu * mu
    if var <= 0:
        raise ApproximationInvalidError(f"Gamma-Gamma surrogate variance {var} <= 0")
    return GaussianApprox(mean=mu, variance=var)


def fso_outage_clt(h: FsoHopParams) -> OutageEstimate:
    value = gaussian_outage(fso_moments(h), h.M, h.C_tilde, h.R)
    return OutageEstimate(value, FSO_CLT)


def fso_outage_product_bound(h: FsoHopParams) -> OutageEstimate:
    """Upper bound on FSO outage for short codewords: the accumulated rate is
    lower-bounded through the product of gains (arithmetic-geometric step),
    turning outage into a product-of-variates CDF evaluation."""
    if not isinstance(h.model, FsoGammaGamma):
        raise TypeError("product bound requires the Gamma-Gamma model")
    n = h.M * h.C_tilde
    thr = ((math.exp(h.R / h.M) - 1.0) / h.p_tx) ** n
    value = specfun.gg_product_cdf(h.model.a, h.model.b, n, thr)
    return OutageEstimate(value, FSO_PRODUCT_BOUND)


# ---------------------------------------------------------------------------
# RF short-codeword bounds and single-shot approximation
# ---------------------------------------------------------------------------

def _sum_gain_cdf(y: float, f: RicianFading) -> float:
    """CDF of the sum gain by quadrature of its density."""
    if y <= 0:
        return 0.0
    approx = clt_sum_gain_params(f)
    sd = math.sqrt(approx.variance)
    if y > approx.mean + 40.0 * sd:
        return 1.0
    val, _ = quad(lambda x: rician_sum_pdf(x, f), 0.0, y, limit=400)
    return min(1.0, max(0.0, val))


def rf_outage_bounds_short(h: RfHopParams):
    """(lower, upper) outage bounds from convexity of the rate in the gains:
    both evaluate the exact CDF of the pooled M*C*N-antenna sum gain."""
    p = h.drive_power
    pooled = RicianFading(h.fading.K, h.fading.Omega, h.M * h.C * h.fading.N)
    lo_arg = h.M * h.C * (math.exp(h.R / h.M) - 1.0) / p
    hi_arg = (math.exp(h.R * h.C) - 1.0) / p
    lower = _sum_gain_cdf(lo_arg, pooled)
    upper = _sum_gain_cdf(hi_arg, pooled)
    return (
        OutageEstimate(lower, RF_JENSEN_LOWER),
        OutageEstimate(upper, RF_JENSEN_UPPER),
    )


def rf_outage_single_shot(h: RfHopParams) -> OutageEstimate:
    """Open-loop (M=C=1) outage from applying the Gaussian sum-gain surrogate
    directly to the decode threshold (e^R - 1)/P'."""
    if h.M != 1 or h.C != 1:
        raise ValueError(
            f"single-shot evaluator requires M=C=1, got M={h.M}, C={h.C}"
        )
    p = h.drive_power
    g = clt_sum_gain_params(h.fading)
    thr = (math.exp(h.R) - 1.0) / p
    arg = (thr - g.mean) / math.sqrt(2.0 * g.variance)
    return OutageEstimate(0.5 * (1.0 + specfun.erf(arg)), RF_SINGLE_SHOT)


# ---------------------------------------------------------------------------
# ergodic rates and antenna sizing
# ---------------------------------------------------------------------------

def rf_ergodic_rate(f: RicianFading, pa: PaConfig) -> float:
    """Ergodic rate E[log(1+P'G)] from the linearized-CDF closed form."""
    p = output_power(pa)
    return log_moments_linearized(p, clt_sum_gain_params(f)).mean


def fso_ergodic_rate(h: FsoHopParams) -> float:
    return fso_moments(h).mean


def min_rf_antennas(K: float, Omega: float, pa: PaConfig, target_rate: float,
                    n_cap: int = 1_000_000) -> int:
    """Smallest antenna count N whose ergodic rate meets target_rate.

    Exploits monotonicity of the ergodic rate in N (exponential bracketing,
    then integer bisection).  Rate comparisons use a 1e-9 absolute slack.
    """
    if target_rate <= 0:
        return 1

    def rate(n):
        return rf_ergodic_rate(RicianFading(K, Omega, n), pa)

    tol = 1e-9
    if rate(1) >= target_rate - tol:
        return 1
    lo, hi = 1, 2
    while rate(hi) < target_rate - tol:
        lo = hi
        hi *= 2
        if hi > n_cap:
            raise InfeasibleError(
                f"no antenna count up to {n_cap} reaches rate {target_rate}"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rate(mid) >= target_rate - tol:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# per-hop dispatch used by network / CLI
# ---------------------------------------------------------------------------

_RF_EVALUATORS = {
    RF_LOW_SNR: rf_outage_low_snr,
    RF_PIECEWISE: rf_outage_piecewise,
    RF_LINEARIZED: rf_outage_linearized,
    RF_SINGLE_SHOT: rf_outage_single_shot,
    RF_JENSEN_LOWER: lambda h: rf_outage_bounds_short(h)[0],
    RF_JENSEN_UPPER: lambda h: rf_outage_bounds_short(h)[1],
}
_FSO_EVALUATORS = {
    FSO_CLT: fso_outage_clt,
    FSO_PRODUCT_BOUND: fso_outage_product_bound,
}


def hop_outage(hop, rf_method: str = RF_LINEARIZED, fso_method: str = FSO_CLT,
               theta: float = 1.0) -> OutageEstimate:
    """Evaluate one hop with the chosen analytic method tags."""
    if isinstance(hop, RfHopParams):
        if rf_method not in _RF_EVALUATORS:
            raise ValueError(f"unknown RF method {rf_method!r}")
        if rf_method == RF_PIECEWISE:
            return rf_outage_piecewise(hop, theta)
        return _RF_EVALUATORS[rf_method](hop)
    if isinstance(hop, FsoHopParams):
        if fso_method not in _FSO_EVALUATORS:
            raise ValueError(f"unknown FSO method {fso_method!r}")
        return _FSO_EVALUATORS[fso_method](hop)
    raise TypeError(f"unsupported hop type {type(hop).__name__}")


def hop_ergodic_rate(hop) -> float:
    if isinstance(hop, RfHopParams):
        return rf_ergodic_rate(hop.fading, hop.pa)
    if isinstance(hop, FsoHopParams):
        return fso_ergodic_rate(hop)
    raise TypeError(f"unsupported hop type {type(hop).__name__}")
