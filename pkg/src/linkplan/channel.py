"""Channel-gain models and samplers.

RF hops: Rician MISO with N transmit antennas, sum gain G = sum_j |h_j|^2.
FSO hops: exponential or Gamma-Gamma scintillation with unit-mean gain.

Densities are exact formulas (log-scaled Bessel evaluation under the hood);
samplers draw from the matching constructions.  A Gaussian surrogate for the
sum gain (moment-matched via Laguerre moments of the single-antenna gain)
feeds the analytical outage evaluators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun

__all__ = [
    "RicianFading",
    "FsoExponential",
    "FsoGammaGamma",
    "RngStream",
    "GaussianApprox",
    "rician_gain_pdf",
    "rician_sum_pdf",
    "sample_rician_sum",
    "fso_pdf",
    "sample_fso",
    "clt_sum_gain_params",
]


@dataclass(frozen=True)
class RicianFading:
    K: float      # line-of-sight to scattered power ratio (dimensionless, >= 0)
    Omega: float  # mean per-antenna channel gain (dimensionless power, > 0)
    N: int = 1    # number of transmit antennas

    def __post_init__(self):
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.Omega <= 0:
            raise ValueError(f"Omega must be > 0, got {self.Omega}")
        if self.N < 1 or self.N != int(self.N):
            raise ValueError(f"N must be a positive integer, got {self.N}")


@dataclass(frozen=True)
class FsoExponential:
    lam: float  # rate parameter of the gain distribution (> 0), mean gain 1/lam

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class FsoGammaGamma:
    a: float  # large-scale shaping parameter (> 0)
    b: float  # small-scale shaping parameter (> 0)

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"shaping parameters must be > 0, got a={self.a}, b={self.b}")


@dataclass
class RngStream:
    """Reproducible random stream: identical (seed, stream_id) pairs replay
    the identical draw sequence."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def generator(self) -> np.random.Generator:
        return self._gen


@dataclass(frozen=True)
class GaussianApprox:
    """Moment-matched Gaussian surrogate (mean, variance)."""

    mean: float      # nats per channel use (or gain units, context-dependent)
    variance: float  # squared units of mean

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def rician_gain_pdf(x, f: RicianFading):
    """Density of the single-antenna gain g = |h|^2 under Rician fading."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    K, Om = f.K, f.Omega
    if x == 0.0:
        return (K + 1.0) * math.exp(-K) / Om
    arg = 2.0 * math.sqrt(K * (K + 1.0) * x / Om)
    log_f = (
        math.log((K + 1.0) / Om)
        - K
        - (K + 1.0) * x / Om
        + specfun.bessel_i_log(0.0, arg)
    )
    return math.exp(log_f) if log_f > -700.0 else 0.0


def _rician_sum_logpdf_hyp(x, f: RicianFading):
    """log of the sum-gain density in its confluent (0F1) form; stable for
    every K >= 0 including K = 0."""
    K, Om, N = f.K, f.Omega, f.N
    w = K * (K + 1.0) * N * x / Om
    hyp = _scaled_log_0f1(N, w)
    return (
        N * math.log(K + 1.0)
        - K * N
        - N * math.log(Om)
        - math.lgamma(N)
        + (N - 1.0) * math.log(x)
        - (K + 1.0) * x / Om
        + hyp
    )


def _scaled_log_0f1(b, z):
    """log 0F1(b; z) for z >= 0 with renormalization (all terms positive)."""
    if z == 0.0:
        return 0.0
    term = 1.0
    total = 1.0
    scale = 0.0
    for j in range(100_000):
        term *= z / ((j + 1.0) * (b + j))
        total += term
        if total > 1e250:
            total *= 1e-250
            term *= 1e-250
            scale += 250.0 * math.log(10.0)
        if term < 1e-16 * total:
            return scale + math.log(total)
    raise specfun.ConvergenceError(f"0F1 series did not converge (b={b}, z={z})")


def rician_sum_pdf(x, f: RicianFading):
    """Density of the N-antenna sum gain G = sum_j |h_j|^2.

    Evaluated through the confluent-series form, which is the Bessel form
    rewritten without the K^{-(N-1)/2} prefactor (so K -> 0 degrades smoothly
    to the Erlang density).
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        if f.N == 1:
            return rician_gain_pdf(0.0, f)
        return 0.0
    log_f = _rician_sum_logpdf_hyp(x, f)
    return math.exp(log_f) if log_f > -700.0 else 0.0


def rician_sum_pdf_bessel(x, f: RicianFading):
    """Sum-gain density through the explicit Bessel-I form (K > 0 only);
    kept as the cross-check route for rician_sum_pdf."""
    if x <= 0 or f.K <= 0:
        raise ValueError("Bessel form requires x > 0 and K > 0")
    K, Om, N = f.K, f.Omega, f.N
    arg = 2.0 * math.sqrt(K * (K + 1.0) * N * x / Om)
    log_f = (
        math.log((K + 1.0) / Om)
        - K * N
        + 0.5 * (N - 1.0) * math.log((K + 1.0) * x / (K * N * Om))
        - (K + 1.0) * x / Om
        + specfun.bessel_i_log(N - 1.0, arg)
    )
    return math.exp(log_f) if log_f > -700.0 else 0.0


def fso_pdf(x, model):
    """Density of the FSO gain under either scintillation model."""
    if isinstance(model, FsoExponential):
        if x < 0:
            raise ValueError(f"x must be >= 0, got {x}")
        return model.lam * math.exp(-model.lam * x)
    if isinstance(model, FsoGammaGamma):
        if x <= 0:
            raise ValueError(f"x must be > 0 for the Gamma-Gamma model, got {x}")
        a, b = model.a, model.b
        z = 2.0 * math.sqrt(a * b * x)
        if z > 700.0:
            return 0.0
        k = specfun.bessel_k(a - b, z)
        if k <= 0.0:
            return 0.0
        log_f = (
            math.log(2.0)
            + 0.5 * (a + b) * math.log(a * b)
            - math.lgamma(a)
            - math.lgamma(b)
            + (0.5 * (a + b) - 1.0) * math.log(x)
            + math.log(k)
        )
        return math.exp(log_f) if log_f > -700.0 else 0.0
    raise TypeError(f"unsupported FSO model {type(model).__name__}")


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_rician_sum(f: RicianFading, rng: RngStream, size=None):
    """Draw the sum gain G = sum_j |h_j|^2 from the complex-Gaussian
    construction: h_j = nu + sigma (Z1 + i Z2), with K = nu^2/(2 sigma^2) and
    Omega = nu^2 + 2 sigma^2."""
    g = rng.generator()
    nu = math.sqrt(f.K * f.Omega / (f.K + 1.0))
    sigma = math.sqrt(f.Omega / (2.0 * (f.K + 1.0)))
    shape = (f.N,) if size is None else (size, f.N)
    re = nu + sigma * g.standard_normal(shape)
    im = sigma * g.standard_normal(shape)
    total = np.sum(re * re + im * im, axis=-1)
    return float(total) if size is None else total


def sample_fso(model, rng: RngStream, size=None):
    """Draw the FSO gain: inverse-CDF for the exponential model, product of
    two unit-mean Gamma variates for Gamma-Gamma."""
    g = rng.generator()
    if isinstance(model, FsoExponential):
        out = g.exponential(scale=1.0 / model.lam, size=size)
    elif isinstance(model, FsoGammaGamma):
        out = g.gamma(model.a, 1.0 / model.a, size=size) * g.gamma(
            model.b, 1.0 / model.b, size=size
        )
    else:
        raise TypeError(f"unsupported FSO model {type(model).__name__}")
    return float(out) if size is None else out


# ---------------------------------------------------------------------------
# Gaussian surrogate of the sum gain
# ---------------------------------------------------------------------------

def _half_moment(n, K, Om):
    """S(n) = E[g^{n/2}] of the single-antenna gain: (Om/(K+1))^{n/2}
    Gamma(1+n/2) L_{n/2}(-K)."""
    return (
        (Om / (K + 1.0)) ** (0.5 * n)
        * math.gamma(1.0 + 0.5 * n)
        * specfun.laguerre(0.5 * n, -K)
    )


def clt_sum_gain_params(f: RicianFading) -> GaussianApprox:
    """Gaussian surrogate for the sum gain: mean N*zeta, variance N*nu2 with
    zeta = S(2) (= Omega exactly) and nu2 = S(4) - S(2)^2."""
    zeta = _half_moment(2, f.K, f.Omega)
    nu2 = _half_moment(4, f.K, f.Omega) - zeta * zeta
    return GaussianApprox(mean=f.N * zeta, variance=f.N * nu2)
