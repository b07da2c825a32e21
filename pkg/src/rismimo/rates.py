"""Achievable-rate analysis: closed form and Monte Carlo.

Two independent routes to the per-user downlink rate:

* ``closed_form_rates`` evaluates the analytic approximation
  R_k = log2(1 + a^2 P E_sig / (a^2 P sum_i I_ki + P I_dac + sigma^2 E_tr)),
  whose ingredients are exact fading moments of the cascaded channel.
* ``monte_carlo_rates`` averages log2(1 + SINR) over sampled channel
  realizations, with the quantization-noise power taken as its conditional
  expectation given the channel (one variance source less, matching the
  quantity the closed form approximates).  Full noise sampling is available
  behind a flag for cross-validation.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _ratecore_py, kernels
from .channels import LinkGains, array_response, sample_channel
from .config import TWO_PI, ScenarioConfig, wrap_angle
from .precoding import DacModel
from .rng import substream

logger = logging.getLogger(__name__)


def phase_grid_value(index, bits: int):
    """Value(s) 2*pi*index / 2**bits of the discrete phase grid."""
    return np.asarray(index) * (TWO_PI / (2 ** bits))


@dataclass(frozen=True)
class PhaseVector:
    """RIS phase shifts plus their constraint regime.

    ``bits is None`` means continuous phases in [0, 2*pi); otherwise every
    entry must sit exactly on the 2**bits-point grid.
    """

    theta: np.ndarray
    bits: Optional[int] = None

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1:
            raise ValueError("theta must be a 1-D vector of phases")
        if np.any(theta < 0) or np.any(theta >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")
        if self.bits is not None:
            if self.bits < 1:
                raise ValueError(f"discrete regime needs bits >= 1; got {self.bits}")
            levels = 2 ** self.bits
            snapped = phase_grid_value(np.rint(theta / (TWO_PI / levels)) % levels, self.bits)
            if not np.array_equal(theta, snapped):
                raise ValueError(f"phases are not on the {levels}-point discrete grid")

    @classmethod
    def continuous(cls, theta) -> "PhaseVector":
        return cls(theta=wrap_angle(np.asarray(theta, dtype=float)), bits=None)

    @classmethod
    def discrete(cls, theta, bits: int) -> "PhaseVector":
        return cls(theta=np.asarray(theta, dtype=float), bits=bits)

    @property
    def n_elements(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class RateBreakdown:
    """Per-user rate together with the four SINR building blocks."""

    signal: np.ndarray            # (K,)  E{||f_k||^4}
    interference: np.ndarray      # (K,K) E{|f_k^H f_i|^2}, zero diagonal
    dac: np.ndarray               # (K,)  quantization-noise quadratic form
    noise: float                  # E{Tr(F^H F)}, common to all users
    sinr: np.ndarray              # (K,)
    rates: np.ndarray             # (K,) bits/s/Hz
    sum_rate: float
    rate_stderr: Optional[np.ndarray] = None
    sum_rate_stderr: Optional[float] = None
    n_trials: Optional[int] = None


def delta(epsilon: float, beta_c: float, k_g: float, k_c: float) -> float:
    """Composite large-scale factor eps*beta_c / ((K_G+1)(K_c+1))."""
    return epsilon * beta_c / ((k_g + 1.0) * (k_c + 1.0))


def _theta_of(phases) -> np.ndarray:
    return np.asarray(getattr(phases, "theta", phases), dtype=float)


def psi(phases, phi_ct: float, phi_r: float, d_over_lambda: float) -> complex:
    """Array-gain scalar coupling the RIS phases to one link's LoS geometry:
    sum_n exp(j*2*pi*(d/lambda)*(n-1)*(sin(phi_ct) - sin(phi_r)) - j*theta_n).

    Its modulus is at most N, with equality exactly at phase alignment.
    """
    theta = _theta_of(phases)
    n = np.arange(theta.shape[0])
    geo = TWO_PI * d_over_lambda * n * (np.sin(phi_ct) - np.sin(phi_r))
    return complex(np.sum(np.exp(1j * geo - 1j * theta)))


def los_inner_product(phi_kt: float, phi_it: float, N: int, d_over_lambda: float) -> complex:
    """Inner product hbar_k^H hbar_i of two user LoS steering vectors."""
    n = np.arange(N)
    return complex(np.sum(np.exp(
        1j * TWO_PI * d_over_lambda * n * (np.sin(phi_it) - np.sin(phi_kt)))))


@dataclass(frozen=True)
class RateContext:
    """Precomputed scenario constants for fast repeated rate evaluation."""

    M: int
    N: int
    K: int
    steer: np.ndarray        # (K, N) complex, psi_c = steer[c] @ exp(-j theta)
    los: np.ndarray          # (K, K) complex LoS Gram matrix
    delta: np.ndarray        # (K,)
    ric_user: np.ndarray     # (K,)
    ric_bs: float
    alpha: float
    p: float
    sigma2: float

    @classmethod
    def from_scenario(cls, config: ScenarioConfig, gains: LinkGains) -> "RateContext":
        if math.isinf(config.k_g) or np.any(np.isinf(config.k_k)):
            raise ValueError("closed-form rates require finite Rician factors")
        a_ris = array_response(config.N, config.phi_r, config.d_over_lambda)
        a_users = np.stack(
            [array_response(config.N, a, config.d_over_lambda) for a in config.phi_kt])
        steer = a_users * a_ris.conj()[None, :]
        los = a_users.conj() @ a_users.T
        dlt = np.array([
            delta(gains.epsilon, gains.beta[k], config.k_g, config.k_k[k])
            for k in range(config.K)])
        return cls(M=config.M, N=config.N, K=config.K, steer=steer, los=los,
                   delta=dlt, ric_user=np.asarray(config.k_k, float), ric_bs=config.k_g,
                   alpha=DacModel.for_bits(config.dac_bits).alpha,
                   p=config.p, sigma2=config.sigma2)

    def _args(self):
        return (self.steer, self.los, self.delta, self.ric_user, self.ric_bs,
                float(self.M), self.alpha, self.p, self.sigma2)

    def sum_rates(self, theta_batch: np.ndarray) -> np.ndarray:
        """Sum rate for each row of an (L, N) phase batch (selected backend)."""
        theta_batch = np.ascontiguousarray(np.atleast_2d(theta_batch), dtype=float)
        return kernels.sum_rate_batch(theta_batch, *self._args())

    def terms(self, theta: np.ndarray) -> dict:
        """Full breakdown (numpy reference path) for a single phase vector."""
        out = _ratecore_py.rate_terms(np.atleast_2d(theta), *self._args())
        return {k: v[0] for k, v in out.items()}


def signal_term(k: int, config: ScenarioConfig, gains: LinkGains, phases) -> float:
    """Exact E{||f_k||^4} entering the SINR numerator."""
    ctx = RateContext.from_scenario(config, gains)
    return float(ctx.terms(_theta_of(phases))["signal"][k])


def interference_term(k: int, i: int, config: ScenarioConfig, gains: LinkGains, phases) -> float:
    """Exact E{|f_k^H f_i|^2} between two distinct users."""
    if i == k:
        raise ValueError("invalid pair: interference term requires i != k")
    ctx = RateContext.from_scenario(config, gains)
    return float(ctx.terms(_theta_of(phases))["interference"][k, i])


def dac_term(k: int, config: ScenarioConfig, gains: LinkGains, phases) -> float:
    """Quantization-noise quadratic form E{T_r f_k^H R_nq f_k}; exactly zero
    for ideal DACs."""
    ctx = RateContext.from_scenario(config, gains)
    return float(ctx.terms(_theta_of(phases))["dac"][k])


def noise_term(config: ScenarioConfig, gains: LinkGains, phases) -> float:
    """E{Tr(F^H F)}; identical for every user."""
    ctx = RateContext.from_scenario(config, gains)
    return float(ctx.terms(_theta_of(phases))["noise"])


def closed_form_rates(config: ScenarioConfig, gains: LinkGains, phases) -> RateBreakdown:
    """Analytic per-user and sum achievable rates for fixed phase shifts."""
    ctx = RateContext.from_scenario(config, gains)
    t = ctx.terms(_theta_of(phases))
    if np.any(t["denominator"] <= 0.0):
        raise ValueError("degenerate scenario: SINR denominator is not positive")
    if t["n_clamped"] > 0:
        logger.warning("%d negative closed-form term(s) clamped to zero", int(t["n_clamped"]))
    return RateBreakdown(
        signal=t["signal"], interference=t["interference"], dac=t["dac"],
        noise=float(t["noise"]), sinr=t["sinr"], rates=t["rates"],
        sum_rate=float(t["sum_rate"]))


# ---------------------------------------------------------------------------
# Monte Carlo route
# ---------------------------------------------------------------------------

def _trial_stats(config, gains, phase_factors, t_index, seed, stream):
    """Per-trial channel statistics needed by the SINR and the moment checks."""
    rng = substream(seed, *stream, t_index)
    real = sample_channel(config, gains, rng)
    F = (real.H.conj().T * phase_factors[None, :]) @ real.G
    af2 = np.abs(F) ** 2                       # (K, M)
    norms2 = af2.sum(axis=1)                   # ||f_k||^2
    gram2 = np.abs(F @ F.conj().T) ** 2        # |f_k^H f_i|^2
    colpower = af2.sum(axis=0)                 # diag(F^H F)
    dac_quad = af2 @ colpower                  # f_k^H diag(F^H F) f_k
    return F, af2, norms2, gram2, colpower, dac_quad


def monte_carlo_rates(config: ScenarioConfig, gains: LinkGains, phases, n_trials: int,
                      seed: Optional[int] = None, stream=("mc-trial",),
                      sample_quantization_noise: bool = False,
                      workers: int = 1) -> RateBreakdown:
    """Trial-averaged rates over independent channel realizations.

    Each trial draws its channel from the substream (seed, *stream, trial), so
    results are bit-identical for any worker count or chunking.  By default
    the quantization-noise power enters through its conditional expectation
    given the channel; ``sample_quantization_noise`` draws an explicit noise
    vector per trial instead.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1; got {n_trials}")
    if seed is None:
        seed = config.seed
    theta = _theta_of(phases)
    if theta.shape != (config.N,):
        raise ValueError(f"phase vector length {theta.shape} does not match N={config.N}")
    phase_factors = np.exp(1j * theta)
    alpha = DacModel.for_bits(config.dac_bits).alpha
    a2p = alpha ** 2 * config.p

    per_trial = np.empty((n_trials, config.K))

    def run_chunk(lo, hi):
        sig = np.zeros(config.K)
        itf = np.zeros((config.K, config.K))
        dac = np.zeros(config.K)
        tr_acc = 0.0
        for t in range(lo, hi):
            F, af2, norms2, gram2, colpower, dac_quad = _trial_stats(
                config, gains, phase_factors, t, seed, stream)
            t_r = norms2.sum()
            np.fill_diagonal(gram2, 0.0)
            if sample_quantization_noise and alpha < 1.0:
                nrng = substream(seed, *stream, t, "dac-noise")
                var = alpha * (1.0 - alpha) * colpower / t_r
                n_q = np.sqrt(var / 2.0) * (nrng.standard_normal(config.M)
                                            + 1j * nrng.standard_normal(config.M))
                dac_power = t_r * np.abs(F @ n_q) ** 2
            else:
                dac_power = alpha * (1.0 - alpha) * dac_quad
            denom = a2p * gram2.sum(axis=1) + config.p * dac_power + config.sigma2 * t_r
            per_trial[t] = np.log2(1.0 + a2p * norms2 ** 2 / denom)
            sig += norms2 ** 2
            itf += gram2
            dac += dac_power
            tr_acc += t_r
        return sig, itf, dac, tr_acc

    chunk = 256
    bounds = [(lo, min(lo + chunk, n_trials)) for lo in range(0, n_trials, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda b: run_chunk(*b), bounds))
    else:
        results = [run_chunk(*b) for b in bounds]

    # per-trial slots fix the reduction order, so worker count cannot change
    # anything; the term accumulators are summed chunk-by-chunk in index order
    acc = [np.zeros(config.K), np.zeros((config.K, config.K)), np.zeros(config.K), 0.0]
    for parts in results:
        for j in range(4):
            acc[j] += parts[j]

    rates = per_trial.mean(axis=0)
    stderr = per_trial.std(axis=0, ddof=1) / math.sqrt(n_trials) if n_trials > 1 \
        else np.zeros(config.K)
    sum_rates = per_trial.sum(axis=1)
    sum_stderr = float(sum_rates.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    k = float(n_trials)
    return RateBreakdown(
        signal=acc[0] / k, interference=acc[1] / k, dac=acc[2] / k, noise=acc[3] / k,
        sinr=2.0 ** rates - 1.0,  # SINR implied by the mean rate
        rates=rates, sum_rate=float(rates.sum()),
        rate_stderr=stderr, sum_rate_stderr=sum_stderr, n_trials=n_trials)


def empirical_moments(config: ScenarioConfig, gains: LinkGains, phases, n_trials: int,
                      seed: Optional[int] = None, stream=("mc-trial",)) -> dict:
    """Sample estimates of the fading moments used by the closed form.

    Returns per-user arrays: 'entry2' and 'entry4' (per-entry moments of f_k,
    pooled over antennas), 'signal4' (E||f_k||^4), 'cross2' (K x K,
    E|f_k^H f_i|^2), 'trace' (E Tr(F^H F)) and 'dac_quad'
    (E f_k^H diag(F^H F) f_k).
    """
    if seed is None:
        seed = config.seed
    theta = _theta_of(phases)
    phase_factors = np.exp(1j * theta)
    acc = dict(entry2=np.zeros(config.K), entry4=np.zeros(config.K),
               signal4=np.zeros(config.K), cross2=np.zeros((config.K, config.K)),
               trace=0.0, dac_quad=np.zeros(config.K))
    for t in range(n_trials):
        _, af2, norms2, gram2, colpower, dac_quad = _trial_stats(
            config, gains, phase_factors, t, seed, stream)
        acc["entry2"] += af2.mean(axis=1)
        acc["entry4"] += (af2 ** 2).mean(axis=1)
        acc["signal4"] += norms2 ** 2
        acc["cross2"] += gram2
        acc["trace"] += norms2.sum()
        acc["dac_quad"] += dac_quad
    return {k: v / n_trials for k, v in acc.items()}


def moment_oracles(config: ScenarioConfig, gains: LinkGains, phases, n_trials: int,
                   seed: Optional[int] = None) -> list[dict]:
    """Empirical-vs-analytic table for the fading moments behind the closed
    form; each row carries name, user index, analytic, empirical, rel_error.

    Covered moments: per-entry second and fourth moments of f_k, the trace
    E{Tr(F^H F)}, and the quantization-noise quadratic form
    E{f_k^H diag(F^H F) f_k} (reported without the alpha(1-alpha) scale so it
    is meaningful for ideal DACs too).
    """
    if n_trials < 1000:
        raise ValueError(f"moment comparison needs n_trials >= 1000; got {n_trials}")
    ctx = RateContext.from_scenario(config, gains)
    theta = _theta_of(phases)
    emp = empirical_moments(config, gains, phases, n_trials, seed=seed)

    t = _ratecore_py.rate_terms(theta[None], *ctx._args())
    gam = np.abs(ctx.steer @ np.exp(-1j * theta)) ** 2    # (K,) array gains
    G, R, d, N = ctx.ric_bs, ctx.ric_user, ctx.delta, ctx.N
    entry2 = d * (G * R * gam + N * (G + R + 1.0))
    entry4 = d ** 2 * ((G * R * gam) ** 2
                       + 4.0 * G * R * N * gam * (G + R + 1.0)
                       + 8.0 * G * R * gam
                       + 2.0 * N ** 2 * (G + R + 1.0) ** 2
                       + 2.0 * N * (2.0 * (G + R) + 1.0))
    dac_quad = t["dac_raw"][0]

    rows = []

    def add(name, k, analytic, empirical):
        rows.append(dict(name=name, user=k, analytic=float(analytic),
                         empirical=float(empirical),
                         rel_error=abs(analytic - empirical) / abs(empirical)))

    for k in range(ctx.K):
        add("entry_second_moment", k, entry2[k], emp["entry2"][k])
        add("entry_fourth_moment", k, entry4[k], emp["entry4"][k])
        add("dac_quadratic_form", k, dac_quad[k], emp["dac_quad"][k])
    add("trace", -1, t["noise"][0], emp["trace"])
    return rows
