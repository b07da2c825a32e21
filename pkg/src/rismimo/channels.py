"""Scene geometry, path loss and Rician channel sampling.

The downlink chain is BS --(G)--> RIS --(H)--> users with the direct BS-user
link blocked.  G is N x M, column spacing d/lambda on both uniform linear
arrays; H stacks the per-user N-vectors h_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .rng import substream


def array_response(X: int, angle: float, d_over_lambda: float) -> np.ndarray:
    """Steering vector of an X-element uniform linear array.

    Entry x (0-indexed) is exp(j*2*pi*(d/lambda)*x*sin(angle)); the first
    entry is exactly 1 and every entry has unit modulus.
    """
    if not isinstance(X, (int, np.integer)) or X < 1:
        raise ValueError(f"array size must be a positive integer; got {X!r}")
    n = np.arange(X)
    return np.exp(1j * 2.0 * np.pi * d_over_lambda * n * np.sin(angle))


def path_loss(distance: float, pl0_db: float, d0: float, kappa: float) -> float:
    """Distance-based power gain 10^(pl0_db/10) * (distance/d0)^(-kappa)."""
    if distance <= 0:
        raise ValueError(f"link distance must be > 0 m; got {distance!r}")
    if d0 <= 0:
        raise ValueError(f"reference distance d0 must be > 0 m; got {d0!r}")
    return 10.0 ** (pl0_db / 10.0) * (distance / d0) ** (-kappa)


@dataclass(frozen=True)
class LinkGains:
    """Large-scale gains: epsilon for BS-RIS, beta[k] for RIS-user k."""

    epsilon: float
    beta: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw: G is N x M (BS->RIS), column k of H is h_k (RIS->user)."""

    G: np.ndarray
    H: np.ndarray


def build_scene(config: ScenarioConfig, rng: np.random.Generator | None = None):
    """Drop users uniformly on the configured disk and compute link gains.

    Returns (LinkGains, user_positions) with user_positions of shape (K, 2).
    The default generator is the scenario seed's "scene" substream, so a given
    seed always produces the same drop.
    """
    if rng is None:
        rng = substream(config.seed, "scene")
    r = config.user_radius * np.sqrt(rng.uniform(size=config.K))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=config.K)
    users = config.user_center[None, :] + np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)

    d_bi = float(np.hypot(*(config.ris_pos - config.bs_pos)))
    epsilon = path_loss(d_bi, config.pl0_db, config.d0, config.kappa_bi)
    d_iu = np.hypot(users[:, 0] - config.ris_pos[0], users[:, 1] - config.ris_pos[1])
    beta = np.array([path_loss(d, config.pl0_db, config.d0, config.kappa_iu) for d in d_iu])
    return LinkGains(epsilon=epsilon, beta=beta), users


def los_components(config: ScenarioConfig):
    """Deterministic parts of the fading: Gbar = a_N(phi_r) a_M(phi_t)^H and
    Hbar whose column k is a_N(phi_kt[k])."""
    a_ris = array_response(config.N, config.phi_r, config.d_over_lambda)
    a_bs = array_response(config.M, config.phi_t, config.d_over_lambda)
    g_bar = np.outer(a_ris, a_bs.conj())
    h_bar = np.stack(
        [array_response(config.N, a, config.d_over_lambda) for a in config.phi_kt], axis=1)
    return g_bar, h_bar


def _rician_mix(k_factor: float):
    """(los_weight, scatter_weight) = (sqrt(K/(K+1)), sqrt(1/(K+1))), with the
    exact K -> infinity limit (1, 0)."""
    if math.isinf(k_factor):
        return 1.0, 0.0
    return math.sqrt(k_factor / (k_factor + 1.0)), math.sqrt(1.0 / (k_factor + 1.0))


def _cn_sample(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0,1) entries: two real normals of variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channel(config: ScenarioConfig, gains: LinkGains,
                   rng: np.random.Generator) -> ChannelRealization:
    """Draw one Rician realization of (G, H) for the given large-scale gains."""
    g_bar, h_bar = los_components(config)
    wl, ws = _rician_mix(config.k_g)
    g_sc = _cn_sample(rng, (config.N, config.M)) if ws else 0.0
    G = np.sqrt(gains.epsilon) * (wl * g_bar + ws * g_sc)

    H = np.empty((config.N, config.K), dtype=complex)
    for k in range(config.K):
        wl_k, ws_k = _rician_mix(float(config.k_k[k]))
        h_sc = _cn_sample(rng, config.N) if ws_k else 0.0
        H[:, k] = np.sqrt(gains.beta[k]) * (wl_k * h_bar[:, k] + ws_k * h_sc)
    return ChannelRealization(G=G, H=H)


def cascaded_channel(realization: ChannelRealization, phases) -> np.ndarray:
    """Composite K x M channel F = H^H diag(e^{j theta}) G (unit reflection
    amplitudes); row k is f_k^H."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    N = realization.G.shape[0]
    if theta.shape != (N,):
        raise ValueError(
            f"phase vector length {theta.shape} does not match N={N} RIS elements")
    if realization.H.shape[0] != N:
        raise ValueError("G and H disagree on the number of RIS elements")
    return (realization.H.conj().T * np.exp(1j * theta)[None, :]) @ realization.G
