"""Scenario configuration: physical and system parameters.

External inputs use dBm for powers; they are converted to linear watts once,
here, and all downstream math is linear-scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .rng import substream

TWO_PI = 2.0 * np.pi

#: Baseline parameter values used whenever a field is not supplied.
DEFAULTS = dict(
    M=64,
    N=16,
    K=6,
    p_dbm=30.0,
    sigma2_dbm=-104.0,
    k_g=1.0,
    k_k=10.0,
    d_over_lambda=0.5,
    bs_pos=(0.0, 0.0),
    ris_pos=(5.0, 2.0),
    user_center=(400.0, 0.0),
    user_radius=4.0,
    pl0_db=-30.0,
    d0=1.0,
    kappa_bi=2.8,
    kappa_iu=2.8,
    dac_bits=1,
    ris_bits=2,
    seed=1,
)


def dbm_to_watt(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) * 1e-3


def watt_to_dbm(x_w: float) -> float:
    return 10.0 * math.log10(x_w / 1e-3)


def wrap_angle(theta):
    """Map angles into [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved simulation scenario.

    Powers are linear watts; angles radians in [0, 2*pi).  ``dac_bits`` is a
    positive integer or ``math.inf`` (ideal converters); ``ris_bits`` is a
    positive integer or ``None`` for continuous phase shifts.
    """

    M: int
    N: int
    K: int
    p: float
    sigma2: float
    k_g: float
    k_k: np.ndarray
    phi_r: float
    phi_t: float
    phi_kt: np.ndarray
    d_over_lambda: float
    bs_pos: np.ndarray
    ris_pos: np.ndarray
    user_center: np.ndarray
    user_radius: float
    pl0_db: float
    d0: float
    kappa_bi: float
    kappa_iu: float
    dac_bits: float
    ris_bits: Optional[int]
    seed: int

    def __post_init__(self):
        for name in ("M", "N", "K"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer ({name} >= 1); got {v!r}")
        if not self.p > 0:
            raise ValueError(f"transmit power must satisfy P > 0 W; got {self.p!r}")
        if not self.sigma2 > 0:
            raise ValueError(f"noise power must satisfy sigma2 > 0 W; got {self.sigma2!r}")
        if self.k_g < 0:
            raise ValueError(f"Rician factor k_g must be >= 0; got {self.k_g!r}")
        if self.k_k.shape != (self.K,):
            raise ValueError(f"k_k must have length K={self.K}; got shape {self.k_k.shape}")
        if np.any(self.k_k < 0):
            raise ValueError("all user Rician factors k_k must be >= 0")
        if self.phi_kt.shape != (self.K,):
            raise ValueError(f"phi_kt must have length K={self.K}; got shape {self.phi_kt.shape}")
        if not self.d_over_lambda > 0:
            raise ValueError(f"d_over_lambda must be > 0; got {self.d_over_lambda!r}")
        if self.user_radius < 0:
            raise ValueError(f"user_radius must be >= 0; got {self.user_radius!r}")
        if not self.d0 > 0:
            raise ValueError(f"reference distance d0 must be > 0; got {self.d0!r}")
        if self.dac_bits != math.inf:
            if not float(self.dac_bits).is_integer() or self.dac_bits < 1:
                raise ValueError(
                    f"dac_bits must be a positive integer or infinite; got {self.dac_bits!r}")
        if self.ris_bits is not None and (not isinstance(self.ris_bits, (int, np.integer))
                                          or self.ris_bits < 1):
            raise ValueError(
                f"ris_bits must be a positive integer or continuous; got {self.ris_bits!r}")
        for name in ("phi_r", "phi_t"):
            v = getattr(self, name)
            if not 0.0 <= v < TWO_PI:
                raise ValueError(f"{name} must lie in [0, 2*pi); got {v!r}")
        if np.any(self.phi_kt < 0) or np.any(self.phi_kt >= TWO_PI):
            raise ValueError("phi_kt entries must lie in [0, 2*pi)")

    def with_updates(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)

    def as_dict(self) -> dict:
        """JSON-friendly echo of every resolved parameter."""
        return dict(
            M=self.M, N=self.N, K=self.K,
            p_dbm=watt_to_dbm(self.p), sigma2_dbm=watt_to_dbm(self.sigma2),
            p_watt=self.p, sigma2_watt=self.sigma2,
            k_g=self.k_g, k_k=self.k_k.tolist(),
            phi_r=self.phi_r, phi_t=self.phi_t, phi_kt=self.phi_kt.tolist(),
            d_over_lambda=self.d_over_lambda,
            bs_pos=self.bs_pos.tolist(), ris_pos=self.ris_pos.tolist(),
            user_center=self.user_center.tolist(), user_radius=self.user_radius,
            pl0_db=self.pl0_db, d0=self.d0,
            kappa_bi=self.kappa_bi, kappa_iu=self.kappa_iu,
            dac_bits="inf" if self.dac_bits == math.inf else int(self.dac_bits),
            ris_bits="continuous" if self.ris_bits is None else int(self.ris_bits),
            seed=self.seed,
        )


def _bearing(src, dst) -> float:
    """Angle of the src->dst direction in [0, 2*pi)."""
    d = np.asarray(dst, float) - np.asarray(src, float)
    return float(np.mod(math.atan2(d[1], d[0]), TWO_PI))


def make_config(**overrides) -> ScenarioConfig:
    """Build a ScenarioConfig from defaults plus keyword overrides.

    Accepted keys are those of DEFAULTS plus ``phi_r``, ``phi_t`` and
    ``phi_kt``.  User departure angles ``phi_kt`` default to one uniform draw
    from [0, 2*pi) under the scenario seed and are then frozen in the config;
    ``phi_r``/``phi_t`` default to the RIS->BS and BS->RIS bearings implied by
    the configured positions so that they are deterministic and reproducible.
    """
    known = set(DEFAULTS) | {"phi_r", "phi_t", "phi_kt"}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    params = dict(DEFAULTS)
    params.update({k: v for k, v in overrides.items() if v is not None})

    K = int(params["K"])
    seed = int(params["seed"])

    k_k = np.asarray(params["k_k"], dtype=float)
    if k_k.ndim == 0:
        k_k = np.full(K, float(k_k))

    bs_pos = np.asarray(params["bs_pos"], dtype=float)
    ris_pos = np.asarray(params["ris_pos"], dtype=float)
    user_center = np.asarray(params["user_center"], dtype=float)
    for nm, v in (("bs_pos", bs_pos), ("ris_pos", ris_pos), ("user_center", user_center)):
        if v.shape != (2,):
            raise ValueError(f"{nm} must be a 2-D coordinate pair; got {v!r}")

    phi_t = params.get("phi_t")
    phi_r = params.get("phi_r")
    if phi_t is None:
        phi_t = _bearing(bs_pos, ris_pos)
    if phi_r is None:
        phi_r = _bearing(ris_pos, bs_pos)

    phi_kt = params.get("phi_kt")
    if phi_kt is None:
        phi_kt = substream(seed, "user-angles").uniform(0.0, TWO_PI, size=K)
    else:
        phi_kt = wrap_angle(np.asarray(phi_kt, dtype=float))
        if phi_kt.ndim == 0:
            phi_kt = np.full(K, float(phi_kt))

    dac_bits = params["dac_bits"]
    dac_bits = math.inf if dac_bits in (math.inf, "inf", "infinite") else dac_bits
    ris_bits = params["ris_bits"]
    ris_bits = None if ris_bits in (None, "continuous") else int(ris_bits)

    return ScenarioConfig(
        M=int(params["M"]), N=int(params["N"]), K=K,
        p=dbm_to_watt(float(params["p_dbm"])),
        sigma2=dbm_to_watt(float(params["sigma2_dbm"])),
        k_g=float(params["k_g"]), k_k=k_k,
        phi_r=float(wrap_angle(phi_r)), phi_t=float(wrap_angle(phi_t)),
        phi_kt=phi_kt,
        d_over_lambda=float(params["d_over_lambda"]),
        bs_pos=bs_pos, ris_pos=ris_pos,
        user_center=user_center, user_radius=float(params["user_radius"]),
        pl0_db=float(params["pl0_db"]), d0=float(params["d0"]),
        kappa_bi=float(params["kappa_bi"]), kappa_iu=float(params["kappa_iu"]),
        dac_bits=dac_bits if dac_bits == math.inf else int(dac_bits),
        ris_bits=ris_bits,
        seed=seed,
    )
