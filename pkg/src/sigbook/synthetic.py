"""Labelled synthetic level-one streams with prescribed volume profiles.

Each class is defined by the shape ``c*(u)`` of its cumulative traded
volume in normalised time. Prices, spreads and book imbalance are nuisance
channels drawn from the same law for every class, so only the volume
geometry separates them:

* ``back_loaded`` (``u**2``) and ``front_loaded`` (``sqrt(u)``) differ in
  the sign of the (time, volume) area;
* ``mid_loaded`` and ``front_and_back_loaded`` are point-symmetric about
  ``(1/2, 1/2)``, so both have zero area and differ only in the
  second-order area.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_features import OrderBookStream

__all__ = [
    "PROFILES",
    "GeneratorConfig",
    "base_profile",
    "generate_stream",
    "generate_dataset",
]

PROFILES = ("front_loaded", "back_loaded", "mid_loaded", "front_and_back_loaded", "flat")

#: Steepness of the tanh step used by the two symmetric profiles.
STEP_STEEPNESS = 8.0
SAMPLE_SECONDS = 60.0
START_MID = 100.0
TICK = 0.01
WIDEN_PROB = 0.1
IMBALANCE_PHI = 0.8
IMBALANCE_SIGMA = 0.2
IMBALANCE_BOUND = 0.95
BOOK_DEPTH = 50.0
TOTAL_VOLUME = 5000.0


@dataclass(frozen=True)
class GeneratorConfig:
    profile_class: str = "flat"
    n_points: int = 60
    noise_level: float = 0.3
    price_vol: float = 0.02
    seed: int = 0
    count: int = 100

    def __post_init__(self):
        if self.profile_class not in PROFILES:
            raise ValueError(f"unknown profile {self.profile_class!r}; choose from {PROFILES}")
        if self.n_points < 3:
            raise ValueError("n_points must be at least 3")
        if self.noise_level < 0 or self.price_vol < 0:
            raise ValueError("noise_level and price_vol must be non-negative")
        if self.count < 0:
            raise ValueError("count must be non-negative")


def base_profile(name: str, u) -> np.ndarray:
    """Noise-free cumulative volume fraction at normalised times ``u``."""
    u = np.asarray(u, dtype=float)
    k = STEP_STEEPNESS
    if name == "front_loaded":
        return np.sqrt(u)
    if name == "back_loaded":
        return u**2
    if name == "flat":
        return u.copy()
    if name == "mid_loaded":
        return 0.5 * (1.0 + np.tanh(k * (u - 0.5)) / np.tanh(k / 2))
    if name == "front_and_back_loaded":
        # inverse function of the mid-loaded step: mirror image in the diagonal
        return 0.5 + np.arctanh((2.0 * u - 1.0) * np.tanh(k / 2)) / k
    raise ValueError(f"unknown profile {name!r}")


def _volume_fractions(cfg: GeneratorConfig, u: np.ndarray, rng) -> np.ndarray:
    base = np.diff(base_profile(cfg.profile_class, u))
    if cfg.noise_level > 0:
        # mean-one gamma multipliers, renormalised: a Dirichlet draw centred on the profile
        shape = 1.0 / cfg.noise_level**2
        base = base * rng.gamma(shape, 1.0 / shape, size=base.shape)
        base = base / base.sum()
    return np.concatenate([[0.0], np.cumsum(base)])


def generate_stream(cfg: GeneratorConfig, index: int, label=None) -> OrderBookStream:
    """Stream number ``index`` of a class; randomness depends only on ``(seed, index)``."""
    rng = np.random.default_rng([cfg.seed, index])
    n = cfg.n_points
    steps = np.arange(n)
    u = steps / (n - 1)
    cum = TOTAL_VOLUME * _volume_fractions(cfg, u, rng)

    mid = START_MID + np.concatenate([[0.0], np.cumsum(rng.normal(0.0, cfg.price_vol, n - 1))])
    spread = TICK * (1.0 + (rng.random(n) < WIDEN_PROB))

    imb = np.empty(n)
    imb[0] = rng.uniform(-0.5, 0.5)
    shocks = rng.normal(0.0, IMBALANCE_SIGMA, n)
    for k in range(1, n):
        imb[k] = np.clip(IMBALANCE_PHI * imb[k - 1] + shocks[k], -IMBALANCE_BOUND, IMBALANCE_BOUND)

    return OrderBookStream(
        id=f"{cfg.profile_class}-s{cfg.seed}-i{index:05d}",
        times=SAMPLE_SECONDS * steps,
        ask=mid + 0.5 * spread,
        bid=mid - 0.5 * spread,
        ask_volume=BOOK_DEPTH * (1.0 + imb),
        bid_volume=BOOK_DEPTH * (1.0 - imb),
        cum_volume=cum,
        label=label,
    )


def generate_dataset(cfg_a: GeneratorConfig, cfg_b: GeneratorConfig) -> list:
    """``cfg_a.count`` streams labelled 0 followed by ``cfg_b.count`` labelled 1.

    Ids are ``<label>-<profile>-s<seed>-i<index>`` so they stay unique even
    when both configurations coincide.
    """
    out = []
    for label, cfg in ((0, cfg_a), (1, cfg_b)):
        for index in range(cfg.count):
            s = generate_stream(cfg, index, label=label)
            s.id = f"{label}-{s.id}"
            out.append(s)
    return out

