"""
Lead-lag paths and volume profiles
==================================

The lead-lag embedding turns quadratic variation into an area. On
cumulative volume, the area against normalised time separates trading
that is early from trading that is late.
"""

import numpy as np

from sigbook import Stream, stream_signature
from sigbook.lead_lag import cross_variation, lead_lag_transform
from sigbook.market_features import normalize
from sigbook.signature import area, second_order_area
from sigbook.synthetic import PROFILES, GeneratorConfig, generate_stream

rng = np.random.default_rng(1)
x = Stream(np.cumsum(rng.normal(size=(40, 1)), axis=0))
ll = stream_signature(lead_lag_transform(x), 2)
# channel 1 lags, channel 2 leads
print("S[1,2] - S[2,1]:", ll[(1, 2)] - ll[(2, 1)])
print("sum of squared increments:", cross_variation(x, 1, 1))

# noise-free cumulative volume for each profile, normalised to [0,1]^2
print()
print(f"{'profile':24s} {'area':>9s} {'2nd order':>10s}")
for profile in PROFILES:
    s = generate_stream(GeneratorConfig(profile, n_points=60, noise_level=0.0, seed=3), 0)
    z = normalize(s)
    sig = stream_signature(Stream(np.column_stack([z.u, z.c])), 3)
    print(f"{profile:24s} {area(sig, 1, 2):+9.4f} {second_order_area(sig, 1, 2):+10.4f}")

# back-loaded lies below the diagonal (positive area), front-loaded
# above; the two symmetric profiles share the area and split at level 3
