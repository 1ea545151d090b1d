"""
Signatures of small paths
=========================

Iterated integrals of a piecewise-linear path, the concatenation
identity and the areas read off level two.
"""

import numpy as np

from sigbook import Stream, concat_product, stream_signature
from sigbook.signature import area, second_order_area

# right then up: level one is the increment, level two splits into
# a symmetric part (increments squared over two) and the area
sig = stream_signature([(0, 0), (1, 0), (1, 1)], depth=2)
for word in [(1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]:
    print(word, sig[word])
print("area:", area(sig, 1, 2))

# up then right has the opposite area
print("reversed order area:", area(stream_signature([(0, 0), (0, 1), (1, 1)], 2), 1, 2))

# concatenation: the signature of a joined path is the tensor product
rng = np.random.default_rng(0)
walk = Stream(np.cumsum(rng.normal(size=(21, 3)), axis=0))
left, right = walk.split(10)
joined = concat_product(stream_signature(left, 4), stream_signature(right, 4))
print("max concatenation error:", np.abs(joined.coeffs - stream_signature(walk, 4).coeffs).max())

# walking back along the path cancels everything above level zero
back = concat_product(stream_signature(walk, 4), stream_signature(walk.reversed(), 4))
print("path times reverse, top coefficients:", np.round(back.coeffs[:5], 12))

# two paths with identical start, end and area, told apart at level three
mid = stream_signature([(0, 0), (0.4, 0.1), (0.6, 0.9), (1, 1)], 3)
fab = stream_signature([(0, 0), (0.4, 0.45), (0.6, 0.55), (1, 1)], 3)
print("areas:", area(mid, 1, 2), area(fab, 1, 2))
print("second-order areas:", second_order_area(mid, 1, 2), second_order_area(fab, 1, 2))
