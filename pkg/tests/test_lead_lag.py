import numpy as np
import pytest

from _helpers import random_stream
from sigbook.errors import DomainError, LeadLagSpecError
from sigbook.lead_lag import (
    LeadLagSpec,
    cross_variation,
    lag_transform,
    lead_lag_transform,
    lead_transform,
    partial_lead_lag,
)
from sigbook.signature import Stream, stream_signature

X3 = np.array([[1.0], [4.0], [9.0]])


def test_lead_and_lag_layouts():
    assert lead_transform(X3).points[:, 0].tolist() == [1, 4, 4, 9, 9]
    assert lag_transform(X3).points[:, 0].tolist() == [1, 1, 4, 4, 9]
    assert lead_transform(X3[:2]).points[:, 0].tolist() == [1, 4, 4]
    assert lag_transform(X3[:2]).points[:, 0].tolist() == [1, 1, 4]
    assert lead_transform(X3).times.tolist() == [0, 1, 2, 3, 4]


def test_constant_stream_stays_constant():
    out = lead_transform(np.full((4, 2), 3.0))
    assert out.points.shape == (7, 2)
    assert np.all(out.points == 3.0)


def test_partial_lead_lag_example():
    out = partial_lead_lag(Stream([0.0, 1.0]), [1])
    assert out.points.tolist() == [[0, 0], [1, 0], [1, 1]]


def test_empty_spec_preserves_signature(rng):
    s = random_stream(rng, dim=3)
    out = partial_lead_lag(s, LeadLagSpec())
    assert out.dim == 3
    assert stream_signature(out, 4).allclose(stream_signature(s, 4), atol=1e-12 * max(1, np.abs(stream_signature(s, 4).coeffs).max()))


def test_five_channels_with_price_lag():
    s = random_stream(np.random.default_rng(3), n_points=8, dim=5)
    out = partial_lead_lag(s, (2,))
    assert out.dim == 6 and len(out) == 15
    assert np.array_equal(out.points[:, 5], lag_transform(s).points[:, 1])
    assert np.array_equal(out.points[:, :5], lead_transform(s).points)


def test_lead_lag_endpoints_and_increments(rng):
    s = random_stream(rng)
    for t in (lead_transform(s), lag_transform(s), lead_lag_transform(s)):
        assert len(t) == 2 * len(s) - 1
        assert np.array_equal(t.points[0, : s.dim], s.points[0])
        assert np.array_equal(t.points[-1, : s.dim], s.points[-1])


def test_lead_and_lag_preserve_signature(rng):
    for _ in range(20):
        s = random_stream(rng)
        ref = stream_signature(s, 4)
        atol = 1e-12 * max(1, np.abs(ref.coeffs).max())
        assert stream_signature(lead_transform(s), 4).allclose(ref, atol=atol)
        assert stream_signature(lag_transform(s), 4).allclose(ref, atol=atol)


@pytest.mark.parametrize("spec", [(1, 1), (0,), (4,)])
def test_bad_specs(spec):
    with pytest.raises(LeadLagSpecError):
        partial_lead_lag(Stream(np.zeros((3, 3))), spec)


def test_output_dim():
    assert LeadLagSpec((2, 3)).output_dim(5) == 7


def test_cross_variation_examples():
    assert cross_variation([0.0, 1.0, 0.0], 1, 1) == 2
    assert cross_variation(np.ones((5, 2)), 1, 2) == 0
    assert cross_variation([(0, 0), (1, 2), (3, 3)], 1, 2) == 4
    with pytest.raises(DomainError):
        cross_variation([(0, 0), (1, 2)], 1, 3)


def test_quadratic_variation_identity(rng):
    for _ in range(100):
        s = random_stream(rng, n_points=int(rng.integers(2, 51)))
        d = s.dim
        ll = lead_lag_transform(s)
        sig = stream_signature(ll, 2)
        for a in range(1, d + 1):
            la = d + a
            assert sig[(a, la)] - sig[(la, a)] == pytest.approx(cross_variation(s, a, a), abs=1e-12, rel=1e-12)


def test_cross_channel_identity_corrected(rng):
    # the lead/lag difference also carries the (a, b) area of the original path
    for _ in range(100):
        s = random_stream(rng, n_points=int(rng.integers(2, 51)), dim=int(rng.integers(2, 4)))
        d = s.dim
        sig = stream_signature(lead_lag_transform(s), 2)
        for a in range(1, d + 1):
            for b in range(1, d + 1):
                lb, la = d + b, d + a
                qv = cross_variation(s, a, b)
                lhs = (sig[(a, lb)] - sig[(lb, a)]) - (sig[(a, b)] - sig[(b, a)])
                assert lhs == pytest.approx(qv, abs=1e-11, rel=1e-12)
                sym = 0.5 * ((sig[(a, lb)] - sig[(lb, a)]) + (sig[(b, la)] - sig[(la, b)]))
                assert sym == pytest.approx(qv, abs=1e-11, rel=1e-12)
