import numpy as np
import pytest

from sigbook.errors import EmptyBucketError, InvalidStreamError, ParseError, ValidationError
from sigbook.lead_lag import lag_transform
from sigbook.market_features import (
    INPUT_CHANNELS,
    FeatureRecord,
    NormalizedStream,
    OrderBookStream,
    assemble_input,
    feature_names,
    featurize,
    featurize_streams,
    normalize,
    parse_order_book_csv,
    read_feature_csv,
    slice_bucket,
    write_feature_csv,
    write_order_book_csv,
)
from sigbook.signature import Stream
from sigbook.synthetic import GeneratorConfig, generate_stream

HEADER = "stream_id,timestamp,best_ask,best_bid,ask_volume,bid_volume,cum_volume"


def write(tmp_path, body, header=HEADER, name="raw.csv"):
    path = tmp_path / name
    path.write_text(header + "\n" + body)
    return path


def book(n=5, seed=0, **kw):
    return generate_stream(GeneratorConfig("flat", n_points=n, seed=seed, **kw), 0)


def test_parse_three_rows(tmp_path):
    path = write(tmp_path, "a,0,10.2,10.1,5,3,0\na,30,10.3,10.1,4,4,5\na,60,10.2,10.0,2,1,10\n")
    (s,) = parse_order_book_csv(path)
    assert s.id == "a" and len(s) == 3
    assert s.times.tolist() == [0, 30, 60]
    assert s.label is None


def test_parse_crossed_book_names_stream_and_line(tmp_path):
    path = write(tmp_path, "x,0,10.2,10.1,5,3,0\nx,1,10.0,10.1,5,3,1\nx,2,10.2,10.1,5,3,2\n")
    with pytest.raises(ValidationError, match=r"'x'.*ask < bid.*line 3"):
        parse_order_book_csv(path)


def test_parse_decreasing_volume(tmp_path):
    path = write(tmp_path, "x,0,10.2,10.1,5,3,5\nx,1,10.2,10.1,5,3,4\nx,2,10.2,10.1,5,3,6\n")
    with pytest.raises(ValidationError, match="cumulative volume"):
        parse_order_book_csv(path)


def test_parse_interleaved_ids_sorted_by_time(tmp_path):
    rows = ["b,2,2,1,1,1,3", "a,1,2,1,1,1,1", "b,0,2,1,1,1,1", "a,0,2,1,1,1,0",
            "b,1,2,1,1,1,2", "a,2,2,1,1,1,2"]
    streams = parse_order_book_csv(write(tmp_path, "\n".join(rows) + "\n"))
    assert [s.id for s in streams] == ["b", "a"]
    for s in streams:
        assert s.times.tolist() == [0, 1, 2]
    assert streams[0].cum_volume.tolist() == [1, 2, 3]


def test_parse_duplicate_timestamp_keeps_last(tmp_path):
    rows = ["a,0,2,1,1,1,0", "a,1,2,1,1,1,1", "a,1,2,1,9,1,2", "a,2,2,1,1,1,3"]
    (s,) = parse_order_book_csv(write(tmp_path, "\n".join(rows) + "\n"))
    assert s.times.tolist() == [0, 1, 2]
    assert s.ask_volume.tolist() == [1, 9, 1]


@pytest.mark.parametrize("bad,line", [("a,1,2,1,1,1", 3), ("a,1,2,x,1,1,1", 3), (",1,2,1,1,1,1", 3)])
def test_parse_malformed_row_reports_line(tmp_path, bad, line):
    path = write(tmp_path, "a,0,2,1,1,1,0\n" + bad + "\n")
    with pytest.raises(ParseError, match=f"line {line}"):
        parse_order_book_csv(path)


def test_parse_missing_column(tmp_path):
    with pytest.raises(ParseError, match="missing columns"):
        parse_order_book_csv(write(tmp_path, "", header="stream_id,timestamp"))


def test_parse_skip_mode_drops_invalid(tmp_path, caplog):
    rows = ["a,0,2,1,1,1,0", "a,1,2,1,1,1,1", "a,2,2,1,1,1,2", "b,0,2,1,1,1,0", "b,1,2,1,1,1,1"]
    streams = parse_order_book_csv(write(tmp_path, "\n".join(rows) + "\n"), errors="skip")
    assert [s.id for s in streams] == ["a"]
    assert "need at least 3" in caplog.text


def test_parse_label_column_and_schema(tmp_path):
    header = "id,t,ask,bid,va,vb,vol,label"
    schema = dict(zip(("stream_id", "timestamp", "best_ask", "best_bid", "ask_volume", "bid_volume", "cum_volume"),
                      header.split(",")[:7]))
    rows = ["a,0,2,1,1,1,0,1", "a,1,2,1,1,1,1,1", "a,2,2,1,1,1,2,1"]
    (s,) = parse_order_book_csv(write(tmp_path, "\n".join(rows) + "\n", header=header), schema=schema)
    assert s.label == 1


def test_parse_inconsistent_labels(tmp_path):
    rows = ["a,0,2,1,1,1,0,1", "a,1,2,1,1,1,1,0", "a,2,2,1,1,1,2,1"]
    with pytest.raises(ValidationError, match="inconsistent"):
        parse_order_book_csv(write(tmp_path, "\n".join(rows) + "\n", header=HEADER + ",label"))


def test_raw_csv_round_trip(tmp_path):
    streams = [generate_stream(GeneratorConfig("back_loaded", n_points=8, seed=1), i, label=i % 2) for i in range(3)]
    path = tmp_path / "raw.csv"
    write_order_book_csv(path, streams)
    back = parse_order_book_csv(path)
    for a, b in zip(streams, back):
        assert a.id == b.id and a.label == b.label
        for name in ("times", "ask", "bid", "ask_volume", "bid_volume", "cum_volume"):
            assert np.array_equal(getattr(a, name), getattr(b, name))


def test_normalize_examples():
    s = OrderBookStream("a", [0, 30, 60], [10.2, 10.4, 10.3], [10.0, 10.1, 10.2], [2, 1, 0], [1, 1, 0], [0, 5, 10])
    n = normalize(s.validate())
    assert n.u.tolist() == [0, 0.5, 1]
    assert n.d.tolist() == pytest.approx([1 / 3, 0, 0])
    assert n.c.tolist() == [0, 0.5, 1]
    assert np.std(np.diff(n.p)) == pytest.approx(1, abs=1e-12)
    assert np.std(n.s) == pytest.approx(1, abs=1e-12)
    assert not any(n.flags.values())


def test_normalize_constant_mid_and_spread():
    s = OrderBookStream("a", [0, 1, 2], [10.1] * 3, [10.0] * 3, [1, 1, 1], [1, 1, 1], [0, 0, 0])
    n = normalize(s)
    assert np.all(n.p == 0) and np.all(n.s == 0) and np.all(n.c == 0)
    assert n.flags == {"price": True, "spread": True, "volume": True}


def test_normalize_zero_span():
    s = OrderBookStream("a", [5, 5, 5], [2, 2, 2], [1, 1, 1], [1, 1, 1], [1, 1, 1], [0, 1, 2])
    with pytest.raises(InvalidStreamError):
        normalize(s)


def test_normalized_price_is_fixed_point():
    n = normalize(book(40, seed=4))
    dp = np.diff(n.p)
    assert np.std(dp / np.std(dp)) == pytest.approx(np.std(dp), abs=1e-12)
    assert -1 <= n.d.min() and n.d.max() <= 1
    assert np.all(np.diff(n.c) >= 0) and n.c[-1] == 1


def _features(s):
    return featurize(assemble_input(normalize(s))).features


def _clone(s, **changes):
    fields = dict(id=s.id, times=s.times, ask=s.ask, bid=s.bid, ask_volume=s.ask_volume,
                  bid_volume=s.bid_volume, cum_volume=s.cum_volume, label=s.label)
    fields.update(changes)
    return OrderBookStream(**fields)


def test_featurize_time_shift_and_dilation_invariance():
    s = book(30, seed=2)
    ref = _features(s)
    assert np.allclose(_features(_clone(s, times=s.times + 12345.0)), ref, atol=1e-12, rtol=0)
    assert np.allclose(_features(_clone(s, times=s.times * 7.5)), ref, atol=1e-12, rtol=0)


def test_featurize_price_and_volume_scale_invariance():
    s = book(30, seed=3)
    ref = _features(s)
    scaled = _clone(s, ask=s.ask * 13.0, bid=s.bid * 13.0, cum_volume=s.cum_volume * 250.0)
    assert np.allclose(_features(scaled), ref, atol=1e-9, rtol=0)


def test_assemble_input_shape_and_lag_channel():
    n = NormalizedStream("a", np.array([0, 1.0]), np.array([0, 2.0]), np.zeros(2), np.zeros(2), np.array([0, 1.0]))
    z = assemble_input(n)
    assert z.dim == 6 and len(z) == 3
    n = normalize(book(10))
    z = assemble_input(n)
    assert np.array_equal(z.points[:, 5], lag_transform(Stream(n.p)).points[:, 0])


def test_featurize_length_and_unit_increments():
    rec = featurize(assemble_input(normalize(book(12))), stream_id="a", label=1)
    assert rec.features.shape == (1554,)
    assert rec.features[0] == pytest.approx(1, abs=1e-12)
    assert rec.features[4] == pytest.approx(1, abs=1e-12)
    assert np.isfinite(rec.features).all()


def test_featurize_streams_matches_single_path():
    streams = [book(n, seed=k) for k, n in enumerate([10, 12, 10, 7, 12])]
    recs = featurize_streams(streams, chunk_size=2)
    assert [r.stream_id for r in recs] == [s.id for s in streams]
    for s, r in zip(streams, recs):
        assert np.array_equal(r.features, _features(s))


def test_featurize_streams_workers_identical():
    streams = [book(15, seed=k) for k in range(6)]
    a = featurize_streams(streams, workers=1, chunk_size=2)
    b = featurize_streams(streams, workers=2, chunk_size=2)
    assert all(np.array_equal(x.features, y.features) for x, y in zip(a, b))


def test_slice_bucket():
    s = book(61)  # one row per minute
    first = slice_bucket(s, 0, 1800)
    assert first.times.tolist() == list(np.arange(31) * 60.0)
    assert first.id == f"{s.id}@0-1800"
    with pytest.raises(EmptyBucketError):
        slice_bucket(s, 0, 90)
    with pytest.raises(EmptyBucketError):
        slice_bucket(s, 10_000, 20_000)
    with pytest.raises(ValueError):
        slice_bucket(s, 5, 5)


def test_feature_names_layout():
    names = feature_names(6, 4)
    assert len(names) == 1554
    assert names[:2] == ["sig_1", "sig_2"] and names[6] == "sig_1.1"
    assert "sig_1.5.1.5" in names
    assert len(feature_names(6, 2)) == 42
    assert len(INPUT_CHANNELS) == 6


def test_feature_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    recs = [FeatureRecord(f"s{k}", [0, 1, None][k], rng.normal(size=42)) for k in range(3)]
    path = tmp_path / "f.csv"
    write_feature_csv(path, recs, depth=2)
    fm = read_feature_csv(path)
    assert fm.ids == ["s0", "s1", "s2"]
    assert np.array_equal(fm.X, np.array([r.features for r in recs]))
    assert fm.labels[:2].tolist() == [0, 1] and np.isnan(fm.labels[2])
    assert not fm.has_labels
    with pytest.raises(ValidationError):
        fm.y
    assert fm.subset([0, 1]).y.tolist() == [0, 1]
    assert fm.words[6] == (1, 1)


def test_feature_csv_wrong_length(tmp_path):
    with pytest.raises(ValueError):
        write_feature_csv(tmp_path / "f.csv", [FeatureRecord("a", 0, np.zeros(5))], depth=2)


def test_validation_rules():
    good = book(5)
    good.validate()
    for change, msg in [(dict(label=3), "label"), (dict(bid=-good.bid), "bid"),
                        (dict(ask_volume=-good.ask_volume), "ask_volume"),
                        (dict(times=good.times[::-1]), "increasing"),
                        (dict(ask=np.r_[np.nan, good.ask[1:]]), "non-finite")]:
        with pytest.raises(ValidationError, match=msg):
            _clone(good, **change).validate()
