"""Level-one order-book streams to signature feature vectors.

Pipeline per stream::

    OrderBookStream --normalize--> NormalizedStream (u, p, s, d, c)
        --assemble_input--> 6-dim lead-lag Stream (u, p, s, d, c, p_lag)
        --featurize--> FeatureRecord (depth-4 signature without its constant)

File formats
------------
Raw stream CSV, header::

    stream_id,timestamp,best_ask,best_bid,ask_volume,bid_volume,cum_volume[,label]

The trailing ``label`` column is optional (0, 1 or empty).

Feature CSV: ``stream_id,label,sig_1,...`` with one column per word in
canonical order, words rendered with dots (``sig_1.5.1.5``).
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBucketError, InvalidStreamError, ParseError, ValidationError
from .lead_lag import partial_lead_lag
from .signature import Stream, batch_signature, stream_signature
from .tensor_algebra import AlgebraParams, format_multi_index, multi_indices, parse_multi_index

logger = logging.getLogger(__name__)

__all__ = [
    "RAW_COLUMNS",
    "INPUT_CHANNELS",
    "OrderBookStream",
    "NormalizedStream",
    "FeatureRecord",
    "FeatureMatrix",
    "parse_order_book_csv",
    "write_order_book_csv",
    "normalize",
    "assemble_input",
    "featurize",
    "featurize_streams",
    "slice_bucket",
    "feature_names",
    "write_feature_csv",
    "read_feature_csv",
]

RAW_COLUMNS = (
    "stream_id",
    "timestamp",
    "best_ask",
    "best_bid",
    "ask_volume",
    "bid_volume",
    "cum_volume",
)
#: Channel names of the assembled input stream, in signature index order 1..6.
INPUT_CHANNELS = ("u", "p", "s", "d", "c", "p_lag")
PRICE_CHANNEL = 2
MIN_ROWS = 3
DEGENERATE_STD = 1e-12


@dataclass(eq=False)
class OrderBookStream:
    """One stream of level-one snapshots, columns as numpy arrays."""

    id: str
    times: np.ndarray
    ask: np.ndarray
    bid: np.ndarray
    ask_volume: np.ndarray
    bid_volume: np.ndarray
    cum_volume: np.ndarray
    label: int | None = None

    def __post_init__(self):
        for name in ("times", "ask", "bid", "ask_volume", "bid_volume", "cum_volume"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))

    def __len__(self):
        return self.times.shape[0]

    def validate(self, lines=None) -> "OrderBookStream":
        """Raise :class:`ValidationError` unless the stream is well formed.

        ``lines`` optionally maps rows to source line numbers for messages.
        """

        def where(k):
            return f" (line {lines[k]})" if lines is not None else f" (row {k})"

        n = len(self)
        if any(a.shape != (n,) for a in (self.ask, self.bid, self.ask_volume, self.bid_volume, self.cum_volume)):
            raise ValidationError(f"stream {self.id!r}: columns have unequal lengths")
        if n < MIN_ROWS:
            raise ValidationError(f"stream {self.id!r}: {n} rows, need at least {MIN_ROWS}")
        for name in ("times", "ask", "bid", "ask_volume", "bid_volume", "cum_volume"):
            bad = np.flatnonzero(~np.isfinite(getattr(self, name)))
            if bad.size:
                raise ValidationError(f"stream {self.id!r}: non-finite {name}{where(bad[0])}")
        bad = np.flatnonzero(np.diff(self.times) <= 0)
        if bad.size:
            raise ValidationError(f"stream {self.id!r}: timestamps not increasing{where(bad[0] + 1)}")
        bad = np.flatnonzero(self.ask < self.bid)
        if bad.size:
            raise ValidationError(f"stream {self.id!r}: crossed book, ask < bid{where(bad[0])}")
        bad = np.flatnonzero(self.bid <= 0)
        if bad.size:
            raise ValidationError(f"stream {self.id!r}: non-positive bid price{where(bad[0])}")
        for name in ("ask_volume", "bid_volume", "cum_volume"):
            bad = np.flatnonzero(getattr(self, name) < 0)
            if bad.size:
                raise ValidationError(f"stream {self.id!r}: negative {name}{where(bad[0])}")
        bad = np.flatnonzero(np.diff(self.cum_volume) < 0)
        if bad.size:
            raise ValidationError(f"stream {self.id!r}: cumulative volume decreases{where(bad[0] + 1)}")
        if self.label not in (None, 0, 1):
            raise ValidationError(f"stream {self.id!r}: label must be 0, 1 or empty, got {self.label!r}")
        return self


@dataclass(eq=False)
class NormalizedStream:
    """Normalised channels of one stream plus degenerate-channel flags."""

    id: str
    u: np.ndarray
    p: np.ndarray
    s: np.ndarray
    d: np.ndarray
    c: np.ndarray
    label: int | None = None
    flags: dict = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        """Points of the 5-channel stream ``(u, p, s, d, c)``."""
        return np.column_stack([self.u, self.p, self.s, self.d, self.c])


@dataclass(eq=False)
class FeatureRecord:
    stream_id: str
    label: int | None
    features: np.ndarray


@dataclass(eq=False)
class FeatureMatrix:
    """Design matrix read from a feature CSV.

    ``labels`` is a float array with NaN where the label is unknown.
    """

    ids: list
    labels: np.ndarray
    X: np.ndarray
    names: list

    @property
    def words(self) -> list:
        return [parse_multi_index(n[len("sig_"):]) for n in self.names]

    @property
    def has_labels(self) -> bool:
        return bool(self.labels.size) and not np.isnan(self.labels).any()

    @property
    def y(self) -> np.ndarray:
        if not self.has_labels:
            raise ValidationError("feature matrix has rows without a label")
        return self.labels.astype(int)

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=int)
        return FeatureMatrix([self.ids[i] for i in idx], self.labels[idx], self.X[idx], self.names)


# ---------------------------------------------------------------------------
# Raw CSV


def _parse_label(text: str, line: int):
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"bad label {text!r}", line) from None
    if value not in (0.0, 1.0):
        raise ParseError(f"label must be 0 or 1, got {text!r}", line)
    return int(value)


def parse_order_book_csv(path, schema=None, errors: str = "raise") -> list:
    """Read a raw stream CSV into validated :class:`OrderBookStream` objects.

    Rows are grouped by ``stream_id`` (in order of first appearance), sorted
    by timestamp, and rows sharing a timestamp collapse to the last one.
    ``schema`` optionally maps canonical column names to the file's header
    names. With ``errors="skip"`` invalid streams are logged and dropped
    instead of raising; malformed rows always raise :class:`ParseError`.
    """
    if errors not in ("raise", "skip"):
        raise ValueError("errors must be 'raise' or 'skip'")
    schema = dict(schema or {})
    wanted = [schema.get(c, c) for c in RAW_COLUMNS]
    label_col = schema.get("label", "label")
    groups: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        missing = [w for w in wanted if w not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", 1)
        pos = [header.index(w) for w in wanted]
        label_pos = header.index(label_col) if label_col in header else None
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            sid = row[pos[0]].strip()
            if not sid:
                raise ParseError("empty stream_id", line)
            try:
                values = [float(row[p]) for p in pos[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
            label = _parse_label(row[label_pos], line) if label_pos is not None else None
            groups.setdefault(sid, []).append((values, label, line))

    streams = []
    for sid, rows in groups.items():
        labels = {lab for _, lab, _ in rows}
        try:
            if len(labels) > 1:
                raise ValidationError(f"stream {sid!r}: inconsistent labels {sorted(labels, key=str)}")
            # stable sort keeps file order among equal timestamps; keep the last
            rows = sorted(rows, key=lambda r: r[0][0])
            dedup = []
            for r in rows:
                if dedup and dedup[-1][0][0] == r[0][0]:
                    dedup[-1] = r
                else:
                    dedup.append(r)
            arr = np.array([r[0] for r in dedup])
            s = OrderBookStream(sid, *arr.T, label=labels.pop())
            s.validate(lines=[r[2] for r in dedup])
        except ValidationError as exc:
            if errors == "raise":
                raise
            logger.warning("skipping %s", exc)
            continue
        streams.append(s)
    return streams


def _fmt(x) -> str:
    return repr(float(x))


def write_order_book_csv(path, streams) -> None:
    """Write streams in the raw CSV format (label column included if any stream has one)."""
    with_label = any(s.label is not None for s in streams)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS + (("label",) if with_label else ()))
        for s in streams:
            tail = ("" if s.label is None else str(s.label),) if with_label else ()
            for k in range(len(s)):
                w.writerow(
                    (s.id, _fmt(s.times[k]), _fmt(s.ask[k]), _fmt(s.bid[k]),
                     _fmt(s.ask_volume[k]), _fmt(s.bid_volume[k]), _fmt(s.cum_volume[k])) + tail
                )


# ---------------------------------------------------------------------------
# Normalisation and input assembly


def _scaled(x: np.ndarray, spread_of: np.ndarray):
    # population standard deviation; degenerate channels are zero-filled
    sd = float(np.std(spread_of))
    if not sd >= DEGENERATE_STD:
        return np.zeros_like(x), True
    return x / sd, False


def normalize(s: OrderBookStream) -> NormalizedStream:
    """Normalised time, log-mid, spread, imbalance and cumulative volume.

    * ``u = (t - t0) / (tN - t0)``
    * ``p = log((ask + bid) / 2) / StDev(diff(log mid))``
    * ``s = (ask - bid) / StDev(ask - bid)``
    * ``d = (Va - Vb) / (Va + Vb)``, 0 where both volumes are 0
    * ``c = C / C_N``

    Standard deviations are population ones. A channel whose dispersion is
    below ``1e-12`` (or ``C_N == 0`` for ``c``) is zero-filled and flagged.
    """
    t = s.times
    span = t[-1] - t[0]
    if not span > 0:
        raise InvalidStreamError(f"stream {s.id!r}: zero time span")
    u = (t - t[0]) / span

    log_mid = np.log(0.5 * (s.ask + s.bid))
    p, price_flag = _scaled(log_mid, np.diff(log_mid))
    spread = s.ask - s.bid
    sp, spread_flag = _scaled(spread, spread)

    tot = s.ask_volume + s.bid_volume
    d = np.divide(s.ask_volume - s.bid_volume, tot, out=np.zeros_like(tot), where=tot > 0)

    last = s.cum_volume[-1]
    if last > 0:
        c, volume_flag = s.cum_volume / last, False
    else:
        c, volume_flag = np.zeros_like(s.cum_volume), True

    flags = {"price": price_flag, "spread": spread_flag, "volume": volume_flag}
    if any(flags.values()):
        logger.debug("stream %s: degenerate channels %s", s.id, [k for k, v in flags.items() if v])
    return NormalizedStream(s.id, u, p, sp, d, c, label=s.label, flags=flags)


def assemble_input(n: NormalizedStream) -> Stream:
    """Lead transform of ``(u, p, s, d, c)`` paired with the lag transform of ``p``."""
    return partial_lead_lag(Stream(n.as_array()), (PRICE_CHANNEL,))


def featurize(z, depth: int = 4, stream_id: str = "", label=None) -> FeatureRecord:
    """Signature of an assembled input stream, constant term dropped."""
    sig = stream_signature(z, depth)
    return FeatureRecord(stream_id, label, np.array(sig.features()))


def _featurize_chunk(args):
    arrays, depth = args
    return batch_signature(np.stack(arrays), depth)[:, 1:]


def featurize_streams(streams, depth: int = 4, workers: int = 1, chunk_size: int = 128) -> list:
    """Normalise, assemble and sign many order-book streams.

    Streams with the same number of rows are signed together in chunks of
    ``chunk_size``; ``workers > 1`` spreads chunks over processes. Output
    order follows the input order and does not depend on ``workers``.
    """
    streams = list(streams)
    inputs = [assemble_input(normalize(s)).points for s in streams]
    by_len: dict = {}
    for k, pts in enumerate(inputs):
        by_len.setdefault(pts.shape, []).append(k)
    jobs, owners = [], []
    for shape in by_len:
        ks = by_len[shape]
        for start in range(0, len(ks), chunk_size):
            part = ks[start:start + chunk_size]
            jobs.append(([inputs[k] for k in part], depth))
            owners.append(part)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_featurize_chunk, jobs))
    else:
        results = [_featurize_chunk(j) for j in jobs]
    feats = [None] * len(streams)
    for part, block in zip(owners, results):
        for k, row in zip(part, block):
            feats[k] = row
    return [FeatureRecord(s.id, s.label, f) for s, f in zip(streams, feats)]


def slice_bucket(s: OrderBookStream, t_start: float, t_end: float) -> OrderBookStream:
    """Rows with ``t_start <= t <= t_end`` as a new stream ``<id>@<start>-<end>``."""
    if not t_start < t_end:
        raise ValueError(f"empty window [{t_start}, {t_end}]")
    keep = (s.times >= t_start) & (s.times <= t_end)
    bucket_id = f"{s.id}@{t_start:g}-{t_end:g}"
    if keep.sum() < MIN_ROWS:
        raise EmptyBucketError(f"bucket {bucket_id!r} has {int(keep.sum())} rows, need {MIN_ROWS}")
    return OrderBookStream(
        bucket_id, s.times[keep], s.ask[keep], s.bid[keep], s.ask_volume[keep],
        s.bid_volume[keep], s.cum_volume[keep], label=s.label,
    )


# ---------------------------------------------------------------------------
# Feature CSV


def feature_names(width: int = len(INPUT_CHANNELS), depth: int = 4) -> list:
    words = multi_indices(AlgebraParams(width, depth), include_empty=False)
    return ["sig_" + format_multi_index(w) for w in words]


def write_feature_csv(path, records, width: int = len(INPUT_CHANNELS), depth: int = 4) -> None:
    names = feature_names(width, depth)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stream_id", "label"] + names)
        for r in records:
            if len(r.features) != len(names):
                raise ValueError(f"record {r.stream_id!r} has {len(r.features)} features, expected {len(names)}")
            w.writerow([r.stream_id, "" if r.label is None else str(r.label)] + [_fmt(x) for x in r.features])


def read_feature_csv(path) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if header[:2] != ["stream_id", "label"] or not all(h.startswith("sig_") for h in header[2:]):
            raise ParseError("expected header stream_id,label,sig_...", 1)
        ids, labels, rows = [], [], []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            ids.append(row[0])
            lab = _parse_label(row[1], line)
            labels.append(math.nan if lab is None else float(lab))
            try:
                rows.append([float(x) for x in row[2:]])
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
    X = np.array(rows, dtype=float).reshape(len(rows), len(header) - 2)
    return FeatureMatrix(ids, np.array(labels, dtype=float), X, header[2:])
