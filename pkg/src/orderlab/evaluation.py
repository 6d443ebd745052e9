"""Realism statistics for order streams and (reference, candidate) comparisons.

The five statistics: per-type price, quantity, and inter-arrival
distributions; order intensity over fixed time chunks; and the event-indexed
best bid/ask series. KS distance quantifies distribution differences; the
spectral density of the quote series quantifies their time variation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .order_model import OrderType, Stream

# Benchmark KS-against-real values reported for prior stream generators
# (Stock-GAN / VAE / DCGAN), embedded in reports for context.
REFERENCE_KS = {
    "synthetic": {
        "price": {"stock_gan": 0.108, "vae": 0.502, "dcgan": 0.284},
        "interarrival": {"stock_gan": 0.18, "vae": 0.756, "dcgan": 0.923},
    },
    "goog": {
        "price": {"stock_gan": 0.126, "vae": 0.218, "dcgan": 0.181},
        "quantity": {"stock_gan": 0.182, "vae": 0.248, "dcgan": 0.471},
        "interarrival": {"stock_gan": 0.066, "vae": 0.835, "dcgan": 0.154},
    },
}

FIELDS = ("price", "quantity", "interarrival")


@dataclass(frozen=True)
class Histogram:
    """Normalized counts over contiguous bins [edges[i], edges[i+1])."""

    edges: np.ndarray
    counts: np.ndarray
    tag: str
    field_name: str

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.counts) + 1:
            raise ValueError("edges must be one longer than counts")


@dataclass(frozen=True)
class IntensitySeries:
    """Per-chunk order counts divided by the total count."""

    chunk_s: float
    values: np.ndarray


@dataclass(frozen=True)
class QuoteSeries:
    """Event-indexed best bid and ask prices (ticks), one point per order."""

    bid: np.ndarray
    ask: np.ndarray


@dataclass(frozen=True)
class SpectralDensity:
    """Magnitudes of the non-negative-frequency DFT bins of a de-meaned series."""

    magnitudes: np.ndarray


def _samples(stream: Stream, field_name: str, otype: OrderType | None) -> np.ndarray:
    obs = stream.observations
    if otype is not None:
        obs = [o for o in obs if o.order.otype == otype]
    if field_name == "price":
        return np.array([o.order.price_ticks for o in obs], dtype=np.int64)
    if field_name == "quantity":
        return np.array([o.order.quantity for o in obs], dtype=np.int64)
    if field_name == "interarrival":
        return np.array([o.order.interarrival_ms for o in obs], dtype=np.int64)
    raise ValueError(f"unknown field {field_name!r}")


def _unit_histogram(samples: np.ndarray, tag: str, field_name: str) -> Histogram:
    lo, hi = int(samples.min()), int(samples.max())
    edges = np.arange(lo, hi + 2, dtype=np.int64)
    counts, _ = np.histogram(samples, bins=edges)
    return Histogram(edges=edges, counts=counts / counts.sum(), tag=tag, field_name=field_name)


def _log_histogram(samples: np.ndarray, tag: str, field_name: str) -> Histogram:
    # doubling bins [1,2), [2,4), ... spanning millisecond data, with a
    # leading [0,1) bin only when zero gaps occur
    hi = int(samples.max())
    edges = [1]
    while edges[-1] <= hi:
        edges.append(edges[-1] * 2)
    if int(samples.min()) == 0:
        edges = [0] + edges
    edges = np.array(edges, dtype=np.int64)
    counts, _ = np.histogram(samples, bins=edges)
    return Histogram(edges=edges, counts=counts / counts.sum(), tag=tag, field_name=field_name)


def stat_histograms(
    stream: Stream, log_interarrival: bool = True
) -> dict[str, dict[str, Histogram]]:
    """Per-order-type normalized histograms for price, quantity, inter-arrival.

    Types with no orders in the stream are omitted. Price and quantity use
    unit-width integer bins; inter-arrival defaults to doubling bins since
    millisecond gaps span several orders of magnitude.
    """
    if len(stream) == 0:
        raise ValueError("empty stream")
    out: dict[str, dict[str, Histogram]] = {}
    for otype in OrderType:
        tag = otype.name.lower()
        price = _samples(stream, "price", otype)
        if price.size == 0:
            continue
        qty = _samples(stream, "quantity", otype)
        inter = _samples(stream, "interarrival", otype)
        out[tag] = {
            "price": _unit_histogram(price, tag, "price"),
            "quantity": _unit_histogram(qty, tag, "quantity"),
            "interarrival": (_log_histogram if log_interarrival else _unit_histogram)(
                inter, tag, "interarrival"
            ),
        }
    return out


def intensity(stream: Stream, chunk_s: float) -> IntensitySeries:
    """Order counts per consecutive chunk_s-second chunk of the day, normalized."""
    if chunk_s <= 0:
        raise ValueError("chunk_s must be positive")
    if len(stream) == 0:
        raise ValueError("empty stream")
    cfg = stream.config
    chunk_ms = chunk_s * 1000.0
    n_chunks = int(np.ceil(cfg.day_span_ms / chunk_ms))
    times = np.array(stream.arrival_times_ms(), dtype=np.int64) - cfg.day_start_ms
    idx = np.minimum((times / chunk_ms).astype(np.int64), n_chunks - 1)
    counts = np.bincount(idx, minlength=n_chunks).astype(np.float64)
    return IntensitySeries(chunk_s=chunk_s, values=counts / counts.sum())


def ks_distance(samples_a, samples_b) -> float:
    """Two-sample Kolmogorov-Smirnov distance: sup |F_a - F_b|, in [0, 1]."""
    a = np.sort(np.asarray(samples_a, dtype=np.float64))
    b = np.sort(np.asarray(samples_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def quote_series(stream: Stream) -> QuoteSeries:
    """Best bid/ask price per observation. Absent sides carry sentinel prices."""
    if len(stream) == 0:
        raise ValueError("empty stream")
    bid = np.array([o.best_bid.price_ticks for o in stream.observations], dtype=np.int64)
    ask = np.array([o.best_ask.price_ticks for o in stream.observations], dtype=np.int64)
    return QuoteSeries(bid=bid, ask=ask)


def spectral_density(series) -> SpectralDensity:
    """Magnitude of each non-negative frequency component of the de-meaned series.

    Convention: unnormalized DFT (numpy rfft); output length floor(N/2)+1.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < 2:
        raise ValueError("series must have length >= 2")
    x = x - x.mean()
    return SpectralDensity(magnitudes=np.abs(np.fft.rfft(x)))


@dataclass(frozen=True)
class CompareConfig:
    intensity_chunk_s: float = 100.0
    log_interarrival: bool = True


@dataclass(frozen=True)
class EvalReport:
    """All five statistics plus KS distances for a (reference, candidate) pair."""

    histograms_ref: dict
    histograms_cand: dict
    ks: dict[str, float]
    intensity_ref: IntensitySeries
    intensity_cand: IntensitySeries
    quotes_ref: QuoteSeries
    quotes_cand: QuoteSeries
    spectral_ref: dict[str, SpectralDensity]
    spectral_cand: dict[str, SpectralDensity]
    metadata: dict = field(default_factory=dict)


def compare(
    reference: Stream,
    candidate: Stream,
    cfg: CompareConfig = CompareConfig(),
    out_dir: str | Path | None = None,
) -> EvalReport:
    """Assemble the full statistic suite for a stream pair.

    KS distances cover price/quantity/interarrival, pooled and per order
    type (keys "<field>" and "<field>/<type>"). With out_dir set, writes one
    plot-ready CSV per figure panel plus a JSON summary.
    """
    if len(reference) == 0 or len(candidate) == 0:
        raise ValueError("both streams must be non-empty")
    ks: dict[str, float] = {}
    for field_name in FIELDS:
        ks[field_name] = ks_distance(
            _samples(reference, field_name, None), _samples(candidate, field_name, None)
        )
        for otype in OrderType:
            ref_s = _samples(reference, field_name, otype)
            cand_s = _samples(candidate, field_name, otype)
            if ref_s.size and cand_s.size:
                ks[f"{field_name}/{otype.name.lower()}"] = ks_distance(ref_s, cand_s)

    q_ref, q_cand = quote_series(reference), quote_series(candidate)
    report = EvalReport(
        histograms_ref=stat_histograms(reference, cfg.log_interarrival),
        histograms_cand=stat_histograms(candidate, cfg.log_interarrival),
        ks=ks,
        intensity_ref=intensity(reference, cfg.intensity_chunk_s),
        intensity_cand=intensity(candidate, cfg.intensity_chunk_s),
        quotes_ref=q_ref,
        quotes_cand=q_cand,
        spectral_ref={"bid": spectral_density(q_ref.bid), "ask": spectral_density(q_ref.ask)},
        spectral_cand={"bid": spectral_density(q_cand.bid), "ask": spectral_density(q_cand.ask)},
        metadata={"reference_ks": REFERENCE_KS},
    )
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def _write_hist_panel(path: Path, ref: Histogram | None, cand: Histogram | None) -> None:
    lines = ["bin_lo,ref_mass,cand_mass"]
    bins: dict[int, list[float]] = {}
    for which, hist in ((0, ref), (1, cand)):
        if hist is None:
            continue
        for lo, mass in zip(hist.edges[:-1], hist.counts):
            bins.setdefault(int(lo), [0.0, 0.0])[which] = float(mass)
    for lo in sorted(bins):
        r, c = bins[lo]
        lines.append(f"{lo},{r!r},{c!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report(report: EvalReport, out_dir: str | Path) -> None:
    """One CSV per figure panel plus report.json with the KS summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tags = set(report.histograms_ref) | set(report.histograms_cand)
    for tag in sorted(tags):
        for field_name in FIELDS:
            ref = report.histograms_ref.get(tag, {}).get(field_name)
            cand = report.histograms_cand.get(tag, {}).get(field_name)
            _write_hist_panel(out / f"{field_name}_hist_{tag}.csv", ref, cand)

    lines = ["chunk,ref,cand"]
    ref_v, cand_v = report.intensity_ref.values, report.intensity_cand.values
    for i in range(max(len(ref_v), len(cand_v))):
        r = repr(float(ref_v[i])) if i < len(ref_v) else ""
        c = repr(float(cand_v[i])) if i < len(cand_v) else ""
        lines.append(f"{i},{r},{c}")
    (out / "intensity.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for name, quotes in (("ref", report.quotes_ref), ("cand", report.quotes_cand)):
        lines = ["seq,bid_px,ask_px"]
        for i, (b, a) in enumerate(zip(quotes.bid, quotes.ask)):
            lines.append(f"{i},{b},{a}")
        (out / f"quotes_{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for side in ("bid", "ask"):
        lines = ["freq_bin,ref_mag,cand_mag"]
        ref_m = report.spectral_ref[side].magnitudes
        cand_m = report.spectral_cand[side].magnitudes
        for i in range(max(len(ref_m), len(cand_m))):
            r = repr(float(ref_m[i])) if i < len(ref_m) else ""
            c = repr(float(cand_m[i])) if i < len(cand_m) else ""
            lines.append(f"{i},{r},{c}")
        (out / f"spectral_{side}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    summary = {"ks": report.ks, "metadata": report.metadata}
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def evaluate_single(stream: Stream, cfg: CompareConfig = CompareConfig(), out_dir: str | Path | None = None) -> dict:
    """Single-stream statistics (no comparison): histograms, intensity, quotes, spectra."""
    hists = stat_histograms(stream, cfg.log_interarrival)
    inten = intensity(stream, cfg.intensity_chunk_s)
    quotes = quote_series(stream)
    spectra = (
        {"bid": spectral_density(quotes.bid), "ask": spectral_density(quotes.ask)}
        if len(stream) >= 2
        else {}
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for tag, fields in hists.items():
            for field_name, hist in fields.items():
                _write_hist_panel(out / f"{field_name}_hist_{tag}.csv", hist, None)
        lines = ["chunk,value"]
        lines += [f"{i},{float(v)!r}" for i, v in enumerate(inten.values)]
        (out / "intensity.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        lines = ["seq,bid_px,ask_px"]
        lines += [f"{i},{b},{a}" for i, (b, a) in enumerate(zip(quotes.bid, quotes.ask))]
        (out / "quotes.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        for side, density in spectra.items():
            lines = ["freq_bin,mag"]
            lines += [f"{i},{float(m)!r}" for i, m in enumerate(density.magnitudes)]
            (out / f"spectral_{side}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"histograms": hists, "intensity": inten, "quotes": quotes, "spectral": spectra}
