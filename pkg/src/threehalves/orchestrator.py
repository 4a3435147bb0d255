"""Split the exponent range over workers, run, checkpoint, merge, analyze.

Exponents are binned starting at 1, so a run of ``n`` iterations covers
``[1, n + 1)``. Each worker seeds its own stream with 3^j_start and owns
its histogram and monitors; merging happens after all workers return.
"""

from __future__ import annotations

import json
import logging
import math
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .checkpoint import Checkpoint, CheckpointError
from .histogram import MAX_HIST_BITS, Histogram, merge_all
from .limb_core import LimbValue, mul
from .power_stream import ExtremesRecord, PowerState, WaringCandidate, sweep
from .stats import DEFAULT_PSI0, analysis_dict, bayes_test, chi_square_test

log = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_INTERVAL = 10**6
REFERENCE_QUADRATIC_COEFFICIENT = 2.378e-10  # seconds per iteration^2


@dataclass
class RunConfig:
    n_total: int
    k: int
    workers: int = 1
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL
    psi0: float = DEFAULT_PSI0
    out_dir: Optional[Path] = None
    checkpoint_dir: Optional[Path] = None
    balanced: bool = False
    finite_bound: bool = True

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("n_total must be >= 1")
        if not 1 <= self.k <= MAX_HIST_BITS:
            raise ValueError(f"k must be in 1..{MAX_HIST_BITS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")
        if not 0.0 < self.psi0 < 1.0:
            raise ValueError("psi0 must lie in (0, 1)")


@dataclass
class SegmentResult:
    histogram: Histogram
    extremes: ExtremesRecord = field(default_factory=ExtremesRecord)
    candidates: list[WaringCandidate] = field(default_factory=list)


@dataclass
class RunResult:
    histogram: Histogram
    extremes: ExtremesRecord
    candidates: list[WaringCandidate]
    segments: list[tuple[int, int]]
    elapsed: float


def seed(j: int) -> PowerState:
    """Stream state at 3^j, computed by square-and-multiply."""
    if j < 1:
        raise ValueError("j must be >= 1")
    result = LimbValue.from_int(1)
    base = LimbValue.from_int(3)
    e = j
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return PowerState(result, j)


def partition(n_total: int, workers: int, balanced: bool = False) -> list[tuple[int, int]]:
    """Contiguous segments covering exponents ``[1, n_total + 1)``.

    Step j costs O(j) limb operations, so ``balanced`` places cut points
    where the cumulative work ``j^2 / 2`` is split evenly; otherwise the
    segments have equal length.
    """
    end = n_total + 1
    workers = min(workers, n_total)
    if balanced:
        cuts = [1 + round(n_total * math.sqrt(i / workers)) for i in range(workers + 1)]
    else:
        cuts = [1 + (n_total * i) // workers for i in range(workers + 1)]
    cuts[0], cuts[-1] = 1, end
    cuts = sorted(set(cuts))
    segs = list(zip(cuts[:-1], cuts[1:]))
    check_coverage(segs, n_total)
    return segs


def check_coverage(segs: list[tuple[int, int]], n_total: int) -> None:
    pos = 1
    for a, b in segs:
        if a != pos or b <= a:
            raise ValueError(f"segments do not tile [1, {n_total + 1}): {segs}")
        pos = b
    if pos != n_total + 1:
        raise ValueError(f"segments do not tile [1, {n_total + 1}): {segs}")


def segment_path(checkpoint_dir, j_start: int, j_end: int) -> Path:
    return Path(checkpoint_dir) / f"segment_{j_start:012d}_{j_end:012d}.ckpt"


def _continue(
    ckpt: Checkpoint,
    checkpoint_interval: int,
    path: Optional[Path],
    on_checkpoint: Optional[Callable[[Checkpoint], None]],
) -> SegmentResult:
    state = ckpt.state()
    state.reserve(ckpt.j_end)
    hist = ckpt.histogram.copy()
    extremes = ckpt.extremes
    cands = list(ckpt.candidates)
    while state.exponent < ckpt.j_end:
        stop = min(ckpt.j_end, state.exponent + checkpoint_interval)
        extremes = sweep(state, stop, ckpt.k, hist.counts, extremes, cands)
        hist.j_end = stop
        if path is not None or on_checkpoint is not None:
            snap = Checkpoint(ckpt.k, state.exponent, ckpt.j_end, state.value, hist.copy(), extremes, list(cands))
            if path is not None:
                snap.save(path)
            if on_checkpoint is not None:
                on_checkpoint(snap)
    return SegmentResult(hist, extremes, cands)


def run_segment(
    cfg: RunConfig,
    j_start: int,
    j_end: int,
    checkpoint_path=None,
    on_checkpoint: Optional[Callable[[Checkpoint], None]] = None,
) -> SegmentResult:
    """Bin exponents ``[j_start, j_end)``, starting from a freshly seeded 3^j_start.

    A checkpoint is written every ``cfg.checkpoint_interval`` iterations
    when ``checkpoint_path`` is given; ``on_checkpoint`` sees each one.
    """
    if not 1 <= j_start < j_end:
        raise ValueError("need 1 <= j_start < j_end")
    st = seed(j_start)
    start = Checkpoint(cfg.k, j_start, j_end, st.value, Histogram.empty(cfg.k, j_start))
    path = Path(checkpoint_path) if checkpoint_path is not None else None
    return _continue(start, cfg.checkpoint_interval, path, on_checkpoint)


def resume(
    checkpoint_path,
    cfg: Optional[RunConfig] = None,
    on_checkpoint: Optional[Callable[[Checkpoint], None]] = None,
) -> SegmentResult:
    """Finish the segment stored in ``checkpoint_path``, updating it as it goes."""
    ckpt = Checkpoint.load(checkpoint_path)
    if cfg is not None and cfg.k != ckpt.k:
        raise CheckpointError(f"checkpoint has k={ckpt.k} but the run is configured with k={cfg.k}")
    interval = cfg.checkpoint_interval if cfg is not None else DEFAULT_CHECKPOINT_INTERVAL
    return _continue(ckpt, interval, Path(checkpoint_path), on_checkpoint)


def _segment_task(cfg: RunConfig, j_start: int, j_end: int) -> SegmentResult:
    path = None
    if cfg.checkpoint_dir is not None:
        path = segment_path(cfg.checkpoint_dir, j_start, j_end)
    return run_segment(cfg, j_start, j_end, path)


def merge_results(results: list[SegmentResult]) -> SegmentResult:
    hist = merge_all([r.histogram for r in results])
    ext = ExtremesRecord()
    cands: list[WaringCandidate] = []
    for r in results:
        ext = ext.merge(r.extremes)
        cands.extend(r.candidates)
    cands.sort(key=lambda c: c.exponent)
    return SegmentResult(hist, ext, cands)


def run(cfg: RunConfig) -> RunResult:
    """Run the whole experiment and merge the per-worker results."""
    segs = partition(cfg.n_total, cfg.workers, cfg.balanced)
    if cfg.checkpoint_dir is not None:
        Path(cfg.checkpoint_dir).mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if len(segs) == 1:
        results = [_segment_task(cfg, *segs[0])]
    else:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=len(segs), mp_context=ctx) as pool:
            futures = [pool.submit(_segment_task, cfg, a, b) for a, b in segs]
            results = [f.result() for f in futures]
    elapsed = time.perf_counter() - t0
    merged = merge_results(results)
    log.info("binned %d exponents in %.3f s over %d segment(s)", merged.histogram.total, elapsed, len(segs))
    return RunResult(merged.histogram, merged.extremes, merged.candidates, segs, elapsed)


def analyze(
    h: Histogram, psi0: float = DEFAULT_PSI0, finite: bool = True, bound: str = "asymptotic"
) -> dict:
    """Chi-square test plus Bayes factor bounds, as a JSON-ready dict."""
    chi = chi_square_test(h)
    bayes = bayes_test(h, psi0, finite=finite, bound=bound, tau=chi.tau)
    return analysis_dict(h, chi, bayes)


def monitors_dict(extremes: ExtremesRecord, candidates: list[WaringCandidate]) -> dict:
    return {
        "min_prefix": extremes.min_prefix,
        "max_prefix": extremes.max_prefix,
        "argmin_j": extremes.argmin_j,
        "argmax_j": extremes.argmax_j,
        "gap": extremes.gap / 2.0**64,
        "waring_candidates": [
            {"j": c.exponent, "side": c.side.name.lower(), "leading_run": c.leading_run,
             "confirmed": c.confirmed.name.lower()}
            for c in candidates
        ],
    }


def runtime_dict(n: int, elapsed: float, workers: int) -> dict:
    return {
        "n": n,
        "workers": workers,
        "elapsed_seconds": elapsed,
        "quadratic_coefficient": elapsed / (n * n),
        "reference_quadratic_coefficient": REFERENCE_QUADRATIC_COEFFICIENT,
        "reference_seconds": REFERENCE_QUADRATIC_COEFFICIENT * n * n,
    }


def write_outputs(out_dir, h: Histogram, analysis: dict, extra: Optional[dict] = None) -> None:
    """histogram.csv, histogram.json, analysis.json and any ``extra`` JSON files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "histogram.csv").write_text(h.to_csv())
    (out / "histogram.json").write_text(h.to_json())
    (out / "analysis.json").write_text(json.dumps(analysis, indent=2, sort_keys=True) + "\n")
    for name, payload in (extra or {}).items():
        (out / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_histogram(path) -> Histogram:
    """Read a histogram from a checkpoint, histogram JSON or histogram CSV file."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == b"PW32":
        return Checkpoint.from_bytes(data).histogram
    text = data.decode()
    if path.suffix == ".csv" or text.startswith("bin_index"):
        return Histogram.from_csv(text)
    return Histogram.from_json(text)


def default_out_dir() -> Path:
    return Path(os.environ.get("THREEHALVES_OUT", "threehalves_out"))
