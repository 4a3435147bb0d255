# Splitting the exponent range over workers, and resuming from a checkpoint
# (worker processes are spawned, so the script body sits under a __main__ guard)
import tempfile
from pathlib import Path

from threehalves import RunConfig, partition, resume, run, run_segment
from threehalves.checkpoint import Checkpoint


class Stop(Exception):
    pass


def stop_midway(ck):
    if ck.exponent > 12_000:
        raise Stop


if __name__ == "__main__":
    n = 30_000
    print("plain split:   ", partition(n, 4))
    print("balanced split:", partition(n, 4, balanced=True))  # later terms cost more

    single = run(RunConfig(n_total=n, k=10))
    multi = run(RunConfig(n_total=n, k=10, workers=4, balanced=True))
    print("histograms equal:", single.histogram == multi.histogram)
    print("extremes:", multi.extremes)

    # interrupt a segment part way, then pick it up again
    tmp = Path(tempfile.mkdtemp())
    cfg = RunConfig(n_total=n, k=10, checkpoint_interval=5_000)
    try:
        run_segment(cfg, 1, n + 1, tmp / "seg.ckpt", on_checkpoint=stop_midway)
    except Stop:
        ck = Checkpoint.load(tmp / "seg.ckpt")
        print("stopped at exponent", ck.exponent, "with", ck.histogram.total, "terms binned")

    done = resume(tmp / "seg.ckpt", cfg)
    print("resumed equals straight run:", done.histogram == single.histogram)
    print("checkpoint size:", (tmp / "seg.ckpt").stat().st_size, "bytes")
