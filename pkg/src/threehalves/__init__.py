"""Exact generation and uniformity testing of the fractional parts of (3/2)^n."""

from .histogram import Histogram, merge
from .limb_core import LimbValue, add, bit, extract_bits, mul, shift_left_1
from .orchestrator import RunConfig, analyze, partition, resume, run, run_segment, seed
from .power_stream import (
    ExtremesRecord,
    PowerState,
    WaringCandidate,
    bin_index,
    frac_prefix64,
    new_stream,
    step,
    update_extremes,
    waring_screen,
)
from .stats import (
    bayes_asymptotic_lower_bound,
    bayes_finite_lower_bound,
    chi_square_pvalue,
    chi_square_stat,
    posterior_lower_bound,
)

__version__ = "0.1.0"
