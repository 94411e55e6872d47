"""celldiv: simulation of random cell-division tessellations.

The package simulates tessellation-valued Markov processes in which every
cell lives an exponential time governed by a size functional and is then
split by a random hyperplane, covering the classical hitting-measure model
and its Mondrian variants where the rate is a power of an intrinsic volume.
Alongside the event-driven simulator it ships the backward zero-cell chain
of the driving Poisson hyperplane process, a window cut-out construction,
the equivalent mass-fragmentation chain, and a statistics harness that
turns the model's distributional laws into pass/fail checks.
"""

from .geometry import (
    Atoms2D,
    Box,
    ConstantRule,
    ConvexPolygon2,
    GeometryError,
    IntrinsicVolumeRule,
    LambdaRule,
    Mondrian,
    SplitRejected,
    SumOfSidesRule,
    intrinsic_volume,
    lambda_hit_rate,
    lifetime_rate,
    sample_dividing_hyperplane,
    split_cell,
)
from .hyperplanes import (
    build_zero_cell_chain,
    explosion_diagnostic,
    sample_axis_chain,
    sample_marked_hyperplanes,
)
from .division import (
    Cell,
    CutoutResult,
    EventLog,
    TessellationSnapshot,
    cutout_construction,
    run_in_window,
    sample_poisson_zero_cell,
    snapshot_at,
    stit_reference_run,
    zero_cell_at_time,
)
from .fragmentation import (
    FragEvent,
    MassPartition,
    equivalence_check,
    frag_step,
    mass_chain_from_log,
    run_fragmentation,
)
from .stats import (
    GoFResult,
    SampleSummary,
    cv_report,
    ks_test,
    poisson_count_test,
    scaling_check,
    typical_cell_samples,
)
from .render import SvgStyle, render_svg
from .streams import replicate_stream, stream

__version__ = "0.1.0"
