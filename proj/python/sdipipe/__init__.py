"""Mobility metrics, social distancing index, and phase detection.

The heavy lifting lives in the C++ core; this package re-exports the
bound operations.
"""

from ._core import (  # noqa: F401
    __version__,
    haversine_distance,
    point_in_polygon,
    locate_zone,
    segment_trips,
    sdi_score,
    moving_average,
    roc,
    detect_phases,
    week_compare,
    welch_t_test,
    t_cdf,
    regularized_incomplete_beta,
    run_stage,
)

__all__ = [
    "__version__",
    "haversine_distance",
    "point_in_polygon",
    "locate_zone",
    "segment_trips",
    "sdi_score",
    "moving_average",
    "roc",
    "detect_phases",
    "week_compare",
    "welch_t_test",
    "t_cdf",
    "regularized_incomplete_beta",
    "run_stage",
]
