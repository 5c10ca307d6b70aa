"""Decomposition of family interaction rates into availability and propensity.

Survey respondents report whether they spent an activity-day with
non-coresident local family (``a``) and, separately, how many relatives
live nearby. The interaction rate of a city factorises as ``f = lambda * phi``
with ``phi`` the share of people with at least ``k`` relatives nearby and
``lambda`` the effective propensity to meet them. The package provides the
generative model and a synthetic survey oracle, the city-level estimators,
weight calibration by raking, three trend methods (WLS, smoothing splines,
KDE modal regression) and data-quality diagnostics.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ALPHA_CARE,
    ALPHA_O,
    ALPHA_SOCIAL,
    DEFAULT_CATALOG,
    ActivityCatalog,
    ActivityDay,
    Location,
    Respondent,
    Stratum,
)

__all__ = [
    "ALPHA_CARE",
    "ALPHA_O",
    "ALPHA_SOCIAL",
    "DEFAULT_CATALOG",
    "ActivityCatalog",
    "ActivityDay",
    "Location",
    "Respondent",
    "Stratum",
    "__version__",
]
