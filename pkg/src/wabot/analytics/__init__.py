"""Log metrics: sessionization, segmentation, usage, and feature impact."""

from wabot.analytics.reports import (
    followup_funnel,
    leaderboard_cohorts,
    topq_impact,
    usage_report,
)
from wabot.analytics.sessions import (
    GROUPS,
    Session,
    UnsortedInput,
    UserProfile,
    group_for_session_count,
    segment_users,
    sessionize,
)

__all__ = [
    "GROUPS",
    "Session",
    "UnsortedInput",
    "UserProfile",
    "followup_funnel",
    "group_for_session_count",
    "leaderboard_cohorts",
    "segment_users",
    "sessionize",
    "topq_impact",
    "usage_report",
]
