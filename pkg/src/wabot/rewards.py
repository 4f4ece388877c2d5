"""Points ledger, My Points summary, and the dual-window top-10 leaderboard."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta

from wabot.countries import calling_code_of, digits_of, flag

EARNING_ACTIONS = ("freeform_query", "trending_select", "recent_select", "followup_select")

TOP_N = 10
DAILY_WINDOW = timedelta(hours=24)
MASK_DOTS = "•" * 5


class NotEarningAction(Exception):
    pass


@dataclass(frozen=True)
class LedgerEntry:
    user_code: str
    at: datetime
    action_kind: str
    points: int


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int
    user_code: str
    country: str
    display: str
    points: int
    is_viewer: bool = False


@dataclass(frozen=True)
class LeaderboardView:
    daily: tuple[LeaderboardRow, ...]
    alltime: tuple[LeaderboardRow, ...]
    viewer_daily_rank: int | None = None
    viewer_alltime_rank: int | None = None


@dataclass(frozen=True)
class PointsSummary:
    total: int
    rank: int
    breakdown: dict[str, int]


def mask_address(address: str) -> str:
    """Partially anonymize a phone number: country prefix + last four digits.

    Non-phone addresses (sandbox personas) are shown unchanged.
    """
    number = digits_of(address)
    if len(number) < 7:
        return address
    cc = calling_code_of(address)
    return f"+{cc}{MASK_DOTS}{number[-4:]}"


@dataclass
class _UserInfo:
    address: str
    country: str


class RewardsService:
    """Append-only ledger with configured point values per earning action."""

    def __init__(self, points: dict[str, int] | None = None) -> None:
        self.points = dict(points) if points else {k: 1 for k in EARNING_ACTIONS}
        self.ledger: list[LedgerEntry] = []
        self._users: dict[str, _UserInfo] = {}
        self._first_entry_at: dict[str, datetime] = {}

    def ensure_user(self, user_code: str, address: str, country: str) -> None:
        self._users.setdefault(user_code, _UserInfo(address=address, country=country))

    def award(self, user_code: str, action_kind: str, at: datetime) -> LedgerEntry:
        """Append one ledger entry for a point-earning action."""
        if action_kind not in EARNING_ACTIONS:
            raise NotEarningAction(action_kind)
        entry = LedgerEntry(
            user_code=user_code,
            at=at,
            action_kind=action_kind,
            points=self.points.get(action_kind, 1),
        )
        self.ledger.append(entry)
        self._first_entry_at.setdefault(user_code, at)
        return entry

    # -- queries -------------------------------------------------------------

    def _totals(self, start: datetime | None = None, end: datetime | None = None) -> dict[str, int]:
        totals: dict[str, int] = {}
        for entry in self.ledger:
            if start is not None and entry.at < start:
                continue
            if end is not None and entry.at > end:
                continue
            totals[entry.user_code] = totals.get(entry.user_code, 0) + entry.points
        return totals

    def my_points(self, user_code: str, now: datetime) -> PointsSummary:
        """Total points, dense all-time rank, and per-action breakdown."""
        totals = self._totals()
        total = totals.get(user_code, 0)
        distinct = sorted(set(totals.values()), reverse=True)
        if total in distinct:
            rank = distinct.index(total) + 1
        else:
            rank = len(distinct) + 1  # zero-activity users share the band below everyone
        breakdown: dict[str, int] = {}
        for entry in self.ledger:
            if entry.user_code == user_code:
                breakdown[entry.action_kind] = breakdown.get(entry.action_kind, 0) + entry.points
        return PointsSummary(total=total, rank=rank, breakdown=breakdown)

    def _ranked(
        self, start: datetime | None, end: datetime, viewer: str | None
    ) -> tuple[tuple[LeaderboardRow, ...], int | None]:
        totals = self._totals(start=start, end=end)
        first_at: dict[str, datetime] = {}
        for entry in self.ledger:
            if start is not None and entry.at < start:
                continue
            if entry.at > end:
                continue
            if entry.user_code not in first_at:
                first_at[entry.user_code] = entry.at
        ordered = sorted(
            totals.items(), key=lambda kv: (-kv[1], first_at[kv[0]], kv[0])
        )
        rows = []
        viewer_rank: int | None = None
        for i, (user_code, points) in enumerate(ordered[:TOP_N]):
            is_viewer = viewer is not None and user_code == viewer
            if is_viewer:
                viewer_rank = i + 1
            info = self._users.get(user_code)
            rows.append(
                LeaderboardRow(
                    rank=i + 1,
                    user_code=user_code,
                    country=info.country if info else "ZZ",
                    display=mask_address(info.address) if info else user_code,
                    points=points,
                    is_viewer=is_viewer,
                )
            )
        return tuple(rows), viewer_rank

    def leaderboard(self, now: datetime, viewer: str | None = None) -> LeaderboardView:
        """Top-10 over the past 24 hours and since launch, viewer highlighted."""
        daily, viewer_daily = self._ranked(now - DAILY_WINDOW, now, viewer)
        alltime, viewer_alltime = self._ranked(None, now, viewer)
        return LeaderboardView(
            daily=daily,
            alltime=alltime,
            viewer_daily_rank=viewer_daily,
            viewer_alltime_rank=viewer_alltime,
        )

    # -- chat rendering --------------------------------------------------------

    def render_leaderboard(self, view: LeaderboardView) -> str:
        lines = ["\U0001F3C6 *Leaderboard*", "", "*Past 24 hours*"]
        lines.extend(self._render_rows(view.daily))
        lines.append("")
        lines.append("*All time*")
        lines.extend(self._render_rows(view.alltime))
        return "\n".join(lines)

    @staticmethod
    def _render_rows(rows: tuple[LeaderboardRow, ...]) -> list[str]:
        if not rows:
            return ["No activity yet."]
        out = []
        for row in rows:
            marker = "  ◀ you" if row.is_viewer else ""
            out.append(f"{row.rank}. {flag(row.country)} {row.display} — {row.points} pts{marker}")
        return out

    def render_my_points(self, summary: PointsSummary) -> str:
        lines = [
            "⭐ *My Points*",
            "",
            f"Total: {summary.total} pts",
            f"Rank: #{summary.rank}",
        ]
        if summary.breakdown:
            lines.append("")
            lines.append("Breakdown:")
            labels = {
                "freeform_query": "Questions asked",
                "trending_select": "Trending picks",
                "recent_select": "Recent picks",
                "followup_select": "Follow-up picks",
            }
            for kind in EARNING_ACTIONS:
                if kind in summary.breakdown:
                    lines.append(f"- {labels[kind]}: {summary.breakdown[kind]}")
        return "\n".join(lines)

    # -- persistence -------------------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "points": self.points,
            "ledger": [
                {
                    "user_code": e.user_code,
                    "at": e.at.isoformat(),
                    "action_kind": e.action_kind,
                    "points": e.points,
                }
                for e in self.ledger
            ],
            "users": {
                code: {"address": info.address, "country": info.country}
                for code, info in self._users.items()
            },
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "RewardsService":
        service = cls(points=data.get("points"))
        for code, info in data.get("users", {}).items():
            service.ensure_user(code, info["address"], info["country"])
        for row in data.get("ledger", []):
            entry = LedgerEntry(
                user_code=row["user_code"],
                at=datetime.fromisoformat(row["at"]),
                action_kind=row["action_kind"],
                points=row["points"],
            )
            service.ledger.append(entry)
            service._first_entry_at.setdefault(entry.user_code, entry.at)
        return service
