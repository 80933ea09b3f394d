"""Daily sentiment aggregation, smoothing, and regional correlation.

The sentiment score of a tally (n_pos, n_neg, n_neu) is
(n_pos - n_neg) / (n_pos + n_neg + n_neu); days or regions with no
relevant tweets carry an empty marker rather than a zero score.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import SentimentLabel, Tweet
from .stats import weighted_pearson

__all__ = [
    "DailyCounts",
    "RegionScore",
    "NoRelevantTweetsError",
    "sentiment_score",
    "daily_series",
    "moving_average",
    "region_scores",
    "regional_correlation",
    "write_daily_counts_csv",
    "write_moving_average_csv",
    "write_region_scores_csv",
]


class NoRelevantTweetsError(ValueError):
    """Raised when a score is requested for an all-zero tally."""


def sentiment_score(n_pos: int, n_neg: int, n_neu: int) -> float:
    """Relative excess of positive over negative among relevant tweets.

    Raises NoRelevantTweetsError on an all-zero tally so that "no data"
    stays distinguishable from a genuine 0.0.
    """
    if min(n_pos, n_neg, n_neu) < 0:
        raise ValueError("counts must be non-negative")
    total = n_pos + n_neg + n_neu
    if total == 0:
        raise NoRelevantTweetsError("no relevant tweets to score")
    return (n_pos - n_neg) / total


@dataclass(frozen=True)
class DailyCounts:
    """Exact tallies of relevant tweets on one UTC calendar day."""

    date: date
    n_pos: int
    n_neg: int
    n_neu: int

    @property
    def score(self) -> float | None:
        """Sentiment score, or None on days without relevant tweets."""
        if self.n_pos + self.n_neg + self.n_neu == 0:
            return None
        return sentiment_score(self.n_pos, self.n_neg, self.n_neu)


@dataclass(frozen=True)
class RegionScore:
    """Aggregate sentiment of one region; ``empty`` regions score 0 by
    convention and are excluded from correlations."""

    region: str
    score: float
    weight: int

    @property
    def empty(self) -> bool:
        return self.weight == 0


def daily_series(
    labeled_tweets: Iterable[tuple[Tweet, SentimentLabel]],
    start: date,
    end: date,
    region: str | None = None,
) -> list[DailyCounts]:
    """Tally relevant tweets per UTC calendar day over [start, end].

    Irrelevant-labeled tweets are never counted; days without tweets are
    zero-filled. ``region`` restricts the tally to tweets carrying that
    region code.
    """
    if end < start:
        raise ValueError("empty date range")
    n_days = (end - start).days + 1
    pos = [0] * n_days
    neg = [0] * n_days
    neu = [0] * n_days
    for tweet, label in labeled_tweets:
        if label is SentimentLabel.IRRELEVANT:
            continue
        if region is not None and tweet.region != region:
            continue
        day = tweet.timestamp.date()
        offset = (day - start).days
        if 0 <= offset < n_days:
            if label is SentimentLabel.POSITIVE:
                pos[offset] += 1
            elif label is SentimentLabel.NEGATIVE:
                neg[offset] += 1
            else:
                neu[offset] += 1
    return [
        DailyCounts(start + timedelta(days=i), pos[i], neg[i], neu[i])
        for i in range(n_days)
    ]


def moving_average(
    scores: Sequence[float | None], window: int = 14
) -> list[float | None]:
    """Trailing moving average including the current day.

    The first ``window - 1`` entries average over the days available so
    far. Empty-score days (None) are excluded from their windows; a
    window with no scored days yields None.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    out: list[float | None] = []
    for i in range(len(scores)):
        chunk = [s for s in scores[max(0, i - window + 1) : i + 1] if s is not None]
        out.append(sum(chunk) / len(chunk) if chunk else None)
    return out


def region_scores(
    labeled_tweets: Iterable[tuple[Tweet, SentimentLabel]]
) -> list[RegionScore]:
    """Aggregate per-region sentiment over all relevant, region-tagged tweets."""
    tallies: dict[str, list[int]] = {}
    for tweet, label in labeled_tweets:
        if label is SentimentLabel.IRRELEVANT or tweet.region is None:
            continue
        t = tallies.setdefault(tweet.region, [0, 0, 0])
        if label is SentimentLabel.POSITIVE:
            t[0] += 1
        elif label is SentimentLabel.NEGATIVE:
            t[1] += 1
        else:
            t[2] += 1
    out = []
    for region in sorted(tallies):
        n_pos, n_neg, n_neu = tallies[region]
        weight = n_pos + n_neg + n_neu
        score = sentiment_score(n_pos, n_neg, n_neu) if weight else 0.0
        out.append(RegionScore(region=region, score=score, weight=weight))
    return out


def regional_correlation(
    scores: Sequence[RegionScore], coverage: Mapping[str, float]
) -> tuple[float, float]:
    """Weighted Pearson correlation of region scores against coverage.

    Weights are the per-region relevant tweet totals. Regions that are
    empty or missing from ``coverage`` are dropped; fewer than 3
    remaining regions is an error.
    """
    xs, ys, ws = [], [], []
    for rs in scores:
        if rs.empty or rs.region not in coverage:
            continue
        xs.append(rs.score)
        ys.append(float(coverage[rs.region]))
        ws.append(float(rs.weight))
    if len(xs) < 3:
        raise ValueError(
            f"need at least 3 overlapping regions with data, got {len(xs)}"
        )
    return weighted_pearson(xs, ys, ws)


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_daily_counts_csv(path: str | Path, series: Sequence[DailyCounts]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "n_pos", "n_neg", "n_neu", "score"])
        for row in series:
            writer.writerow(
                [row.date.isoformat(), row.n_pos, row.n_neg, row.n_neu, _fmt(row.score)]
            )


def write_moving_average_csv(
    path: str | Path, series: Sequence[DailyCounts], window: int = 14
) -> None:
    smoothed = moving_average([row.score for row in series], window=window)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "score", "moving_avg"])
        for row, avg in zip(series, smoothed):
            writer.writerow([row.date.isoformat(), _fmt(row.score), _fmt(avg)])


def write_region_scores_csv(path: str | Path, scores: Sequence[RegionScore]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", "score", "weight"])
        for rs in scores:
            writer.writerow([rs.region, repr(rs.score), rs.weight])
