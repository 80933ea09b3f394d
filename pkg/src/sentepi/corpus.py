"""Tweet ingestion and text-to-feature tokenization.

Input files are JSON-lines: one record per line with fields ``id``,
``user_id``, ``timestamp`` (ISO-8601, UTC), ``text`` and an optional
``region``. Labels arrive as two-column CSV (tweet_id, label).
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import IO, Iterable, Iterator

from .stemming import stem

logger = logging.getLogger(__name__)

__all__ = [
    "Tweet",
    "SentimentLabel",
    "LABEL_ORDER",
    "TokenVector",
    "STOP_WORDS",
    "parse_tweets",
    "parse_labels",
    "tokenize",
]


class SentimentLabel(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    IRRELEVANT = "irrelevant"


# Fixed order used everywhere an argmax tie must be broken.
LABEL_ORDER = (
    SentimentLabel.POSITIVE,
    SentimentLabel.NEGATIVE,
    SentimentLabel.NEUTRAL,
    SentimentLabel.IRRELEVANT,
)

# Classic 33-word English analyzer stop list minus "no" and "not",
# which carry sentiment in this domain.
STOP_WORDS = frozenset(
    """a an and are as at be but by for if in into is it of on or such
    that the their then there these they this to was will with""".split()
)


@dataclass(frozen=True)
class Tweet:
    """One short message. ``text`` is nominally <= 140 visible characters;
    that bound is documented, not enforced."""

    id: str
    user_id: str
    timestamp: datetime
    text: str
    region: str | None = None


@dataclass(frozen=True)
class TokenVector:
    """Normalized token sequence plus per-token multiplicities."""

    tokens: tuple[str, ...]
    counts: dict[str, int] = field(compare=False)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "TokenVector":
        toks = tuple(tokens)
        return cls(tokens=toks, counts=dict(Counter(toks)))

    def __len__(self) -> int:
        return len(self.tokens)


def parse_tweets(stream: IO | Iterable[str]) -> tuple[list[Tweet], int]:
    """Parse JSON-lines tweets, skipping malformed lines with a warning.

    Returns (tweets in input order, number of skipped lines). Duplicate
    ids are rejected: the later line is skipped. Blank lines are ignored.
    Raises OSError only if the stream itself cannot be read.
    """
    tweets: list[Tweet] = []
    seen_ids: set[str] = set()
    skipped = 0
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        tweet = _parse_tweet_line(line, lineno)
        if tweet is None:
            skipped += 1
            continue
        if tweet.id in seen_ids:
            logger.warning("line %d: duplicate tweet id %r, skipped", lineno, tweet.id)
            skipped += 1
            continue
        seen_ids.add(tweet.id)
        tweets.append(tweet)
    return tweets, skipped


def _parse_tweet_line(line: str, lineno: int) -> Tweet | None:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        logger.warning("line %d: invalid JSON (%s), skipped", lineno, exc.msg)
        return None
    if not isinstance(record, dict):
        logger.warning("line %d: record is not an object, skipped", lineno)
        return None
    try:
        tweet_id = str(record["id"])
        user_id = str(record["user_id"])
        timestamp = _parse_timestamp(str(record["timestamp"]))
        text = str(record["text"])
    except KeyError as exc:
        logger.warning("line %d: missing field %s, skipped", lineno, exc)
        return None
    except ValueError as exc:
        logger.warning("line %d: %s, skipped", lineno, exc)
        return None
    region = record.get("region")
    return Tweet(
        id=tweet_id,
        user_id=user_id,
        timestamp=timestamp,
        text=text,
        region=str(region) if region is not None else None,
    )


def _parse_timestamp(value: str) -> datetime:
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"unparseable timestamp {value!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_labels(stream: IO | Iterable[str]) -> dict[str, SentimentLabel]:
    """Parse a two-column (tweet_id, label) CSV into a mapping.

    A leading ``tweet_id,label`` header line is tolerated. Lines with an
    unknown label or wrong column count are skipped with a warning.
    """
    labels: dict[str, SentimentLabel] = {}
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line or (lineno == 1 and line.lower() == "tweet_id,label"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            logger.warning("label line %d: expected 2 columns, skipped", lineno)
            continue
        tweet_id, label_text = parts[0].strip(), parts[1].strip().lower()
        try:
            labels[tweet_id] = SentimentLabel(label_text)
        except ValueError:
            logger.warning("label line %d: unknown label %r, skipped", lineno, label_text)
    return labels


def _stem_fixpoint(word: str) -> str:
    # Porter stemming is not idempotent (agreed -> agre -> agr), so stem
    # until stable: re-tokenizing tokenizer output must reproduce it.
    for _ in range(8):
        stemmed = stem(word)
        if stemmed == word:
            return word
        word = stemmed
    return word


def tokenize(text: str) -> TokenVector:
    """Normalize text into the feature tokens both classifiers consume.

    Pipeline: lowercase; split on whitespace; drop every character that
    is neither alphanumeric nor '!', with each retained '!' emitted as
    its own token; remove stop words; Porter-stem the remaining purely
    alphabetic tokens (to a fixed point). Stems that collapse onto a
    stop word are dropped as well, so the output never contains a
    stop-list token and re-tokenizing the output reproduces it.
    """
    out: list[str] = []
    for chunk in text.lower().split():
        word_chars: list[str] = []
        bangs = 0
        for ch in chunk:
            if ch == "!":
                bangs += 1
            elif ch.isalnum():
                word_chars.append(ch)
        word = "".join(word_chars)
        if word and word not in STOP_WORDS:
            if word.isalpha():
                word = _stem_fixpoint(word)
            if word not in STOP_WORDS:
                out.append(word)
        out.extend("!" * bangs)
    return TokenVector.from_tokens(out)
