"""Directed information-flow network of opinionated users.

Edges point in the direction information travels: A -> B means B
receives what A posts, established either because B appears among A's
followers or A appears among B's friends. The network is a static
snapshot; there are no temporal edge semantics.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from .corpus import SentimentLabel, Tweet

__all__ = [
    "FlowNetwork",
    "OpinionatedNetwork",
    "tally_users",
    "build_flow_network",
    "opinionated",
    "giant_component",
    "read_adjacency",
    "write_edges_csv",
    "write_nodes_csv",
]

Tally = tuple[int, int, int]  # (n_pos, n_neg, n_neu)


@dataclass(frozen=True)
class FlowNetwork:
    """Directed graph of users with at least one relevant tweet.

    ``tallies`` maps user id to (n_pos, n_neg, n_neu); ``edges`` is a
    deduplicated, sorted tuple of (from, to) pairs with no self-loops.
    """

    tallies: dict[str, Tally]
    edges: tuple[tuple[str, str], ...]

    @property
    def nodes(self) -> set[str]:
        return set(self.tallies)


@dataclass(frozen=True)
class OpinionatedNetwork:
    """Restriction of a FlowNetwork to users with a nonzero score.

    ``signs`` maps user id to +1 (predominantly positive) or -1.
    """

    tallies: dict[str, Tally]
    signs: dict[str, int]
    edges: tuple[tuple[str, str], ...]

    @property
    def nodes(self) -> set[str]:
        return set(self.signs)


def tally_users(
    labeled_tweets: Iterable[tuple[Tweet, SentimentLabel]]
) -> dict[str, Tally]:
    """Per-user relevant tweet tallies; users with none are omitted."""
    acc: dict[str, list[int]] = {}
    for tweet, label in labeled_tweets:
        if label is SentimentLabel.IRRELEVANT:
            continue
        t = acc.setdefault(tweet.user_id, [0, 0, 0])
        if label is SentimentLabel.POSITIVE:
            t[0] += 1
        elif label is SentimentLabel.NEGATIVE:
            t[1] += 1
        else:
            t[2] += 1
    return {user: (t[0], t[1], t[2]) for user, t in acc.items()}


def build_flow_network(
    tallies: Mapping[str, Tally],
    followers: Mapping[str, Iterable[str]],
    friends: Mapping[str, Iterable[str]],
) -> FlowNetwork:
    """Assemble the directed network from follower and friend lists.

    Nodes are users with at least one relevant tweet. There is an edge
    A -> B when B is among A's followers or A is among B's friends;
    evidence from either list yields the identical edge, so truncated
    lists on one side are compensated by the other. Endpoints that are
    not nodes are ignored, as are self-references.
    """
    nodes = {user for user, (p, n, m) in tallies.items() if p + n + m >= 1}
    edges: set[tuple[str, str]] = set()
    for a, people in followers.items():
        if a not in nodes:
            continue
        for b in people:
            if b != a and b in nodes:
                edges.add((a, b))
    for b, people in friends.items():
        if b not in nodes:
            continue
        for a in people:
            if a != b and a in nodes:
                edges.add((a, b))
    return FlowNetwork(
        tallies={user: tallies[user] for user in nodes},
        edges=tuple(sorted(edges)),
    )


def _sign(tally: Tally) -> int:
    n_pos, n_neg, _ = tally
    if n_pos > n_neg:
        return 1
    if n_neg > n_pos:
        return -1
    return 0


def opinionated(network: FlowNetwork) -> OpinionatedNetwork:
    """Keep users whose sentiment score is nonzero, with induced edges."""
    signs = {
        user: _sign(tally)
        for user, tally in network.tallies.items()
        if _sign(tally) != 0
    }
    edges = tuple(e for e in network.edges if e[0] in signs and e[1] in signs)
    return OpinionatedNetwork(
        tallies={user: network.tallies[user] for user in signs},
        signs=signs,
        edges=edges,
    )


def giant_component(network):
    """Induced subgraph on the largest weakly connected component.

    Ties between equal-size components go to the one containing the
    smallest node id. Works on FlowNetwork and OpinionatedNetwork alike;
    the input type is preserved. Raises ValueError on an empty network.
    """
    nodes = network.nodes
    if not nodes:
        raise ValueError("empty network")
    adjacency: dict[str, list[str]] = {node: [] for node in nodes}
    for a, b in network.edges:
        adjacency[a].append(b)
        adjacency[b].append(a)

    best: set[str] | None = None
    unvisited = set(nodes)
    # Seeding searches in sorted order makes the smallest-id tie rule fall
    # out naturally: a later component can only win by being strictly larger.
    for seed in sorted(nodes):
        if seed not in unvisited:
            continue
        component = {seed}
        queue = deque([seed])
        unvisited.discard(seed)
        while queue:
            current = queue.popleft()
            for neighbor in adjacency[current]:
                if neighbor in unvisited:
                    unvisited.discard(neighbor)
                    component.add(neighbor)
                    queue.append(neighbor)
        if best is None or len(component) > len(best):
            best = component

    edges = tuple(e for e in network.edges if e[0] in best and e[1] in best)
    tallies = {user: network.tallies[user] for user in best}
    if isinstance(network, OpinionatedNetwork):
        return OpinionatedNetwork(
            tallies=tallies,
            signs={user: network.signs[user] for user in best},
            edges=edges,
        )
    return FlowNetwork(tallies=tallies, edges=edges)


def read_adjacency(stream: IO | Iterable[str]) -> dict[str, set[str]]:
    """Parse ``user_id: comma-separated ids`` lines into a mapping."""
    out: dict[str, set[str]] = {}
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        user, _, rest = line.partition(":")
        ids = {part.strip() for part in rest.split(",") if part.strip()}
        out.setdefault(user.strip(), set()).update(ids)
    return out


def write_edges_csv(path: str | Path, network) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from", "to"])
        for a, b in network.edges:
            writer.writerow([a, b])


def write_nodes_csv(path: str | Path, network) -> None:
    sign_text = {1: "positive", -1: "negative", 0: "none"}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "n_pos", "n_neg", "n_neu", "sign"])
        for user in sorted(network.tallies):
            n_pos, n_neg, n_neu = network.tallies[user]
            writer.writerow(
                [user, n_pos, n_neg, n_neu, sign_text[_sign((n_pos, n_neg, n_neu))]]
            )
