"""Formal music/lyrics alignment model.

A score is a sequence of syllables ``L`` and a sequence of music elements
``M``. The alignment partitions ``M`` into consecutive, non-empty groups,
one per syllable, so that ``a(l_j) = A_j``.

Groups own their tokens by position. Two pairs may both contain ``"f"``;
that is not an overlap, because disjointness is about element positions
in ``M`` and not about token values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple

from .errors import IndexOutOfRange

#: Reserved music token standing in for a missing group (see postalign).
PLACEHOLDER = "∅"

Syllable = str
MusicGroup = tuple[str, ...]


class Pair(NamedTuple):
    syllable: Syllable
    group: MusicGroup


@dataclass(frozen=True)
class AlignedScore:
    pairs: tuple[Pair, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Iterable[str]]]) -> "AlignedScore":
        """Build a score from plain ``(text, tokens)`` pairs."""
        return cls(tuple(Pair(str(syl), tuple(group)) for syl, group in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


class Violation(NamedTuple):
    pair_index: int
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"pair {self.pair_index}: {self.rule}"
        return f"{text} ({self.detail})" if self.detail else text


EMPTY_GROUP = "EmptyGroup"
BAD_SYLLABLE = "ParenthesisInSyllable"
BAD_MUSIC_TOKEN = "InvalidMusicToken"


def validate_alignment(score: AlignedScore) -> list[Violation]:
    """Check the partition invariants; an empty list means the score is valid.

    Disjointness and coverage hold structurally (each token instance lives in
    exactly one pair and ``M`` is defined as their concatenation), so only
    per-pair rules can fail here.
    """
    violations = []
    for index, (syllable, group) in enumerate(score.pairs):
        if "(" in syllable or ")" in syllable:
            violations.append(Violation(index, BAD_SYLLABLE, repr(syllable)))
        if not group:
            violations.append(Violation(index, EMPTY_GROUP))
        for token in group:
            if not token or "(" in token or ")" in token:
                violations.append(Violation(index, BAD_MUSIC_TOKEN, repr(token)))
    return violations


def is_valid(score: AlignedScore) -> bool:
    return not validate_alignment(score)


def align_of(score: AlignedScore, j: int) -> MusicGroup:
    """The alignment function: the music group sung on syllable ``j``."""
    if not 0 <= j < len(score.pairs):
        raise IndexOutOfRange(f"syllable index {j} outside 0..{len(score.pairs) - 1}")
    return score.pairs[j].group


def extract_music(score: AlignedScore) -> list[str]:
    return [token for pair in score.pairs for token in pair.group]


def extract_syllables(score: AlignedScore) -> list[str]:
    return [pair.syllable for pair in score.pairs]


def group_spans(score: AlignedScore) -> list[range]:
    """Index range of each group inside ``extract_music(score)``."""
    spans = []
    start = 0
    for pair in score.pairs:
        spans.append(range(start, start + len(pair.group)))
        start += len(pair.group)
    return spans


class StreamToken(NamedTuple):
    """A modality-tagged token; ``syl:f`` and ``mus:f`` never compare equal."""

    modality: Literal["syl", "mus"]
    text: str

    def __str__(self) -> str:
        return f"{self.modality}:{self.text}"


def interleave(score: AlignedScore) -> list[StreamToken]:
    """Reading-order stream: each syllable followed by its music tokens."""
    stream = []
    for syllable, group in score.pairs:
        stream.append(StreamToken("syl", syllable))
        stream.extend(StreamToken("mus", token) for token in group)
    return stream

