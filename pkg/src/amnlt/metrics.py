"""Error rates for aligned music and lyrics transcriptions.

All rates are edit counts divided by the reference length:

=======  ===========================================================
MER      music tokens (``<m>`` markers ignored)
CER      lyric characters, syllable boundaries dropped
SylER    whole syllables
AMLER    the interleaved syllable/music stream, order-sensitive
bWER     the same stream compared as a bag of tokens
AlER     ``(AMLER - bWER) / AMLER``, the share of error due to alignment
=======  ===========================================================

Reports keep integer counts so that corpus totals are exact micro-averages.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .alignment import (
    AlignedScore,
    StreamToken,
    extract_music,
    extract_syllables,
    interleave,
)
from .encoding import strip_music_prefix
from .errors import UndefinedMetric

METRICS = ("mer", "cer", "syler", "amler", "bwer", "aler")


@dataclass(frozen=True)
class EditCosts:
    substitution: int = 1
    insertion: int = 1
    deletion: int = 1

    def __post_init__(self):
        if min(self.substitution, self.insertion, self.deletion) < 0:
            raise ValueError("edit costs must be non-negative")


UNIT_COSTS = EditCosts()


def edit_distance(
    ref: Sequence[Hashable], hyp: Sequence[Hashable], costs: EditCosts = UNIT_COSTS
) -> int:
    """Weighted Levenshtein distance turning ``hyp`` into ``ref``.

    Deleting a reference item that the hypothesis misses costs
    ``costs.deletion``; an extra hypothesis item costs ``costs.insertion``.
    """
    ins, dele, sub = costs.insertion, costs.deletion, costs.substitution
    previous = [j * ins for j in range(len(hyp) + 1)]
    for i, r in enumerate(ref, 1):
        current = [i * dele]
        for j, h in enumerate(hyp, 1):
            current.append(
                min(
                    previous[j] + dele,
                    current[j - 1] + ins,
                    previous[j - 1] + (0 if r == h else sub),
                )
            )
        previous = current
    return previous[-1]


def bag_edit_count(ref: Iterable[Hashable], hyp: Iterable[Hashable]) -> int:
    """Fewest unit edits between ``ref`` and the best reordering of ``hyp``.

    Tokens missing from the hypothesis (D) and surplus ones (I) pair up as
    substitutions; the rest are plain deletions or insertions, so the total
    is ``max(D, I)``.
    """
    ref_counts = Counter(ref)
    hyp_counts = Counter(hyp)
    deletions = sum((ref_counts - hyp_counts).values())
    insertions = sum((hyp_counts - ref_counts).values())
    return max(deletions, insertions)


@dataclass(frozen=True)
class Rate:
    edits: int
    ref_len: int

    @property
    def defined(self) -> bool:
        return self.ref_len > 0

    @property
    def exact(self) -> Fraction | None:
        return Fraction(self.edits, self.ref_len) if self.defined else None

    @property
    def value(self) -> float | None:
        return self.edits / self.ref_len if self.defined else None

    def __add__(self, other: "Rate") -> "Rate":
        return Rate(self.edits + other.edits, self.ref_len + other.ref_len)


def _music(score: AlignedScore) -> list[str]:
    return [strip_music_prefix(t) for t in extract_music(score)]


def _characters(score: AlignedScore) -> list[str]:
    return list("".join(extract_syllables(score)))


def _stream(score: AlignedScore) -> list[StreamToken]:
    return [
        StreamToken(t.modality, strip_music_prefix(t.text) if t.modality == "mus" else t.text)
        for t in interleave(score)
    ]


def mer_rate(ref: AlignedScore, hyp: AlignedScore) -> Rate:
    music = _music(ref)
    return Rate(edit_distance(music, _music(hyp)), len(music))


def cer_rate(ref: AlignedScore, hyp: AlignedScore) -> Rate:
    chars = _characters(ref)
    return Rate(edit_distance(chars, _characters(hyp)), len(chars))


def syler_rate(ref: AlignedScore, hyp: AlignedScore) -> Rate:
    syllables = extract_syllables(ref)
    return Rate(edit_distance(syllables, extract_syllables(hyp)), len(syllables))


def amler_rate(ref: AlignedScore, hyp: AlignedScore) -> Rate:
    stream = _stream(ref)
    return Rate(edit_distance(stream, _stream(hyp)), len(stream))


def bwer_rate(ref: AlignedScore, hyp: AlignedScore) -> Rate:
    stream = _stream(ref)
    return Rate(bag_edit_count(stream, _stream(hyp)), len(stream))


def _ratio(rate: Rate, name: str) -> float:
    if not rate.defined:
        raise UndefinedMetric(f"{name} is undefined for an empty reference")
    return rate.value


def mer(ref: AlignedScore, hyp: AlignedScore) -> float:
    return _ratio(mer_rate(ref, hyp), "MER")


def cer(ref: AlignedScore, hyp: AlignedScore) -> float:
    return _ratio(cer_rate(ref, hyp), "CER")


def syler(ref: AlignedScore, hyp: AlignedScore) -> float:
    return _ratio(syler_rate(ref, hyp), "SylER")


def amler(ref: AlignedScore, hyp: AlignedScore) -> float:
    return _ratio(amler_rate(ref, hyp), "AMLER")


def bwer(ref: AlignedScore, hyp: AlignedScore) -> float:
    return _ratio(bwer_rate(ref, hyp), "bWER")


def aler(amler_value, bwer_value):
    """Share of the AMLER explained by misalignment; 0 for a perfect output.

    Works with floats or :class:`~fractions.Fraction` alike.
    """
    if amler_value == 0:
        return 0 * amler_value
    return (amler_value - bwer_value) / amler_value


@dataclass(frozen=True)
class MetricReport:
    mer: Rate
    cer: Rate
    syler: Rate
    amler: Rate
    bwer: Rate

    @property
    def aler_exact(self) -> Fraction | None:
        if not self.amler.defined:
            return None
        # AMLER and bWER share a denominator, so counts suffice
        return aler(Fraction(self.amler.edits), Fraction(self.bwer.edits))

    @property
    def aler(self) -> float | None:
        exact = self.aler_exact
        return None if exact is None else float(exact)

    def rates(self) -> dict[str, Rate]:
        return {name: getattr(self, name) for name in METRICS[:-1]}

    def __add__(self, other: "MetricReport") -> "MetricReport":
        return MetricReport(
            *(getattr(self, name) + getattr(other, name) for name in METRICS[:-1])
        )

    def to_dict(self) -> dict[str, float | int | None]:
        """Flat record: ``mer``, ``mer_edits``, ``mer_ref_len``, ... ``aler``."""
        out: dict[str, float | int | None] = {}
        for name, rate in self.rates().items():
            out[name] = rate.value
            out[f"{name}_edits"] = rate.edits
            out[f"{name}_ref_len"] = rate.ref_len
        out["aler"] = self.aler
        out["aler_edits"] = self.amler.edits - self.bwer.edits
        out["aler_ref_len"] = self.amler.edits
        return out


def evaluate(ref: AlignedScore, hyp: AlignedScore) -> MetricReport:
    return MetricReport(
        mer=mer_rate(ref, hyp),
        cer=cer_rate(ref, hyp),
        syler=syler_rate(ref, hyp),
        amler=amler_rate(ref, hyp),
        bwer=bwer_rate(ref, hyp),
    )


def aggregate(reports: Iterable[MetricReport]) -> MetricReport:
    """Micro-average: sum edits and reference lengths, then divide."""
    total = MetricReport(*(Rate(0, 0) for _ in METRICS[:-1]))
    for report in reports:
        total = total + report
    return total
