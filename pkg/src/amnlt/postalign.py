"""Fuse separately transcribed music and lyrics into one aligned score.

Two strategies are provided:

``syllable_align``
    pairs the i-th lyric syllable with the i-th music group; whatever is
    left over on the longer side is appended unpaired.
``frame_align``
    works on greedy CTC frame labels of equally wide music and lyric
    images, attaching each music event to the lyric syllable whose first
    frame is nearest.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .alignment import PLACEHOLDER, AlignedScore, Pair
from .errors import EmptyPosteriorgram, FrameCountMismatch, InvalidPosteriorgram

ROW_SUM_TOLERANCE = 1e-3


@dataclass(frozen=True, eq=False)
class Posteriorgram:
    """Per-frame class probabilities; column 0 is the CTC blank."""

    frames: np.ndarray
    vocab: tuple[str, ...]

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 2:
            raise InvalidPosteriorgram(f"expected a 2-D matrix, got shape {frames.shape}")
        if frames.shape[1] != len(self.vocab) + 1:
            raise InvalidPosteriorgram(
                f"{frames.shape[1]} columns for {len(self.vocab)} labels plus blank"
            )
        sums = frames.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)
        if bad.size:
            raise InvalidPosteriorgram(f"frame {bad[0]} sums to {sums[bad[0]]:.6f}, not 1")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "vocab", tuple(self.vocab))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class FrameLabels:
    """Greedy label of every frame, ``None`` for blank.

    Frame indices are implicit: ``labels[t]`` belongs to frame ``t``.
    """

    labels: tuple[str | None, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def indexed(self) -> list[tuple[int, str | None]]:
        return list(enumerate(self.labels))


class Event(NamedTuple):
    label: str
    frame: int


def ctc_greedy_decode(p: Posteriorgram) -> tuple[FrameLabels, list[str]]:
    """Argmax per frame, then merge repeats and drop blanks."""
    if p.num_frames == 0:
        raise EmptyPosteriorgram("posteriorgram has no frames")
    best = p.frames.argmax(axis=1)
    labels = FrameLabels(tuple(None if k == 0 else p.vocab[k - 1] for k in best))
    return labels, [event.label for event in collapse(labels)]


def collapse(frames: FrameLabels) -> list[Event]:
    """CTC collapse keeping the first frame of each surviving run."""
    events = []
    previous = None
    for t, label in enumerate(frames.labels):
        if label is not None and label != previous:
            events.append(Event(label, t))
        previous = label
    return events


class Modality(enum.Enum):
    MUSIC = "music"
    LYRICS = "lyrics"


@dataclass(frozen=True)
class ModalTranscription:
    """One model's output split into groups.

    For music each group is a tuple of tokens; for lyrics each group is one
    syllable string.
    """

    modality: Modality
    groups: tuple

    @classmethod
    def music(cls, groups: Sequence[Sequence[str]]) -> "ModalTranscription":
        return cls(Modality.MUSIC, tuple(tuple(g) for g in groups))

    @classmethod
    def lyrics(cls, syllables: Sequence[str]) -> "ModalTranscription":
        return cls(Modality.LYRICS, tuple(syllables))


def syllable_align(music: ModalTranscription, lyrics: ModalTranscription) -> AlignedScore:
    if music.modality is not Modality.MUSIC or lyrics.modality is not Modality.LYRICS:
        raise ValueError("syllable_align expects (music, lyrics) transcriptions")
    pairs = [Pair(syl, tuple(group)) for syl, group in zip(lyrics.groups, music.groups)]
    n = len(pairs)
    # unmatched groups are kept, never dropped: music gets "", lyrics get the placeholder
    pairs.extend(Pair("", tuple(group)) for group in music.groups[n:])
    pairs.extend(Pair(syl, (PLACEHOLDER,)) for syl in lyrics.groups[n:])
    return AlignedScore(tuple(pairs))


def lyric_syllables(frames: FrameLabels, separator: str | None = None) -> list[Event]:
    """Syllable events anchored at their first frame.

    Without a separator every collapsed lyric label is one syllable. With
    one, consecutive labels between separators are joined into a syllable.
    """
    events = collapse(frames)
    if separator is None:
        return events
    syllables = []
    chars: list[str] = []
    anchor = 0
    for label, t in events:
        if label == separator:
            if chars:
                syllables.append(Event("".join(chars), anchor))
            chars = []
            continue
        if not chars:
            anchor = t
        chars.append(label)
    if chars:
        syllables.append(Event("".join(chars), anchor))
    return syllables


def nearest_anchor(frame: int, anchors: Sequence[int]) -> int:
    """Index of the anchor closest to ``frame``; ties go to the earlier one.

    ``anchors`` must be sorted ascending.
    """
    best = 0
    best_distance = abs(frame - anchors[0])
    for i in range(1, len(anchors)):
        distance = abs(frame - anchors[i])
        if distance < best_distance:
            best, best_distance = i, distance
        elif anchors[i] > frame:
            break
    return best


def frame_align(
    music_frames: FrameLabels,
    lyric_frames: FrameLabels,
    *,
    syllable_separator: str | None = None,
    music_separator: str | None = None,
) -> AlignedScore:
    """Attach each music event to the nearest lyric syllable anchor.

    A syllable that receives no music keeps an empty group, which
    ``validate_alignment`` reports as a violation. Music found when the
    lyrics are entirely blank goes into a single pair with an empty syllable.
    """
    if len(music_frames) != len(lyric_frames):
        raise FrameCountMismatch(len(music_frames), len(lyric_frames))
    syllables = lyric_syllables(lyric_frames, syllable_separator)
    music = [e for e in collapse(music_frames) if e.label != music_separator]
    if not syllables:
        return AlignedScore((Pair("", tuple(e.label for e in music)),) if music else ())

    anchors = [s.frame for s in syllables]
    groups: list[list[str]] = [[] for _ in syllables]
    for label, t in music:
        groups[nearest_anchor(t, anchors)].append(label)
    return AlignedScore(
        tuple(Pair(s.label, tuple(g)) for s, g in zip(syllables, groups))
    )


def frame_align_posteriorgrams(
    music: Posteriorgram, lyrics: Posteriorgram, **kwargs
) -> AlignedScore:
    if music.num_frames != lyrics.num_frames:
        raise FrameCountMismatch(music.num_frames, lyrics.num_frames)
    music_frames, _ = ctc_greedy_decode(music)
    lyric_frames, _ = ctc_greedy_decode(lyrics)
    return frame_align(music_frames, lyric_frames, **kwargs)
