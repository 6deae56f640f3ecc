"""Exception types shared across the package."""

from __future__ import annotations


class AmnltError(Exception):
    """Base class for every domain error raised by amnlt."""


class EncodingError(AmnltError, ValueError):
    """A score text does not conform to its declared encoding."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        self.reason = message
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class UnbalancedParentheses(EncodingError):
    pass


class EmptyMusicGroup(EncodingError):
    pass


class StrayMusicPrefix(EncodingError):
    pass


class MissingMusicPrefix(EncodingError):
    pass


class MalformedGroup(EncodingError):
    """Bad token separation inside a group (double spaces, dangling prefix)."""


class TrailingLyricText(EncodingError):
    """Lyric text after the last music group has no group to attach to."""


class UnrepresentableToken(EncodingError):
    def __init__(self, token: str, target: object):
        self.token = token
        self.target = target
        super().__init__(f"token {token!r} cannot be written as {target}")


class InvalidAlignment(AmnltError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"score violates alignment invariants: {detail}")


class IndexOutOfRange(AmnltError, IndexError):
    pass


class InvalidMeiDocument(AmnltError, ValueError):
    pass


class UnsupportedElement(InvalidMeiDocument):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"MEI element or attribute outside the supported subset: {name}")


class MissingPitchOrOctave(InvalidMeiDocument):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"note {index} lacks a pitch letter or octave")


class MalformedNoteToken(EncodingError):
    def __init__(self, token: str, position: int):
        self.token = token
        super().__init__(f"music token {token!r} is not <pitch><octave>[extra]", position)


class UnsupportedConversion(AmnltError, ValueError):
    pass


class InvalidPosteriorgram(AmnltError, ValueError):
    pass


class EmptyPosteriorgram(AmnltError, ValueError):
    pass


class FrameCountMismatch(AmnltError, ValueError):
    def __init__(self, music_frames: int, lyric_frames: int):
        self.music_frames = music_frames
        self.lyric_frames = lyric_frames
        super().__init__(
            f"music has {music_frames} frames but lyrics have {lyric_frames}; "
            "both images must share the same width"
        )


class UndefinedMetric(AmnltError, ZeroDivisionError):
    pass


class SchemaError(AmnltError, ValueError):
    pass


class DuplicateId(SchemaError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id {sample_id!r}")


class SampleError(AmnltError):
    """Wraps any failure while loading or processing one corpus sample."""

    def __init__(self, sample_id: str, cause: BaseException):
        self.sample_id = sample_id
        self.cause = cause
        super().__init__(f"[{sample_id}] {type(cause).__name__}: {cause}")
