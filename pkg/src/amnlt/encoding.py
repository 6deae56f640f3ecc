"""Readers and writers for the gabc family of score encodings.

Three textual variants are handled:

* plain gabc: ``Ky(fg)ri(e)``, one music token per character in parentheses;
* music-aware gabc: ``Ky(<m>f<m>g)ri(<m>e)``, every in-group character
  carries a literal ``<m>`` marker so it cannot be confused with lyrics;
* pgabc: ``ve(c4 d4)ni(e4)``, space-separated multi-character tokens.

Only the alignment structure (text outside parentheses, music inside) is
interpreted. gabc headers and inline commands pass through as opaque
characters.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable

from .alignment import PLACEHOLDER, AlignedScore, Pair, validate_alignment
from .errors import (
    EmptyMusicGroup,
    InvalidAlignment,
    MalformedGroup,
    MissingMusicPrefix,
    StrayMusicPrefix,
    TrailingLyricText,
    UnbalancedParentheses,
    UnrepresentableToken,
)

MUSIC_PREFIX = "<m>"


class EncodingKind(enum.Enum):
    PLAIN_GABC = "gabc"
    MUSIC_AWARE_GABC = "magabc"
    PGABC = "pgabc"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "EncodingKind":
        """Resolve a user-facing name; ``sgabc`` is read as music-aware gabc."""
        key = name.lower().lstrip(".")
        if key == "sgabc":
            return cls.MUSIC_AWARE_GABC
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown encoding {name!r}")

    @property
    def extension(self) -> str:
        return "." + self.value


class TokenKind(enum.Enum):
    MUSIC = "MusicToken"
    LYRIC = "LyricChar"
    GROUP_OPEN = "GroupOpen"
    GROUP_CLOSE = "GroupClose"
    SYLLABLE_BREAK = "SyllableBreak"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    position: int = field(default=0, compare=False)

    def __repr__(self) -> str:
        return f"{self.kind.value}({self.text!r})"


@dataclass(frozen=True)
class RawScoreText:
    encoding: EncodingKind
    text: str


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _as_raw(raw: RawScoreText | str, encoding: EncodingKind | None) -> RawScoreText:
    if isinstance(raw, RawScoreText):
        return raw
    if encoding is None:
        raise TypeError("a bare string needs an explicit encoding")
    return RawScoreText(encoding, raw)


def tokenize(raw: RawScoreText | str, encoding: EncodingKind | None = None) -> list[Token]:
    """Split a score text into tokens.

    Joining the ``text`` of every token reproduces the NFC-normalised input,
    except for pgabc where the single spaces between music tokens are
    implied (see :func:`detokenize`). A zero-width ``SyllableBreak`` follows
    every group that is not at the very end of the input.
    """
    raw = _as_raw(raw, encoding)
    text = _nfc(raw.text)
    kind = raw.encoding
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == ")":
            raise UnbalancedParentheses("')' without matching '('", i)
        if ch != "(":
            if kind is EncodingKind.MUSIC_AWARE_GABC and text.startswith(MUSIC_PREFIX, i):
                raise StrayMusicPrefix("music marker outside a group", i)
            tokens.append(Token(TokenKind.LYRIC, ch, i))
            i += 1
            continue

        close = _find_close(text, i)
        tokens.append(Token(TokenKind.GROUP_OPEN, "(", i))
        body_start = i + 1
        if close == body_start:
            raise EmptyMusicGroup("empty music group '()'", i)
        if kind is EncodingKind.PGABC:
            tokens.extend(_pgabc_body(text, body_start, close))
        elif kind is EncodingKind.MUSIC_AWARE_GABC:
            tokens.extend(_music_aware_body(text, body_start, close))
        else:
            tokens.extend(
                Token(TokenKind.MUSIC, text[j], j) for j in range(body_start, close)
            )
        tokens.append(Token(TokenKind.GROUP_CLOSE, ")", close))
        i = close + 1
        if i < n:
            tokens.append(Token(TokenKind.SYLLABLE_BREAK, "", i))
    return tokens


def _find_close(text: str, open_at: int) -> int:
    for j in range(open_at + 1, len(text)):
        if text[j] == ")":
            return j
        if text[j] == "(":
            raise UnbalancedParentheses("nested '(' inside a music group", j)
    raise UnbalancedParentheses("'(' is never closed", open_at)


def _pgabc_body(text: str, start: int, end: int) -> list[Token]:
    tokens = []
    j = start
    while True:
        stop = text.find(" ", j, end)
        if stop == -1:
            stop = end
        if stop == j:
            raise MalformedGroup("music tokens must be separated by exactly one space", j)
        tokens.append(Token(TokenKind.MUSIC, text[j:stop], j))
        if stop == end:
            return tokens
        j = stop + 1
        if j == end:
            raise MalformedGroup("trailing space inside music group", stop)


def _music_aware_body(text: str, start: int, end: int) -> list[Token]:
    tokens = []
    width = len(MUSIC_PREFIX)
    j = start
    while j < end:
        if not text.startswith(MUSIC_PREFIX, j):
            raise MissingMusicPrefix("music character without '<m>' marker", j)
        if j + width == end:
            raise MalformedGroup("'<m>' marker not followed by a music character", j)
        tokens.append(Token(TokenKind.MUSIC, text[j:j + width + 1], j))
        j += width + 1
    return tokens


def detokenize(tokens: Iterable[Token], encoding: EncodingKind) -> str:
    """Inverse of :func:`tokenize` for every encoding, pgabc included."""
    parts = []
    previous = None
    for token in tokens:
        if (
            encoding is EncodingKind.PGABC
            and token.kind is TokenKind.MUSIC
            and previous is TokenKind.MUSIC
        ):
            parts.append(" ")
        parts.append(token.text)
        previous = token.kind
    return "".join(parts)


def to_music_aware(plain: RawScoreText | str) -> RawScoreText:
    """Prefix every in-group character of a plain gabc text with ``<m>``."""
    plain = _as_raw(plain, EncodingKind.PLAIN_GABC)
    if plain.encoding is not EncodingKind.PLAIN_GABC:
        raise ValueError(f"expected plain gabc, got {plain.encoding}")
    out = []
    for token in tokenize(plain):
        if token.kind is TokenKind.MUSIC:
            out.append(MUSIC_PREFIX + token.text)
        else:
            out.append(token.text)
    text = "".join(out)
    # lyric text that already spells "<m>" would become a stray marker
    _check_no_stray_prefix(text)
    return RawScoreText(EncodingKind.MUSIC_AWARE_GABC, text)


def _check_no_stray_prefix(text: str) -> None:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth = 1
        elif ch == ")":
            depth = 0
        elif depth == 0 and text.startswith(MUSIC_PREFIX, i):
            raise StrayMusicPrefix("lyric text contains the literal '<m>' marker", i)


def from_music_aware(ma: RawScoreText | str) -> RawScoreText:
    """Strip the ``<m>`` marker from every music character."""
    ma = _as_raw(ma, EncodingKind.MUSIC_AWARE_GABC)
    if ma.encoding is not EncodingKind.MUSIC_AWARE_GABC:
        raise ValueError(f"expected music-aware gabc, got {ma.encoding}")
    out = []
    for token in tokenize(ma):
        if token.kind is TokenKind.MUSIC:
            out.append(token.text[len(MUSIC_PREFIX):])
        else:
            out.append(token.text)
    return RawScoreText(EncodingKind.PLAIN_GABC, "".join(out))


def strip_music_prefix(token: str) -> str:
    return token[len(MUSIC_PREFIX):] if token.startswith(MUSIC_PREFIX) else token


def parse(raw: RawScoreText | str, encoding: EncodingKind | None = None) -> AlignedScore:
    """Read a score text into (syllable, music group) pairs.

    Lyric text before a group becomes that group's syllable, so a group with
    nothing in front of it gets the empty syllable. Whitespace after the last
    group is ignored; any other trailing text raises
    :class:`TrailingLyricText`.
    """
    raw = _as_raw(raw, encoding)
    pairs = []
    syllable: list[str] = []
    group: list[str] = []
    syllable_start = 0
    for token in tokenize(raw):
        kind = token.kind
        if kind is TokenKind.LYRIC:
            if not syllable:
                syllable_start = token.position
            syllable.append(token.text)
        elif kind is TokenKind.MUSIC:
            if raw.encoding is EncodingKind.MUSIC_AWARE_GABC:
                group.append(token.text[len(MUSIC_PREFIX):])
            else:
                group.append(token.text)
        elif kind is TokenKind.GROUP_CLOSE:
            pairs.append(Pair("".join(syllable), tuple(group)))
            syllable, group = [], []
    if "".join(syllable).strip():
        raise TrailingLyricText("lyric text after the last music group", syllable_start)
    return AlignedScore(tuple(pairs))


def _check_representable(score: AlignedScore, target: EncodingKind) -> None:
    for syllable, group in score.pairs:
        if target is EncodingKind.MUSIC_AWARE_GABC and MUSIC_PREFIX in syllable:
            raise UnrepresentableToken(syllable, target)
        for token in group:
            if target is EncodingKind.PGABC:
                if " " in token:
                    raise UnrepresentableToken(token, target)
            elif len(token) != 1:
                raise UnrepresentableToken(token, target)


def serialize(score: AlignedScore, target: EncodingKind) -> RawScoreText:
    """Write a valid score in ``target``; ``parse`` reads it back unchanged."""
    violations = validate_alignment(score)
    if violations:
        raise InvalidAlignment(violations)
    _check_representable(score, target)
    parts = []
    for syllable, group in score.pairs:
        parts.append(_nfc(syllable))
        if target is EncodingKind.PGABC:
            body = " ".join(group)
        elif target is EncodingKind.MUSIC_AWARE_GABC:
            body = "".join(MUSIC_PREFIX + token for token in group)
        else:
            body = "".join(group)
        parts.append(f"({body})")
    return RawScoreText(target, "".join(parts))


@dataclass(frozen=True)
class Vocabulary:
    music_tokens: frozenset[str]
    lyric_chars: frozenset[str]
    structural: frozenset[str]

    @property
    def unique_total(self) -> int:
        # modalities are disjoint namespaces: music "f" and lyric "f" are two tokens
        return len(self.music_tokens) + len(self.lyric_chars) + len(self.structural)


def build_vocabulary(corpus: Iterable[AlignedScore]) -> Vocabulary:
    """Distinct tokens per modality over a corpus, placeholder excluded."""
    music: set[str] = set()
    lyric: set[str] = set()
    has_groups = False
    for score in corpus:
        for syllable, group in score.pairs:
            has_groups = True
            lyric.update(_nfc(syllable))
            music.update(strip_music_prefix(t) for t in group)
    music.discard(PLACEHOLDER)
    structural = frozenset({"(", ")"}) if has_groups else frozenset()
    return Vocabulary(frozenset(music), frozenset(lyric), structural)
