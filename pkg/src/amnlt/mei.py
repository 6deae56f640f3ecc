"""A strict MEI subset and its lossless mapping to pgabc.

Each note is reduced to a pitch letter, an octave digit and an optional
shape suffix, rendered as one pgabc token ``<pitch><octave>[extra]``
(``c4``, ``g3``, ``f3se``). Syllables map one-to-one to pgabc groups.

The XML side accepts only::

    mei/music/body/mdiv/score/section/staff/layer   (transparent containers)
    syllable > syl                                  (at most one; text)
    syllable > neume > nc   |   syllable > note     (@pname, @oct, @tilt)

``@tilt`` carries the shape suffix. ``xml:id``, ``@facs`` and ``@n`` are
tolerated and dropped. Anything else (clefs, custos, divisions, zones)
raises :class:`UnsupportedElement`.
"""

from __future__ import annotations

import re
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable

from .encoding import EncodingKind, RawScoreText, parse, serialize
from .alignment import AlignedScore, Pair
from .errors import (
    InvalidMeiDocument,
    MalformedNoteToken,
    MissingPitchOrOctave,
    UnsupportedElement,
)

MEI_NS = "http://www.music-encoding.org/ns/mei"
XML_ID = "{http://www.w3.org/XML/1998/namespace}id"

PITCHES = "abcdefg"
NOTE_TOKEN = re.compile(r"([a-g])([0-9])(.*)", re.DOTALL)

_CONTAINERS = ("mei", "music", "body", "mdiv", "score", "section", "staff", "layer")
_IGNORED_ATTRS = {XML_ID, "facs", "n"}
_NOTE_ATTRS = {"pname", "oct", "tilt"}


@dataclass(frozen=True)
class MeiNote:
    pitch: str | None
    octave: int | None
    extra: str | None = None


@dataclass(frozen=True)
class MeiSyllable:
    text: str
    notes: tuple[MeiNote, ...]


@dataclass(frozen=True)
class MeiSubsetDoc:
    syllables: tuple[MeiSyllable, ...] = ()

    @classmethod
    def from_lists(cls, syllables: Iterable[tuple[str, Iterable[tuple]]]) -> "MeiSubsetDoc":
        """``[("ve", [("c", 4), ("d", 4, "se")])]`` -> document."""
        return cls(
            tuple(
                MeiSyllable(text, tuple(MeiNote(*note) for note in notes))
                for text, notes in syllables
            )
        )


def check_document(doc: MeiSubsetDoc) -> None:
    """Raise if ``doc`` falls outside what pgabc can carry losslessly."""
    index = 0
    for s, syllable in enumerate(doc.syllables):
        if "(" in syllable.text or ")" in syllable.text:
            raise InvalidMeiDocument(f"syllable {s} text contains a parenthesis")
        if not syllable.notes:
            raise InvalidMeiDocument(f"syllable {s} ({syllable.text!r}) has no notes")
        for note in syllable.notes:
            if note.pitch is None or note.octave is None:
                raise MissingPitchOrOctave(index)
            if note.pitch not in PITCHES or len(note.pitch) != 1:
                raise InvalidMeiDocument(f"note {index}: pitch {note.pitch!r} not in a-g")
            if not isinstance(note.octave, int) or not 0 <= note.octave <= 9:
                raise InvalidMeiDocument(f"note {index}: octave {note.octave!r} not in 0-9")
            if note.extra is not None:
                if not note.extra or any(c in note.extra for c in " ()"):
                    raise InvalidMeiDocument(f"note {index}: bad shape suffix {note.extra!r}")
            index += 1


def note_token(note: MeiNote) -> str:
    return f"{note.pitch}{note.octave}{note.extra or ''}"


def mei_subset_to_score(doc: MeiSubsetDoc) -> AlignedScore:
    check_document(doc)
    return AlignedScore(
        tuple(Pair(s.text, tuple(note_token(n) for n in s.notes)) for s in doc.syllables)
    )


def mei_subset_to_pgabc(doc: MeiSubsetDoc) -> RawScoreText:
    return serialize(mei_subset_to_score(doc), EncodingKind.PGABC)


def score_to_mei_subset(score: AlignedScore) -> MeiSubsetDoc:
    syllables = []
    position = 0
    for syllable, group in score.pairs:
        notes = []
        for token in group:
            match = NOTE_TOKEN.fullmatch(token)
            if match is None:
                raise MalformedNoteToken(token, position)
            pitch, octave, extra = match.groups()
            notes.append(MeiNote(pitch, int(octave), extra or None))
            position += 1
        syllables.append(MeiSyllable(syllable, tuple(notes)))
    return MeiSubsetDoc(tuple(syllables))


def pgabc_to_mei_subset(raw: RawScoreText | str) -> MeiSubsetDoc:
    if isinstance(raw, str):
        raw = RawScoreText(EncodingKind.PGABC, raw)
    return score_to_mei_subset(parse(raw))


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _check_attrs(elem: ET.Element, allowed: set[str]) -> None:
    for name in elem.attrib:
        if name not in allowed and name not in _IGNORED_ATTRS:
            raise UnsupportedElement(f"{_local(elem.tag)}@{_local(name)}")


def _check_no_text(elem: ET.Element) -> None:
    if elem.text and elem.text.strip():
        raise UnsupportedElement(f"text inside <{_local(elem.tag)}>")
    for child in elem:
        if child.tail and child.tail.strip():
            raise UnsupportedElement(f"text after <{_local(child.tag)}>")


def _read_note(elem: ET.Element) -> MeiNote:
    _check_attrs(elem, _NOTE_ATTRS)
    if len(elem):
        raise UnsupportedElement(_local(elem[0].tag))
    pitch = elem.get("pname")
    octave = elem.get("oct")
    try:
        octave_value = int(octave) if octave is not None else None
    except ValueError:
        raise InvalidMeiDocument(f"octave {octave!r} is not an integer") from None
    return MeiNote(pitch, octave_value, elem.get("tilt"))


def _read_syllable(elem: ET.Element) -> MeiSyllable:
    _check_attrs(elem, set())
    _check_no_text(elem)
    text = None
    notes: list[MeiNote] = []
    for child in elem:
        tag = _local(child.tag)
        if tag == "syl":
            if text is not None:
                raise UnsupportedElement("second <syl> in one syllable")
            _check_attrs(child, set())
            if len(child):
                raise UnsupportedElement(_local(child[0].tag))
            text = unicodedata.normalize("NFC", child.text or "")
        elif tag == "neume":
            _check_attrs(child, set())
            _check_no_text(child)
            for nc in child:
                if _local(nc.tag) != "nc":
                    raise UnsupportedElement(_local(nc.tag))
                notes.append(_read_note(nc))
        elif tag == "note":
            notes.append(_read_note(child))
        else:
            raise UnsupportedElement(tag)
    return MeiSyllable(text or "", tuple(notes))


def _walk(elem: ET.Element, out: list[MeiSyllable]) -> None:
    tag = _local(elem.tag)
    if tag == "syllable":
        out.append(_read_syllable(elem))
        return
    if tag not in _CONTAINERS:
        raise UnsupportedElement(tag)
    _check_attrs(elem, {"meiversion"} if tag == "mei" else set())
    _check_no_text(elem)
    for child in elem:
        _walk(child, out)


def read_mei_subset(xml_text: str | bytes) -> MeiSubsetDoc:
    """Parse MEI XML restricted to the subset described in the module docstring."""
    root = ET.fromstring(xml_text)
    if _local(root.tag) != "mei":
        raise UnsupportedElement(f"root <{_local(root.tag)}>")
    syllables: list[MeiSyllable] = []
    _walk(root, syllables)
    doc = MeiSubsetDoc(tuple(syllables))
    check_document(doc)
    return doc


def write_mei_subset(doc: MeiSubsetDoc) -> str:
    check_document(doc)
    ET.register_namespace("", MEI_NS)

    def sub(parent, tag, **attrs):
        return ET.SubElement(parent, f"{{{MEI_NS}}}{tag}", attrs)

    root = ET.Element(f"{{{MEI_NS}}}mei")
    parent = root
    for tag in _CONTAINERS[1:]:
        parent = sub(parent, tag)
    for syllable in doc.syllables:
        node = sub(parent, "syllable")
        sub(node, "syl").text = syllable.text
        neume = sub(node, "neume")
        for note in syllable.notes:
            attrs = {"pname": note.pitch, "oct": str(note.octave)}
            if note.extra is not None:
                attrs["tilt"] = note.extra
            sub(neume, "nc", **attrs)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"
