"""Corpus manifests and the on-disk formats every other module reads.

Manifest (UTF-8 JSON)::

    {
      "format_version": 1,
      "split": "test",                      # optional: train | val | test
      "entries": [
        {
          "id": "s1",
          "ref_path": "s1.gabc",            # relative to the manifest
          "ref_encoding": "gabc",           # optional, else from extension
          "hyp_path": "s1.hyp.gabc",        # optional
          "hyp_encoding": "gabc",           # optional, defaults to ref's
          "music_posteriorgram": "...csv",  # optional
          "lyrics_posteriorgram": "...csv", # optional
          "music_frames": "...frames.txt",  # optional
          "lyrics_frames": "...frames.txt", # optional
          "music_transcription": "...",     # optional, score text, empty syllables
          "lyrics_transcription": "..."     # optional, one syllable per line
        }
      ]
    }

Posteriorgram CSV: header ``blank,<label>,...``, then one row of
probabilities per frame. Frame label files: one label per line, ``-`` for
blank.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import jsonschema
import numpy as np

from .alignment import AlignedScore
from .encoding import EncodingKind, build_vocabulary, parse, serialize
from .errors import DuplicateId, SampleError, SchemaError
from .postalign import FrameLabels, ModalTranscription, Posteriorgram

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
BLANK_LABEL = "-"

PATH_FIELDS = (
    "ref_path",
    "hyp_path",
    "music_posteriorgram",
    "lyrics_posteriorgram",
    "music_frames",
    "lyrics_frames",
    "music_transcription",
    "lyrics_transcription",
)

_ENCODING_NAMES = ["gabc", "magabc", "sgabc", "pgabc"]

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["entries"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "split": {"enum": ["train", "val", "test"]},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "ref_path"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "ref_encoding": {"enum": _ENCODING_NAMES},
                    "hyp_encoding": {"enum": _ENCODING_NAMES},
                    **{name: {"type": "string", "minLength": 1} for name in PATH_FIELDS},
                },
            },
        },
    },
}


def encoding_for_path(path: str | Path) -> EncodingKind:
    """Infer the score encoding from the last suffix (``.gabc``, ``.magabc``, ...)."""
    suffix = Path(path).suffix
    try:
        return EncodingKind.from_name(suffix)
    except ValueError:
        raise ValueError(f"cannot infer a score encoding from {str(path)!r}") from None


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    ref_path: Path
    ref_encoding: EncodingKind
    hyp_path: Path | None = None
    hyp_encoding: EncodingKind | None = None
    music_posteriorgram: Path | None = None
    lyrics_posteriorgram: Path | None = None
    music_frames: Path | None = None
    lyrics_frames: Path | None = None
    music_transcription: Path | None = None
    lyrics_transcription: Path | None = None
    #: names of path fields whose file did not exist at load time
    missing: tuple[str, ...] = ()


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    split: str | None = None
    path: Path | None = None


def parse_manifest(data: dict, base_dir: Path) -> CorpusManifest:
    try:
        jsonschema.validate(data, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None

    seen = set()
    entries = []
    for raw in data["entries"]:
        if raw["id"] in seen:
            raise DuplicateId(raw["id"])
        seen.add(raw["id"])
        paths = {name: base_dir / raw[name] for name in PATH_FIELDS if name in raw}
        ref_encoding = (
            EncodingKind.from_name(raw["ref_encoding"])
            if "ref_encoding" in raw
            else encoding_for_path(paths["ref_path"])
        )
        hyp_encoding = None
        if "hyp_path" in paths:
            if "hyp_encoding" in raw:
                hyp_encoding = EncodingKind.from_name(raw["hyp_encoding"])
            else:
                hyp_encoding = ref_encoding
        missing = tuple(name for name, p in paths.items() if not p.is_file())
        for name in missing:
            log.warning("entry %s: %s %s does not exist", raw["id"], name, paths[name])
        entries.append(
            ManifestEntry(
                id=raw["id"],
                ref_encoding=ref_encoding,
                hyp_encoding=hyp_encoding,
                missing=missing,
                **paths,
            )
        )
    return CorpusManifest(tuple(entries), data.get("split"))


def load_manifest(path: str | Path) -> CorpusManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    manifest = parse_manifest(data, path.parent)
    return CorpusManifest(manifest.entries, manifest.split, path)


def read_text(path: str | Path) -> str:
    """Read a UTF-8 file and drop a single trailing line break."""
    text = Path(path).read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


def read_score(path: str | Path, encoding: EncodingKind | None = None) -> AlignedScore:
    return parse(read_text(path), encoding or encoding_for_path(path))


def write_score(path: str | Path, score: AlignedScore, encoding: EncodingKind) -> None:
    Path(path).write_text(serialize(score, encoding).text + "\n", encoding="utf-8")


def read_posteriorgram(path: str | Path) -> Posteriorgram:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or not rows[0] or rows[0][0] != "blank":
        raise SchemaError(f"{path}: header must start with 'blank'")
    header = rows[0]
    try:
        frames = [[float(x) for x in row] for row in rows[1:] if row]
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    if any(len(row) != len(header) for row in frames):
        raise SchemaError(f"{path}: every row needs {len(header)} columns")
    matrix = np.array(frames, dtype=float).reshape(len(frames), len(header))
    return Posteriorgram(matrix, tuple(header[1:]))


def write_posteriorgram(path: str | Path, p: Posteriorgram) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["blank", *p.vocab])
    for row in p.frames:
        writer.writerow([repr(float(x)) for x in row])
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")


def read_frame_labels(path: str | Path) -> FrameLabels:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return FrameLabels(tuple(None if line == BLANK_LABEL else line for line in lines))


def write_frame_labels(path: str | Path, frames: FrameLabels) -> None:
    lines = [BLANK_LABEL if label is None else label for label in frames.labels]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_music_transcription(path: str | Path) -> ModalTranscription:
    """Music-only model output: a score whose syllables are all empty, e.g. ``(f g)(e)``."""
    score = read_score(path)
    return ModalTranscription.music([pair.group for pair in score.pairs])


def read_lyrics_transcription(path: str | Path) -> ModalTranscription:
    text = read_text(path)
    return ModalTranscription.lyrics(text.split("\n") if text else [])


@dataclass
class Sample:
    id: str
    reference: AlignedScore
    hypothesis: AlignedScore | None = None
    music_posteriorgram: Posteriorgram | None = None
    lyrics_posteriorgram: Posteriorgram | None = None
    music_frames: FrameLabels | None = None
    lyrics_frames: FrameLabels | None = None
    music_transcription: ModalTranscription | None = None
    lyrics_transcription: ModalTranscription | None = None


_READERS = {
    "music_posteriorgram": read_posteriorgram,
    "lyrics_posteriorgram": read_posteriorgram,
    "music_frames": read_frame_labels,
    "lyrics_frames": read_frame_labels,
    "music_transcription": read_music_transcription,
    "lyrics_transcription": read_lyrics_transcription,
}


def load_reference(entry: ManifestEntry) -> AlignedScore:
    try:
        return read_score(entry.ref_path, entry.ref_encoding)
    except Exception as exc:
        raise SampleError(entry.id, exc) from exc


def load_sample(entry: ManifestEntry) -> Sample:
    """Read everything an entry points at.

    Files are only read, never checked against each other: two
    posteriorgrams of different length load fine and fail later in
    ``frame_align``.
    """
    try:
        sample = Sample(entry.id, read_score(entry.ref_path, entry.ref_encoding))
        if entry.hyp_path is not None:
            sample.hypothesis = read_score(entry.hyp_path, entry.hyp_encoding)
        for name, reader in _READERS.items():
            path = getattr(entry, name)
            if path is not None:
                setattr(sample, name, reader(path))
    except Exception as exc:
        raise SampleError(entry.id, exc) from exc
    return sample


@dataclass
class CorpusStats:
    systems: int
    unique_tokens: int
    music_vocab: int
    lyric_vocab: int
    failed: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "systems": self.systems,
            "unique_tokens": self.unique_tokens,
            "music_vocab": self.music_vocab,
            "lyric_vocab": self.lyric_vocab,
            "failed": len(self.failed),
        }


def corpus_stats(manifest: CorpusManifest | Iterable[ManifestEntry]) -> CorpusStats:
    """Size and vocabulary statistics over every loadable reference.

    ``systems`` counts the references that loaded; ids of the others are
    listed in ``failed``.
    """
    entries = manifest.entries if isinstance(manifest, CorpusManifest) else manifest
    scores = []
    failed = []
    for entry in entries:
        try:
            scores.append(load_reference(entry))
        except SampleError as exc:
            log.warning("%s", exc)
            failed.append(entry.id)
    vocab = build_vocabulary(scores)
    return CorpusStats(
        systems=len(scores),
        unique_tokens=vocab.unique_total,
        music_vocab=len(vocab.music_tokens),
        lyric_vocab=len(vocab.lyric_chars),
        failed=sorted(failed),
    )
