import json
import random
import shutil
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from amnlt.alignment import AlignedScore
from amnlt.encoding import EncodingKind
from amnlt.errors import DuplicateId, FrameCountMismatch, SampleError, SchemaError
from amnlt.postalign import FrameLabels, Posteriorgram, frame_align_posteriorgrams
from amnlt.corpus import (
    ManifestEntry,
    corpus_stats,
    encoding_for_path,
    load_manifest,
    load_sample,
    parse_manifest,
    read_frame_labels,
    read_lyrics_transcription,
    read_music_transcription,
    read_posteriorgram,
    read_score,
    write_frame_labels,
    write_posteriorgram,
    write_score,
)

from _gen import random_score

MINI = Path(__file__).parent.parent / "fixtures" / "mini"


def write_manifest(tmp_path, entries, **extra):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"entries": entries, **extra}), encoding="utf-8")
    return path


class TestManifest:
    def test_fixture(self):
        manifest = load_manifest(MINI / "manifest.json")
        assert [e.id for e in manifest.entries] == ["s1", "s2", "s3", "s4", "s5"]
        assert manifest.split == "test"
        assert all(e.missing == () for e in manifest.entries)
        s4 = manifest.entries[3]
        assert s4.ref_encoding is s4.hyp_encoding is EncodingKind.PGABC

    def test_two_entries(self, tmp_path):
        path = write_manifest(tmp_path, [{"id": "a", "ref_path": "a.gabc"}, {"id": "b", "ref_path": "b.gabc"}])
        assert len(load_manifest(path).entries) == 2

    def test_duplicate_id(self, tmp_path):
        path = write_manifest(tmp_path, [{"id": "s1", "ref_path": "a.gabc"}, {"id": "s1", "ref_path": "b.gabc"}])
        with pytest.raises(DuplicateId) as info:
            load_manifest(path)
        assert info.value.sample_id == "s1"

    def test_absent_hypothesis(self, tmp_path):
        (tmp_path / "a.gabc").write_text("a(f)\n", encoding="utf-8")
        entry = load_manifest(write_manifest(tmp_path, [{"id": "a", "ref_path": "a.gabc"}])).entries[0]
        assert entry.hyp_path is None
        assert load_sample(entry).hypothesis is None

    def test_missing_file_flagged_not_dropped(self, tmp_path):
        path = write_manifest(tmp_path, [{"id": "a", "ref_path": "nope.gabc", "hyp_path": "x.gabc"}])
        entry = load_manifest(path).entries[0]
        assert entry.missing == ("ref_path", "hyp_path")

    @pytest.mark.parametrize(
        "data",
        [
            {},
            {"entries": [{"id": "a"}]},
            {"entries": [{"id": "a", "ref_path": "a.gabc", "colour": "red"}]},
            {"entries": [], "split": "dev"},
            {"entries": [], "format_version": 2},
            {"entries": [{"id": "a", "ref_path": "a.gabc", "ref_encoding": "volpiano"}]},
        ],
    )
    def test_schema_errors(self, data):
        with pytest.raises(SchemaError):
            parse_manifest(data, Path("."))

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_manifest(path)

    def test_encoding_from_extension(self):
        assert encoding_for_path("x/s1.hyp.magabc") is EncodingKind.MUSIC_AWARE_GABC
        assert encoding_for_path("a.sgabc") is EncodingKind.MUSIC_AWARE_GABC
        with pytest.raises(ValueError):
            encoding_for_path("a.txt")


class TestFiles:
    @settings(max_examples=100, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.integers(0, 2**32), st.sampled_from(list(EncodingKind)))
    def test_score_round_trip(self, tmp_path, seed, kind):
        score = random_score(random.Random(seed))
        path = tmp_path / f"x.{kind.extension}"
        write_score(path, score, kind)
        assert read_score(path) == score

    def test_posteriorgram_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        raw = rng.random((7, 4))
        p = Posteriorgram(raw / raw.sum(axis=1, keepdims=True), ("a", "b", "c"))
        write_posteriorgram(tmp_path / "p.csv", p)
        back = read_posteriorgram(tmp_path / "p.csv")
        assert back.vocab == p.vocab
        np.testing.assert_array_equal(back.frames, p.frames)

    def test_posteriorgram_accepts_scientific_notation(self, tmp_path):
        (tmp_path / "p.csv").write_text("blank,a\n1e0,0.0\n5E-1,0.5\n", encoding="utf-8")
        assert read_posteriorgram(tmp_path / "p.csv").num_frames == 2

    @pytest.mark.parametrize("text", ["a,b\n1,0\n", "blank,a\n1\n", "blank,a\nx,1\n"])
    def test_posteriorgram_errors(self, tmp_path, text):
        (tmp_path / "p.csv").write_text(text, encoding="utf-8")
        with pytest.raises(SchemaError):
            read_posteriorgram(tmp_path / "p.csv")

    def test_frame_labels_round_trip(self, tmp_path):
        frames = FrameLabels((None, "f", "f", None, "Ky"))
        write_frame_labels(tmp_path / "f.txt", frames)
        assert (tmp_path / "f.txt").read_text(encoding="utf-8") == "-\nf\nf\n-\nKy\n"
        assert read_frame_labels(tmp_path / "f.txt") == frames

    def test_modal_transcriptions(self):
        music = read_music_transcription(MINI / "s1.music.gabc")
        assert music.groups == (("f", "g"), ("e",), ("f",))
        assert read_lyrics_transcription(MINI / "s1.syl.txt").groups == ("Ky", "ri", "e")


class TestSample:
    def test_fixture(self):
        entries = load_manifest(MINI / "manifest.json").entries
        s2 = load_sample(entries[1])
        assert s2.reference == AlignedScore.from_pairs([("Ky", ["f", "g"]), ("ri", ["e"])])
        assert len(s2.music_frames) == len(s2.lyrics_frames) == 12
        assert load_sample(entries[0]).music_posteriorgram.num_frames == 16

    def test_error_tagged_with_id(self, tmp_path):
        (tmp_path / "bad.gabc").write_text("a(f\n", encoding="utf-8")
        entry = ManifestEntry("bad1", tmp_path / "bad.gabc", EncodingKind.PLAIN_GABC)
        with pytest.raises(SampleError) as info:
            load_sample(entry)
        assert info.value.sample_id == "bad1"

    def test_unequal_posteriorgrams_load_then_fail_in_alignment(self, tmp_path):
        shutil.copy(MINI / "s1.gabc", tmp_path)
        (tmp_path / "m.csv").write_text("blank,f\n0.1,0.9\n1,0\n", encoding="utf-8")
        (tmp_path / "l.csv").write_text("blank,Ky\n0.1,0.9\n", encoding="utf-8")
        path = write_manifest(
            tmp_path,
            [{"id": "x", "ref_path": "s1.gabc", "music_posteriorgram": "m.csv", "lyrics_posteriorgram": "l.csv"}],
        )
        sample = load_sample(load_manifest(path).entries[0])
        with pytest.raises(FrameCountMismatch):
            frame_align_posteriorgrams(sample.music_posteriorgram, sample.lyrics_posteriorgram)

    def test_loading_is_read_only(self):
        before = {p.name: p.read_bytes() for p in MINI.iterdir() if p.is_file()}
        for entry in load_manifest(MINI / "manifest.json").entries:
            load_sample(entry)
        corpus_stats(load_manifest(MINI / "manifest.json"))
        assert {p.name: p.read_bytes() for p in MINI.iterdir() if p.is_file()} == before


class TestStats:
    def test_empty(self):
        assert corpus_stats([]).systems == 0
        assert corpus_stats([]).unique_tokens == 0

    def test_fixture_matches_hand_count(self):
        expected = json.loads((MINI / "golden" / "expected_stats.json").read_text(encoding="utf-8"))
        expected.pop("_comment")
        assert corpus_stats(load_manifest(MINI / "manifest.json")).to_dict() == expected

    def test_shared_vocabulary(self, tmp_path):
        entries = []
        for i in range(3):
            (tmp_path / f"{i}.gabc").write_text("Ky(fg)\n", encoding="utf-8")
            entries.append(ManifestEntry(str(i), tmp_path / f"{i}.gabc", EncodingKind.PLAIN_GABC))
        stats = corpus_stats(entries)
        assert (stats.systems, stats.unique_tokens) == (3, 6)

    def test_failures_counted(self, tmp_path):
        (tmp_path / "bad.gabc").write_text("a(\n", encoding="utf-8")
        entries = list(load_manifest(MINI / "manifest.json").entries)
        entries.append(ManifestEntry("bad", tmp_path / "bad.gabc", EncodingKind.PLAIN_GABC))
        stats = corpus_stats(entries)
        assert stats.systems == 5
        assert stats.failed == ["bad"]

    @given(st.permutations(range(5)))
    def test_order_invariant(self, order):
        entries = load_manifest(MINI / "manifest.json").entries
        assert corpus_stats([entries[i] for i in order]) == corpus_stats(entries)
