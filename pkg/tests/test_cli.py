import json
import shutil

import pytest

from amnlt.cli import convert_text, main
from amnlt.errors import UnsupportedConversion

from _golden import MINI, load_expected, mismatches


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestValidate:
    def test_ok(self, capsys):
        code, out, _ = run(capsys, "validate", MINI / "s2.magabc", MINI / "s4.pgabc")
        assert code == 0
        assert out.count(": ok") == 2

    def test_empty_group(self, capsys, tmp_path):
        path = tmp_path / "bad.gabc"
        path.write_text("Ky()\n", encoding="utf-8")
        code, out, _ = run(capsys, "validate", path)
        assert code == 1
        assert f"{path}:2: EmptyMusicGroup" in out

    def test_unreadable(self, capsys, tmp_path):
        code, _, err = run(capsys, "validate", tmp_path / "missing.gabc")
        assert code == 2
        assert "missing.gabc" in err

    def test_strict_stops_early(self, capsys, tmp_path):
        bad = tmp_path / "bad.gabc"
        bad.write_text("a(\n", encoding="utf-8")
        code, out, _ = run(capsys, "validate", "--strict", bad, MINI / "s1.gabc")
        assert code == 1
        assert "s1.gabc" not in out

    def test_encoding_override(self, capsys, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("Ky(<m>f)\n", encoding="utf-8")
        assert run(capsys, "validate", "--encoding", "magabc", path)[0] == 0


class TestConvert:
    def test_gabc_to_magabc_golden(self, capsys, tmp_path):
        out = tmp_path / "s1.magabc"
        assert run(capsys, "convert", MINI / "s1.gabc", "--to", "magabc", "-o", out)[0] == 0
        assert out.read_bytes() == (MINI / "golden" / "s1.magabc").read_bytes()

    def test_magabc_round_trip(self, capsys, tmp_path):
        plain = tmp_path / "x.gabc"
        back = tmp_path / "x.magabc"
        run(capsys, "convert", MINI / "s3.magabc", "--to", "gabc", "-o", plain)
        run(capsys, "convert", plain, "--to", "magabc", "-o", back)
        assert back.read_bytes() == (MINI / "s3.magabc").read_bytes()

    def test_mei_to_pgabc_golden(self, capsys):
        code, out, _ = run(capsys, "convert", MINI / "amen.mei", "--to", "pgabc")
        assert code == 0
        assert out == (MINI / "golden" / "amen.pgabc").read_text(encoding="utf-8")

    def test_pgabc_to_mei_and_back(self, capsys, tmp_path):
        mei = tmp_path / "amen.mei"
        run(capsys, "convert", MINI / "golden" / "amen.pgabc", "--to", "mei", "-o", mei)
        code, out, _ = run(capsys, "convert", mei, "--to", "pgabc")
        assert code == 0
        assert out == "a(g3)men(f3 g3)\n"

    def test_unsupported(self, capsys):
        with pytest.raises(UnsupportedConversion):
            convert_text("a(f)", "gabc", "mei")
        assert run(capsys, "convert", MINI / "s1.gabc", "--to", "mei")[0] == 1

    def test_parse_error_is_domain_failure(self, capsys, tmp_path):
        path = tmp_path / "x.gabc"
        path.write_text("a(f", encoding="utf-8")
        code, _, err = run(capsys, "convert", path, "--to", "pgabc")
        assert code == 1
        assert "UnbalancedParentheses" in err

    def test_missing_input(self, capsys, tmp_path):
        assert run(capsys, "convert", tmp_path / "none.gabc", "--to", "pgabc")[0] == 2


class TestAlign:
    @pytest.mark.parametrize("method", ["syllable", "frame"])
    def test_manifest_matches_golden(self, capsys, tmp_path, method):
        code, out, _ = run(capsys, "align", "--manifest", MINI / "manifest.json", "--method", method, "-o", tmp_path)
        assert code == 0
        for sid in ("s1", "s2"):
            assert f"{sid}\tok" in out
            golden = (MINI / "golden" / "align" / f"{sid}.magabc").read_bytes()
            assert (tmp_path / f"{sid}.magabc").read_bytes() == golden
        assert "s3\tskipped" in out

    def test_pair_mode_to_stdout(self, capsys):
        code, out, err = run(
            capsys, "align", "--music", MINI / "s2.music.frames.txt",
            "--lyrics", MINI / "s2.lyrics.frames.txt", "--method", "frame", "--to", "pgabc",
        )
        assert code == 0
        assert out == "Ky(f g)ri(e)\n"
        assert "ok" in err

    def test_empty_group_marked_and_reported(self, capsys, tmp_path):
        (tmp_path / "m.txt").write_text("f\n-\n-\n-\n", encoding="utf-8")
        (tmp_path / "l.txt").write_text("a\n-\n-\nb\n", encoding="utf-8")
        argv = ["align", "--music", tmp_path / "m.txt", "--lyrics", tmp_path / "l.txt", "--method", "frame"]
        code, out, err = run(capsys, *argv)
        assert (code, out) == (0, "a(<m>f)b(<m>∅)\n")
        assert "EmptyGroup" in err
        assert run(capsys, *argv, "--strict")[0] == 1

    def test_frame_mismatch_does_not_abort_batch(self, capsys, tmp_path):
        shutil.copytree(MINI, tmp_path / "c")
        (tmp_path / "c" / "s1.lyrics.csv").write_text("blank,Ky\n0.1,0.9\n", encoding="utf-8")
        code, out, _ = run(
            capsys, "align", "--manifest", tmp_path / "c" / "manifest.json",
            "--method", "frame", "-o", tmp_path / "out", "--jobs", "2",
        )
        assert code == 1
        assert "s1\terror\tFrameCountMismatch" in out
        assert "s2\tok" in out
        assert (tmp_path / "out" / "s2.magabc").exists()

    def test_usage_errors(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["align", "--method", "frame"])
        assert info.value.code == 2
        with pytest.raises(SystemExit):
            main(["align", "--manifest", str(MINI / "manifest.json"), "--method", "frame"])


class TestEvaluate:
    def test_json_matches_goldens(self, capsys):
        code, out, _ = run(capsys, "evaluate", MINI / "manifest.json")
        assert code == 0
        report = json.loads(out)
        assert report["format_version"] == 1
        assert report["corpus"]["samples"] == 5
        assert mismatches(report, load_expected()) == []

    def test_parallel_byte_stable(self, capsys):
        first = run(capsys, "evaluate", MINI / "manifest.json", "--jobs", "4")[1]
        second = run(capsys, "evaluate", MINI / "manifest.json", "--jobs", "4")[1]
        assert first == second == run(capsys, "evaluate", MINI / "manifest.json")[1]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "evaluate", MINI / "manifest.json", "--format", "csv")
        lines = out.splitlines()
        assert code == 0
        assert lines[0].startswith("id,mer,mer_edits,mer_ref_len")
        assert [line.split(",")[0] for line in lines[1:]] == ["s1", "s2", "s3", "s4", "s5", "__corpus__"]

    def test_skips_and_errors(self, capsys, tmp_path):
        shutil.copy(MINI / "s1.gabc", tmp_path)
        (tmp_path / "bad.gabc").write_text("a(\n", encoding="utf-8")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({"entries": [
            {"id": "a", "ref_path": "s1.gabc", "hyp_path": "s1.gabc"},
            {"id": "b", "ref_path": "s1.gabc"},
            {"id": "c", "ref_path": "s1.gabc", "hyp_path": "bad.gabc"},
        ]}), encoding="utf-8")
        code, out, _ = run(capsys, "evaluate", manifest)
        report = json.loads(out)
        assert code == 1
        assert report["skipped"] == ["b"]
        assert [e["id"] for e in report["errors"]] == ["c"]
        assert report["corpus"]["amler"] == 0
        code, out, _ = run(capsys, "evaluate", manifest, "--strict")
        assert (code, out) == (1, "")

    def test_missing_manifest(self, capsys, tmp_path):
        assert run(capsys, "evaluate", tmp_path / "none.json")[0] == 2


class TestStats:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "stats", MINI / "manifest.json", "--format", "json")
        expected = json.loads((MINI / "golden" / "expected_stats.json").read_text(encoding="utf-8"))
        expected.pop("_comment")
        assert code == 0
        assert json.loads(out) == {"format_version": 1, **expected}

    def test_text(self, capsys):
        out = run(capsys, "stats", MINI / "manifest.json")[1]
        assert "unique_tokens  26" in out

    def test_empty_manifest(self, capsys, tmp_path):
        (tmp_path / "m.json").write_text('{"entries": []}', encoding="utf-8")
        out = run(capsys, "stats", tmp_path / "m.json", "--format", "csv")[1]
        assert out.splitlines()[1].startswith("0,")

    def test_unloadable_entry_warns(self, capsys, tmp_path):
        shutil.copy(MINI / "s1.gabc", tmp_path)
        (tmp_path / "m.json").write_text(json.dumps({"entries": [
            {"id": "a", "ref_path": "s1.gabc"}, {"id": "b", "ref_path": "gone.gabc"},
        ]}), encoding="utf-8")
        code, out, err = run(capsys, "stats", tmp_path / "m.json", "--format", "json")
        assert code == 0
        assert json.loads(out)["failed"] == 1
        assert json.loads(out)["systems"] == 1
        assert "1 entries could not be loaded" in err


def test_idempotent(capsys, tmp_path):
    outputs = []
    for _ in range(2):
        run(capsys, "align", "--manifest", MINI / "manifest.json", "--method", "syllable", "-o", tmp_path)
        outputs.append(sorted((p.name, p.read_bytes()) for p in tmp_path.iterdir()))
    assert outputs[0] == outputs[1]
