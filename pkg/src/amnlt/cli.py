"""``amnlt`` command line: validate, convert, align, evaluate, stats.

Exit status: 0 success, 1 domain failure (parse error, alignment violation,
failed sample), 2 I/O or usage error. Set ``AMNLT_LOG`` (e.g. ``INFO``,
``DEBUG``) to change log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .alignment import PLACEHOLDER, AlignedScore, Pair, validate_alignment
from .corpus import (
    FORMAT_VERSION,
    ManifestEntry,
    corpus_stats,
    encoding_for_path,
    load_manifest,
    load_sample,
    read_frame_labels,
    read_lyrics_transcription,
    read_music_transcription,
    read_posteriorgram,
    read_text,
)
from .encoding import (
    EncodingKind,
    RawScoreText,
    from_music_aware,
    parse,
    serialize,
    to_music_aware,
)
from .errors import AmnltError, SampleError, UnsupportedConversion
from .mei import (
    mei_subset_to_pgabc,
    mei_subset_to_score,
    pgabc_to_mei_subset,
    read_mei_subset,
    write_mei_subset,
)
from .metrics import METRICS, MetricReport, aggregate, evaluate
from .postalign import frame_align, frame_align_posteriorgrams, syllable_align

log = logging.getLogger("amnlt")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2

SCORE_ENCODINGS = ["gabc", "magabc", "sgabc", "pgabc"]
MEI = "mei"


class UsageError(Exception):
    pass


def _configure_logging() -> None:
    level = os.environ.get("AMNLT_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="amnlt: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )


def _write_output(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _input_format(path: str, name: str | None) -> str:
    if name is not None:
        return MEI if name == MEI else EncodingKind.from_name(name).value
    if Path(path).suffix.lower() in (".mei", ".xml"):
        return MEI
    return encoding_for_path(path).value


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# validate -------------------------------------------------------------------


def cmd_validate(args) -> int:
    status = EXIT_OK
    for path in args.paths:
        try:
            kind = EncodingKind.from_name(args.encoding) if args.encoding else encoding_for_path(path)
            text = read_text(path)
        except OSError as exc:
            print(f"{path}: {exc.strerror or exc}", file=sys.stderr)
            status = EXIT_IO
        except ValueError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            status = EXIT_IO
        else:
            problems = _validate_text(path, text, kind)
            for line in problems:
                print(line)
            if not problems:
                print(f"{path}: ok")
            elif status == EXIT_OK:
                status = EXIT_DOMAIN
        if status != EXIT_OK and args.strict:
            break
    return status


def _validate_text(path: str, text: str, kind: EncodingKind) -> list[str]:
    try:
        score = parse(text, kind)
    except AmnltError as exc:
        where = "" if getattr(exc, "position", None) is None else f"{exc.position}:"
        return [f"{path}:{where} {type(exc).__name__}: {getattr(exc, 'reason', exc)}"]
    return [f"{path}:pair {v.pair_index}: {v.rule} {v.detail}".rstrip() for v in validate_alignment(score)]


# convert --------------------------------------------------------------------


def convert_text(text: str, source: str, target: str) -> str:
    """Convert between score encodings and the MEI subset."""
    if source == target == MEI:
        return write_mei_subset(read_mei_subset(text))
    if target == MEI:
        if source != EncodingKind.PGABC.value:
            raise UnsupportedConversion(f"{source} -> mei (only pgabc carries note tokens)")
        return write_mei_subset(pgabc_to_mei_subset(text))
    out_kind = EncodingKind.from_name(target)
    if source == MEI:
        doc = read_mei_subset(text)
        if out_kind is EncodingKind.PGABC:
            return mei_subset_to_pgabc(doc).text + "\n"
        return serialize(mei_subset_to_score(doc), out_kind).text + "\n"
    in_kind = EncodingKind.from_name(source)
    # the prefix rule works on raw text, so headers and spacing survive intact
    if (in_kind, out_kind) == (EncodingKind.PLAIN_GABC, EncodingKind.MUSIC_AWARE_GABC):
        return to_music_aware(RawScoreText(in_kind, text)).text + "\n"
    if (in_kind, out_kind) == (EncodingKind.MUSIC_AWARE_GABC, EncodingKind.PLAIN_GABC):
        return from_music_aware(RawScoreText(in_kind, text)).text + "\n"
    return serialize(parse(text, in_kind), out_kind).text + "\n"


def cmd_convert(args) -> int:
    try:
        source = _input_format(args.input, args.encoding)
        target = MEI if args.to == MEI else EncodingKind.from_name(args.to).value
        raw = read_text(args.input)
    except (OSError, ValueError) as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        result = convert_text(raw, source, target)
    except (AmnltError, SyntaxError) as exc:
        print(f"{args.input}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        _write_output(result, args.output)
    except OSError as exc:
        print(f"{args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# align ----------------------------------------------------------------------


def mark_empty_groups(score: AlignedScore) -> AlignedScore:
    """Write empty groups with the placeholder token so they stay visible on disk."""
    return AlignedScore(
        tuple(Pair(s, g if g else (PLACEHOLDER,)) for s, g in score.pairs)
    )


_ALIGN_INPUTS = {
    "syllable": [("music_transcription", "lyrics_transcription")],
    "frame": [("music_frames", "lyrics_frames"), ("music_posteriorgram", "lyrics_posteriorgram")],
}


def _align_sample(task) -> dict:
    sample_id, paths, method, options = task
    needs = _ALIGN_INPUTS[method]
    if not any(all(name in paths for name in names) for names in needs):
        wanted = " or ".join(" + ".join(names) for names in needs)
        return {"id": sample_id, "skipped": f"needs {wanted}"}
    try:
        if method == "syllable":
            score = syllable_align(
                read_music_transcription(paths["music_transcription"]),
                read_lyrics_transcription(paths["lyrics_transcription"]),
            )
        elif "music_frames" in paths and "lyrics_frames" in paths:
            score = frame_align(
                read_frame_labels(paths["music_frames"]),
                read_frame_labels(paths["lyrics_frames"]),
                **options,
            )
        else:
            score = frame_align_posteriorgrams(
                read_posteriorgram(paths["music_posteriorgram"]),
                read_posteriorgram(paths["lyrics_posteriorgram"]),
                **options,
            )
    except (AmnltError, OSError, ValueError) as exc:
        return {"id": sample_id, "error": f"{type(exc).__name__}: {exc}"}
    return {"id": sample_id, "score": score, "violations": [str(v) for v in validate_alignment(score)]}


def _entry_paths(entry: ManifestEntry) -> dict[str, Path]:
    names = (
        "music_transcription",
        "lyrics_transcription",
        "music_frames",
        "lyrics_frames",
        "music_posteriorgram",
        "lyrics_posteriorgram",
    )
    return {name: getattr(entry, name) for name in names if getattr(entry, name) is not None}


def _pair_paths(args) -> dict[str, Path]:
    if args.method == "syllable":
        kind = "transcription"
    elif Path(args.music).suffix == ".csv":
        kind = "posteriorgram"
    else:
        kind = "frames"
    return {f"music_{kind}": Path(args.music), f"lyrics_{kind}": Path(args.lyrics)}


def cmd_align(args) -> int:
    if bool(args.manifest) == bool(args.music or args.lyrics):
        raise UsageError("give either --manifest or both --music and --lyrics")
    if not args.manifest and not (args.music and args.lyrics):
        raise UsageError("--music and --lyrics must be given together")
    if args.manifest and args.output is None:
        raise UsageError("--output DIR is required with --manifest")
    out_kind = EncodingKind.from_name(args.to)
    options = {
        "syllable_separator": args.syllable_separator,
        "music_separator": args.music_separator,
    } if args.method == "frame" else {}

    if args.manifest:
        try:
            entries = load_manifest(args.manifest).entries
        except OSError as exc:
            print(f"{args.manifest}: {exc}", file=sys.stderr)
            return EXIT_IO
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        tasks = [
            (e.id, _entry_paths(e), args.method, options)
            for e in sorted(entries, key=lambda e: e.id)
        ]
    else:
        out_dir = None
        tasks = [(Path(args.music).stem, _pair_paths(args), args.method, options)]

    results = _map(_align_sample, tasks, args.jobs)

    # with a single pair the score goes to stdout, so the summary moves to stderr
    summary = sys.stdout if out_dir is not None else sys.stderr
    status = EXIT_OK
    for result in results:
        sample_id = result["id"]
        if "skipped" in result:
            print(f"{sample_id}\tskipped\t{result['skipped']}", file=summary)
        elif "error" in result:
            print(f"{sample_id}\terror\t{result['error']}", file=summary)
            status = EXIT_DOMAIN
        else:
            status = max(status, _write_aligned(result, out_kind, out_dir, args, summary))
        if status != EXIT_OK and args.strict:
            break
    return status


def _write_aligned(result: dict, out_kind: EncodingKind, out_dir: Path | None, args, summary) -> int:
    sample_id = result["id"]
    try:
        text = serialize(mark_empty_groups(result["score"]), out_kind).text + "\n"
    except AmnltError as exc:
        print(f"{sample_id}\terror\t{type(exc).__name__}: {exc}", file=summary)
        return EXIT_DOMAIN
    if out_dir is not None:
        (out_dir / f"{sample_id}{out_kind.extension}").write_text(text, encoding="utf-8")
    else:
        _write_output(text, args.output)
    if result["violations"]:
        print(f"{sample_id}\tviolations\t{'; '.join(result['violations'])}", file=summary)
        return EXIT_DOMAIN if args.strict else EXIT_OK
    print(f"{sample_id}\tok", file=summary)
    return EXIT_OK


# evaluate -------------------------------------------------------------------


def _evaluate_entry(entry: ManifestEntry) -> dict:
    if entry.hyp_path is None:
        return {"id": entry.id, "skipped": "no hypothesis"}
    try:
        sample = load_sample(entry)
    except SampleError as exc:
        return {"id": entry.id, "error": f"{type(exc.cause).__name__}: {exc.cause}"}
    return {"id": entry.id, "report": evaluate(sample.reference, sample.hypothesis)}


def evaluate_entries(entries: Iterable[ManifestEntry], jobs: int = 1) -> dict:
    """Per-sample reports in id order plus the micro-averaged corpus report."""
    ordered = sorted(entries, key=lambda e: e.id)
    results = _map(_evaluate_entry, ordered, jobs)
    reports = [(r["id"], r["report"]) for r in results if "report" in r]
    for r in results:
        if "skipped" in r:
            log.warning("%s skipped: %s", r["id"], r["skipped"])
        elif "error" in r:
            log.error("%s failed: %s", r["id"], r["error"])
    return {
        "samples": reports,
        "corpus": aggregate(report for _, report in reports),
        "skipped": [r["id"] for r in results if "skipped" in r],
        "errors": [{"id": r["id"], "error": r["error"]} for r in results if "error" in r],
    }


def report_json(result: dict) -> str:
    payload = {
        "format_version": FORMAT_VERSION,
        "samples": [{"id": sid, **report.to_dict()} for sid, report in result["samples"]],
        "corpus": {"samples": len(result["samples"]), **result["corpus"].to_dict()},
        "skipped": result["skipped"],
        "errors": result["errors"],
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv_columns() -> list[str]:
    columns = ["id"]
    for name in METRICS:
        columns += [name, f"{name}_edits", f"{name}_ref_len"]
    return columns


def report_csv(result: dict) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_csv_columns(), lineterminator="\n")
    writer.writeheader()
    rows: list[tuple[str, MetricReport]] = list(result["samples"])
    rows.append(("__corpus__", result["corpus"]))
    for sample_id, report in rows:
        record = {k: ("" if v is None else repr(v)) for k, v in report.to_dict().items()}
        writer.writerow({"id": sample_id, **record})
    return buffer.getvalue()


def cmd_evaluate(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except OSError as exc:
        print(f"{args.manifest}: {exc}", file=sys.stderr)
        return EXIT_IO
    result = evaluate_entries(manifest.entries, args.jobs)
    if result["errors"] and args.strict:
        for error in result["errors"]:
            print(f"{error['id']}: {error['error']}", file=sys.stderr)
        return EXIT_DOMAIN
    text = report_json(result) if args.format == "json" else report_csv(result)
    try:
        _write_output(text, args.output)
    except OSError as exc:
        print(f"{args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    if result["skipped"]:
        print(f"skipped {len(result['skipped'])} entries without hypothesis", file=sys.stderr)
    return EXIT_DOMAIN if result["errors"] else EXIT_OK


# stats ----------------------------------------------------------------------


def cmd_stats(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except OSError as exc:
        print(f"{args.manifest}: {exc}", file=sys.stderr)
        return EXIT_IO
    stats = corpus_stats(manifest).to_dict()
    if args.format == "json":
        text = json.dumps({"format_version": FORMAT_VERSION, **stats}, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        text = ",".join(stats) + "\n" + ",".join(str(v) for v in stats.values()) + "\n"
    else:
        width = max(len(k) for k in stats)
        text = "".join(f"{k.ljust(width)}  {v}\n" for k, v in stats.items())
    if stats["failed"]:
        print(f"warning: {stats['failed']} entries could not be loaded", file=sys.stderr)
    _write_output(text, args.output)
    return EXIT_OK


# entry point ----------------------------------------------------------------


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amnlt", description="Aligned music notation and lyrics transcription tools."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse score files and check alignment invariants")
    p.add_argument("paths", nargs="+")
    p.add_argument("--encoding", choices=SCORE_ENCODINGS)
    p.add_argument("--strict", action="store_true", help="stop at the first failing file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convert", help="convert between gabc, magabc, pgabc and the MEI subset")
    p.add_argument("input")
    p.add_argument("--encoding", choices=SCORE_ENCODINGS + [MEI], help="input format (default: from extension)")
    p.add_argument("--to", required=True, choices=["gabc", "magabc", "pgabc", MEI])
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("align", help="fuse music and lyrics transcriptions")
    p.add_argument("--manifest")
    p.add_argument("--music", help="music transcription, frame labels or posteriorgram")
    p.add_argument("--lyrics", help="lyrics syllables, frame labels or posteriorgram")
    p.add_argument("--method", choices=["syllable", "frame"], required=True)
    p.add_argument("--to", default="magabc", choices=["gabc", "magabc", "pgabc"])
    p.add_argument("--syllable-separator", help="lyric label that ends a syllable (frame method)")
    p.add_argument("--music-separator", help="music label to drop (frame method)")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--output", "-o", help="output file, or directory with --manifest")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="compute MER, CER, SylER, AMLER, bWER and AlER")
    p.add_argument("manifest")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--strict", action="store_true", help="fail without a report if any sample fails")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="corpus statistics: systems and vocabulary sizes")
    p.add_argument("manifest")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except AmnltError as exc:
        print(f"amnlt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"amnlt: {exc}", file=sys.stderr)
        return EXIT_IO


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
