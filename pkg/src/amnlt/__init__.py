"""Aligned music notation and lyrics transcription: encodings, alignment and metrics."""

__version__ = "0.1.0"

from .alignment import (
    PLACEHOLDER,
    AlignedScore,
    Pair,
    StreamToken,
    Violation,
    align_of,
    extract_music,
    extract_syllables,
    interleave,
    is_valid,
    validate_alignment,
)
from .encoding import (
    EncodingKind,
    RawScoreText,
    Token,
    TokenKind,
    build_vocabulary,
    from_music_aware,
    parse,
    serialize,
    to_music_aware,
    tokenize,
)
from .metrics import MetricReport, aler, amler, bwer, cer, edit_distance, evaluate, mer, syler
from .postalign import (
    FrameLabels,
    ModalTranscription,
    Posteriorgram,
    ctc_greedy_decode,
    frame_align,
    syllable_align,
)
