"""Reference-free severity scoring for pathological speech.

Baseline voice-quality features (jitter, shimmer, sigma-F0, voicing
ratio, HNR, blind SNR, CPP), an acoustic-unit language-model perplexity
score, and a speaker-level correlation harness, behind one CLI.
"""

from .audio import AudioClip, CANONICAL_RATE, compute_mfcc, load_audio
from .config import RunConfig, load_config
from .errors import (
    AudioFormatError,
    FileFormatError,
    InsufficientDataError,
    SevscoreError,
    ValidationError,
)
from .evaluation import (
    AggregatedScores,
    CorrelationReport,
    EvaluationManifest,
    aggregate_scores,
    correlate_features,
    emit_report,
    load_manifest,
)
from .features import (
    FEATURE_NAMES,
    FeatureValue,
    cpp,
    hnr,
    jitter,
    scalarize,
    shimmer,
    sigma_f0,
    voicing_ratio,
    wada_snr,
)
from .fmtx import FrameMatrix, read_frame_matrix, write_frame_matrix
from .pitch import CycleSeries, PitchTrack, estimate_pitch_track, extract_cycles
from .stats import PearsonResult, icc_2k, pearson, phoneme_error_rate
from .unitlm import UnitLanguageModel, load_unit_lm, save_unit_lm, speechlm_score, train_unit_lm
from .units import (
    Codebook,
    UnitSequence,
    encode_units,
    load_codebook,
    save_codebook,
    train_codebook,
)

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "AudioFormatError",
    "AggregatedScores",
    "CANONICAL_RATE",
    "Codebook",
    "CorrelationReport",
    "CycleSeries",
    "EvaluationManifest",
    "FEATURE_NAMES",
    "FeatureValue",
    "FileFormatError",
    "FrameMatrix",
    "InsufficientDataError",
    "PearsonResult",
    "PitchTrack",
    "RunConfig",
    "SevscoreError",
    "UnitLanguageModel",
    "UnitSequence",
    "ValidationError",
    "aggregate_scores",
    "compute_mfcc",
    "correlate_features",
    "cpp",
    "emit_report",
    "encode_units",
    "estimate_pitch_track",
    "extract_cycles",
    "hnr",
    "icc_2k",
    "jitter",
    "load_audio",
    "load_codebook",
    "load_config",
    "load_manifest",
    "load_unit_lm",
    "pearson",
    "phoneme_error_rate",
    "read_frame_matrix",
    "save_codebook",
    "save_unit_lm",
    "scalarize",
    "shimmer",
    "sigma_f0",
    "speechlm_score",
    "train_codebook",
    "train_unit_lm",
    "voicing_ratio",
    "wada_snr",
    "write_frame_matrix",
]
