"""vsLDA: LDA with model-based selection of informative words."""

from ._core import (
    ArgumentError,
    BestMatch,
    ChainConfig,
    ChainResult,
    ConsistencyReport,
    Corpus,
    CorpusSplit,
    DegeneratePartitionError,
    GroundTruth,
    HeldoutResult,
    HyperParams,
    NumericalError,
    ParseError,
    PosteriorSummary,
    SweepDiagnostics,
    SyntheticSpec,
    TopicMatch,
    WordStats,
    best_match_divergence,
    compare_runs,
    compute_word_stats,
    ctf_idf,
    generate,
    heldout_loglik,
    hungarian,
    jaccard,
    load_corpus,
    read_summary,
    save_sparse,
    save_vocab,
    set_log_level,
    split_corpus,
    symmetric_kl,
    train,
    write_summary,
)

__version__ = "0.1.0"
