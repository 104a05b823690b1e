"""Python bindings for the conversational pipeline engine."""

from ._led import (
    BackendError,
    Engine,
    Error,
    Gazetteer,
    InvalidInput,
    ParseError,
    PassageIndex,
    ResourceError,
    RouterModel,
    SafetyConfig,
    ZeroProbabilityError,
    check_inconsistent,
    check_toxic,
    decode,
    exact_match,
    extract_entities,
    fuse_scores,
    greedy_decode,
    mrr,
    normalize_nfc,
    paraphrase,
    perplexity,
    recall_at_k,
    round_half_up,
    rouge,
    route,
    sequence_logprob,
    ssa_from_rates,
    token_f1,
    tokenize,
    train_router,
    validate_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
