"""Mine app reviews for user concerns and rank them."""

from ._core import (
    CleanReview,
    Corpus,
    DegenerateSampleError,
    DependencyError,
    EmbeddingModel,
    EmptyCorpusError,
    Error,
    IoError,
    IssueScore,
    IssueSpec,
    Lemmatizer,
    Lexicon,
    NotObservedError,
    OovError,
    Phrase,
    PhraseConfig,
    RawReview,
    StyleConfig,
    TestResult,
    TrainConfig,
    ValidationError,
    WilcoxonResult,
    a12,
    clean_text,
    combine,
    concern_score,
    cosine_similarity,
    filter_ad_reviews,
    grade,
    increase_rates,
    is_ad_token,
    load_clean_corpus,
    mds,
    merge_phrases,
    mine_phrases,
    ndcg,
    normalize_spec,
    paired_t_test,
    parse_issue_specs,
    parse_reviews,
    pearson,
    pmi,
    preprocess,
    rank,
    read_clean_jsonl,
    read_word2vec,
    render_bubbles,
    run_cli,
    score_sentence,
    shapiro_wilk,
    spearman,
    split_sentences,
    tokenize,
    top_k,
    train,
    wilcoxon,
)

__version__ = "0.1.0"


def main(argv=None):
    import sys

    args = list(sys.argv[1:] if argv is None else argv)
    code, out, err = run_cli(args)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
