"""Answer-quality metrics implemented from scratch.

BLEU, ROUGE-1/2/L, METEOR (exact + stem stages, no synonym lexicon), and a
greedy-matching embedding score over token embeddings. All scalar scores are
reported on a 0-100 scale; precision/recall/f1 inside a MetricScore are on
the unit scale.

Tokenization is pinned: lowercase, split on whitespace, strip leading and
trailing punctuation from each token, drop tokens that become empty.
"""

from __future__ import annotations

import logging
import math
import string
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import _kernels
from .stemmer import stem

logger = logging.getLogger(__name__)

_PUNCT = string.punctuation


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class MetricScore:
    """One metric outcome; precision/recall are None where the metric defines none."""

    name: str
    precision: float | None
    recall: float | None
    f1: float
    scalar: float  # 0-100 reporting scale


class TokenEmbeddingProvider(Protocol):
    def embed_tokens(self, text: str): ...


def tokenize(text: str) -> TokenSeq:
    toks = []
    for raw in text.lower().split():
        t = raw.strip(_PUNCT)
        if t:
            toks.append(t)
    return TokenSeq(tuple(toks))


def _ngrams(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1))


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


# ---------------------------------------------------------------------------
# BLEU

def bleu(candidate: TokenSeq, references: list[TokenSeq], max_n: int = 4) -> float:
    """Clipped n-gram precision BLEU with brevity penalty, 0-100.

    Smoothing rule: for n >= 2 with zero matches, p_n = 1/(2*(c_n + 1)) where
    c_n is the candidate n-gram count. p_1 == 0 short-circuits to 0.
    """
    if len(candidate) == 0:
        logger.warning("bleu: empty candidate, returning 0 (degenerate)")
        return 0.0
    if not references or any(len(r) == 0 for r in references):
        raise ValueError("bleu requires at least one non-empty reference")

    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(candidate.tokens, n)
        total = sum(cand_counts.values())
        clipped = 0
        for gram, cnt in cand_counts.items():
            best_ref = max(_ngrams(r.tokens, n).get(gram, 0) for r in references)
            clipped += min(cnt, best_ref)
        if n == 1:
            if clipped == 0:
                return 0.0
            p = clipped / total
        elif clipped == 0:
            p = 1.0 / (2 * (total + 1))
        else:
            p = clipped / total
        log_sum += math.log(p)

    c = len(candidate)
    r = min((len(ref) for ref in references), key=lambda L: (abs(L - c), L))
    bp = min(1.0, math.exp(1 - r / c))
    return 100.0 * bp * math.exp(log_sum / max_n)


# ---------------------------------------------------------------------------
# ROUGE

def rouge_n(candidate: TokenSeq, reference: TokenSeq, n: int) -> MetricScore:
    """N-gram overlap with multiset clipping, n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    ref_counts = _ngrams(reference.tokens, n)
    ref_total = sum(ref_counts.values())
    if ref_total == 0:
        raise ValueError(f"reference shorter than n={n} tokens: recall undefined")
    cand_counts = _ngrams(candidate.tokens, n)
    cand_total = sum(cand_counts.values())
    overlap = sum(min(cnt, ref_counts.get(g, 0)) for g, cnt in cand_counts.items())
    recall = overlap / ref_total
    precision = overlap / cand_total if cand_total else 0.0
    f1 = _harmonic(precision, recall)
    return MetricScore(f"rouge{n}", precision, recall, f1, 100.0 * f1)


def rouge_l(candidate: TokenSeq, reference: TokenSeq) -> MetricScore:
    """Longest-common-subsequence F1 (beta = 1)."""
    if len(candidate) == 0 or len(reference) == 0:
        raise ValueError("rouge_l requires non-empty candidate and reference")
    vocab: dict[str, int] = {}
    a = np.array([vocab.setdefault(t, len(vocab)) for t in candidate.tokens], dtype=np.int64)
    b = np.array([vocab.setdefault(t, len(vocab)) for t in reference.tokens], dtype=np.int64)
    lcs = _kernels.lcs_length(a, b)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    f1 = _harmonic(precision, recall)
    return MetricScore("rougeL", precision, recall, f1, 100.0 * f1)


# ---------------------------------------------------------------------------
# METEOR (exact + stem stages)

_ALPHA = 0.9   # recall weight in F_mean
_BETA = 3.0    # penalty exponent
_GAMMA = 0.5   # penalty weight


def _align(candidate: tuple[str, ...], reference: tuple[str, ...]) -> list[tuple[int, int]]:
    """Two-stage unigram alignment, leftmost pairing within each stage."""
    pairs: dict[int, int] = {}
    used_ref: set[int] = set()

    def run_stage(key):
        ref_keys = [key(t) for t in reference]
        for i, tok in enumerate(candidate):
            if i in pairs:
                continue
            ck = key(tok)
            for j, rk in enumerate(ref_keys):
                if j not in used_ref and rk == ck:
                    pairs[i] = j
                    used_ref.add(j)
                    break

    run_stage(lambda t: t)
    run_stage(stem)
    return sorted(pairs.items())


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for ci, ri in pairs:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor(candidate: TokenSeq, reference: TokenSeq) -> float:
    """METEOR with exact and Porter-stem matching, 0-100."""
    if len(candidate) == 0 or len(reference) == 0:
        raise ValueError("meteor requires non-empty candidate and reference")
    pairs = _align(candidate.tokens, reference.tokens)
    m = len(pairs)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    f_mean = p * r / (_ALPHA * p + (1 - _ALPHA) * r)
    penalty = _GAMMA * (_count_chunks(pairs) / m) ** _BETA
    return 100.0 * f_mean * (1 - penalty)


# ---------------------------------------------------------------------------
# Embedding-based greedy matching

def bert_score(candidate: TokenSeq, reference: TokenSeq,
               embedder: TokenEmbeddingProvider) -> MetricScore:
    """Greedy token matching over embeddings: each side's tokens take their
    best cosine against the other side; means give recall/precision."""
    if len(candidate) == 0 or len(reference) == 0:
        raise ValueError("bert_score requires non-empty candidate and reference")
    cand_emb = embedder.embed_tokens(" ".join(candidate.tokens))
    ref_emb = embedder.embed_tokens(" ".join(reference.tokens))
    cm = np.stack([te.vector for te in cand_emb])
    rm = np.stack([te.vector for te in ref_emb])
    cm = cm / np.linalg.norm(cm, axis=1, keepdims=True)
    rm = rm / np.linalg.norm(rm, axis=1, keepdims=True)
    sim = cm @ rm.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    f1 = _harmonic(precision, recall)
    return MetricScore("bert", precision, recall, f1, 100.0 * f1)


# ---------------------------------------------------------------------------
# Report assembly (Table-style cells on the percent scale)

METEOR_VARIANT = "meteor-es"  # exact + stem stages only


def score_pair(candidate_text: str, reference_text: str,
               embedder: TokenEmbeddingProvider) -> dict:
    """All metrics for one candidate/reference pair, percent scale."""
    cand = tokenize(candidate_text)
    ref = tokenize(reference_text)
    if len(ref) == 0:
        raise ValueError("reference tokenized to nothing")
    if len(cand) == 0:
        zero = {"p": 0.0, "r": 0.0, "f": 0.0}
        return {"bert": dict(zero), "rouge1": dict(zero), "rouge2": dict(zero),
                "rougeL": dict(zero), "bleu": 0.0, "meteor": 0.0}
    b = bert_score(cand, ref, embedder)
    r1 = rouge_n(cand, ref, 1)
    r2 = rouge_n(cand, ref, 2) if len(ref) >= 2 else None
    rl = rouge_l(cand, ref)

    def cell(ms: MetricScore | None) -> dict:
        if ms is None:
            return {"p": 0.0, "r": 0.0, "f": 0.0}
        return {"p": 100.0 * ms.precision, "r": 100.0 * ms.recall, "f": 100.0 * ms.f1}

    return {
        "bert": cell(b),
        "rouge1": cell(r1),
        "rouge2": cell(r2),
        "rougeL": cell(rl),
        "bleu": bleu(cand, [ref]),
        "meteor": meteor(cand, ref),
    }


def mean_scores(rows: list[dict]) -> dict:
    """Arithmetic mean of score_pair outputs (sentence-level averaging)."""
    if not rows:
        raise ValueError("cannot average zero score rows")
    out: dict = {}
    for key in ("bert", "rouge1", "rouge2", "rougeL"):
        out[key] = {f: sum(r[key][f] for r in rows) / len(rows) for f in ("p", "r", "f")}
    for key in ("bleu", "meteor"):
        out[key] = sum(r[key] for r in rows) / len(rows)
    return out
