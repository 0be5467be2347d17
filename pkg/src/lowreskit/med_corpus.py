"""Medical parallel-corpus extraction from a general aligned corpus.

An aligned (difficult, simple) sentence pair is kept as medical when its
difficult sentence matches enough distinct terms from a medical dictionary
and its article title matches at least one. Term matching is approximate:
Jaccard similarity over character-trigram multisets of the lowercased,
whitespace-normalized strings, accepted at or above the dictionary's
threshold (default 0.85).
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

DEFAULT_SIMILARITY_THRESHOLD = 0.85
DEFAULT_MIN_SENTENCE_TERMS = 4
DEFAULT_MIN_TITLE_TERMS = 1
MAX_CANDIDATE_NGRAM = 5


@dataclass(frozen=True)
class TermMatch:
    term: str
    similarity: float


@dataclass(frozen=True)
class AlignedPair:
    article_title: str
    difficult_text: str
    simple_text: str
    matched_terms: tuple[TermMatch, ...] = ()

    def to_record(self) -> dict:
        return {
            "article_title": self.article_title,
            "difficult_text": self.difficult_text,
            "simple_text": self.simple_text,
            "matched_terms": [
                {"term": m.term, "similarity": m.similarity} for m in self.matched_terms
            ],
        }

    @classmethod
    def from_record(cls, row: Mapping) -> "AlignedPair":
        return cls(
            article_title=row["article_title"],
            difficult_text=row["difficult_text"],
            simple_text=row["simple_text"],
            matched_terms=tuple(
                TermMatch(m["term"], float(m["similarity"]))
                for m in row.get("matched_terms", [])
            ),
        )


def _normalize(text: str) -> str:
    return " ".join(text.split()).lower()


def _trigrams(normalized: str) -> Counter:
    return Counter(normalized[i : i + 3] for i in range(len(normalized) - 2))


def trigram_jaccard(a: str, b: str) -> float:
    """Multiset Jaccard over character trigrams of normalized strings.

    Strings too short for trigrams compare by normalized equality.
    Symmetric in its arguments.
    """
    na, nb = _normalize(a), _normalize(b)
    ta, tb = _trigrams(na), _trigrams(nb)
    if not ta or not tb:
        return 1.0 if na == nb else 0.0
    intersection = sum((ta & tb).values())
    union = sum(ta.values()) + sum(tb.values()) - intersection
    return intersection / union


class MedicalDictionary:
    """Immutable term list with semantic-type tags and a match threshold."""

    def __init__(
        self,
        terms: Mapping[str, str],
        similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    ):
        if not terms:
            raise ValueError("dictionary must contain at least one term")
        if not 0.0 < similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in (0, 1]")
        self.terms = dict(terms)
        self.similarity_threshold = similarity_threshold
        # Precomputed trigram profiles; sorted for deterministic tie-breaks.
        self._profiles = [
            (term, _trigrams(_normalize(term)), len(_normalize(term)))
            for term in sorted(self.terms)
        ]

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_file(
        cls,
        path: str | Path,
        similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    ) -> "MedicalDictionary":
        """Load a tab-separated ``term<TAB>semantic type`` file."""
        terms: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if "\t" not in line:
                    logger.warning("%s:%d: no tab separator, skipping", path, line_no)
                    continue
                term, semantic_type = line.split("\t", 1)
                terms[term.strip()] = semantic_type.strip()
        return cls(terms, similarity_threshold)


def term_match(candidate: str, dictionary: MedicalDictionary) -> TermMatch | None:
    """Best dictionary term at or above the similarity threshold, or None.

    Ties on similarity resolve to the lexicographically smallest term so
    matching is deterministic.
    """
    if not candidate.strip():
        raise ValueError("candidate must be non-empty")
    normalized = _normalize(candidate)
    cand_trigrams = _trigrams(normalized)
    cand_size = sum(cand_trigrams.values())
    threshold = dictionary.similarity_threshold

    best: TermMatch | None = None
    for term, term_trigrams, term_len in dictionary._profiles:
        term_size = sum(term_trigrams.values())
        if cand_size and term_size:
            # Jaccard is bounded by min/max multiset size; prune cheap misses.
            bound = min(cand_size, term_size) / max(cand_size, term_size)
            if bound < threshold:
                continue
            intersection = sum((cand_trigrams & term_trigrams).values())
            similarity = intersection / (cand_size + term_size - intersection)
        else:
            similarity = 1.0 if normalized == _normalize(term) else 0.0
        if similarity >= threshold and (best is None or similarity > best.similarity):
            best = TermMatch(term, similarity)
    return best


def match_terms(text: str, dictionary: MedicalDictionary) -> list[TermMatch]:
    """Distinct dictionary terms matched anywhere in the text.

    Candidates are word n-grams up to length five of the normalized text;
    each dictionary term is counted once at its best similarity.
    """
    tokens = _normalize(text).split()
    seen_candidates: set[str] = set()
    best_per_term: dict[str, float] = {}
    for size in range(1, MAX_CANDIDATE_NGRAM + 1):
        for start in range(0, len(tokens) - size + 1):
            candidate = " ".join(tokens[start : start + size])
            if candidate in seen_candidates:
                continue
            seen_candidates.add(candidate)
            match = term_match(candidate, dictionary)
            if match is not None:
                prev = best_per_term.get(match.term)
                if prev is None or match.similarity > prev:
                    best_per_term[match.term] = match.similarity
    return [TermMatch(term, sim) for term, sim in sorted(best_per_term.items())]


def is_medical_pair(
    pair: AlignedPair,
    dictionary: MedicalDictionary,
    *,
    min_sentence_terms: int = DEFAULT_MIN_SENTENCE_TERMS,
    min_title_terms: int = DEFAULT_MIN_TITLE_TERMS,
) -> bool:
    """True when the sentence has enough distinct term matches and the
    title is itself medical.

    ``min_title_terms`` defaults to one; raising it gives the stricter
    reading where titles need the full term count too.
    """
    if len(match_terms(pair.difficult_text, dictionary)) < min_sentence_terms:
        return False
    return len(match_terms(pair.article_title, dictionary)) >= min_title_terms


def extract_corpus(
    general_corpus: Iterable[AlignedPair | Mapping],
    dictionary: MedicalDictionary,
    *,
    min_sentence_terms: int = DEFAULT_MIN_SENTENCE_TERMS,
    min_title_terms: int = DEFAULT_MIN_TITLE_TERMS,
) -> list[AlignedPair]:
    """Filter the general corpus down to medical pairs.

    Kept pairs carry their sentence-level term matches. Malformed records
    are skipped with a diagnostic.
    """
    out: list[AlignedPair] = []
    for index, raw in enumerate(general_corpus):
        try:
            pair = raw if isinstance(raw, AlignedPair) else AlignedPair.from_record(raw)
        except (KeyError, TypeError) as exc:
            logger.warning("skipping malformed pair at index %d: %s", index, exc)
            continue
        if not pair.difficult_text.strip() or not pair.simple_text.strip():
            logger.warning("skipping pair at index %d: empty sentence", index)
            continue
        if is_medical_pair(
            pair,
            dictionary,
            min_sentence_terms=min_sentence_terms,
            min_title_terms=min_title_terms,
        ):
            matches = match_terms(pair.difficult_text, dictionary)
            out.append(
                AlignedPair(
                    article_title=pair.article_title,
                    difficult_text=pair.difficult_text,
                    simple_text=pair.simple_text,
                    matched_terms=tuple(matches),
                )
            )
    return out


def split_corpus(
    pairs: Sequence[AlignedPair], seed: int
) -> tuple[list[AlignedPair], list[AlignedPair], list[AlignedPair]]:
    """Deterministic 70/15/15 train/dev/test split.

    Dev and test sizes round down; the remainder goes to train. The three
    splits are disjoint and cover the input exactly.
    """
    if len(pairs) < 3:
        raise ValueError("need at least 3 pairs to split")
    shuffled = list(pairs)
    random.Random(seed).shuffle(shuffled)
    dev_size = int(len(shuffled) * 0.15)
    test_size = int(len(shuffled) * 0.15)
    train_size = len(shuffled) - dev_size - test_size
    train = shuffled[:train_size]
    dev = shuffled[train_size : train_size + dev_size]
    test = shuffled[train_size + dev_size :]
    return train, dev, test


def load_pairs(path) -> list[AlignedPair]:
    from . import records

    return [AlignedPair.from_record(row) for row in records.read_jsonl(path)]
