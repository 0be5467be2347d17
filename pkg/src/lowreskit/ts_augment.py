"""Training-set augmentation through text simplification.

A pluggable simplifier rewrites a sampled fraction of the training
examples; an information-preservation predicate filters rewrites that drop
critical entity mentions; composition strategies assemble the final
training set from originals and surviving rewrites. A smoothed sentence
BLEU between original and rewrite quantifies how aggressive a simplifier
is.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .seeding import record_uniform

logger = logging.getLogger(__name__)

PROVENANCE_ORIGINAL = "original"
PROVENANCE_SIMPLIFIED = "simplified"

ROLE_SUBJECT = "subject"
ROLE_OBJECT = "object"
ROLE_PREMISE = "premise"
ROLE_HYPOTHESIS = "hypothesis"
ROLE_NONE = "none"
_ROLES = {ROLE_SUBJECT, ROLE_OBJECT, ROLE_PREMISE, ROLE_HYPOTHESIS, ROLE_NONE}

STRATEGY_ORIGINAL = "original"
STRATEGY_SIMPLIFIED = "simplified"
STRATEGY_SIMPLIFIED_PLUS_COMPLEMENT = "simplified_plus_complement"
STRATEGY_SIMPLIFIED_PLUS_ORIGINAL = "simplified_plus_original"
STRATEGY_SWAPPED = "swapped"
STRATEGIES = (
    STRATEGY_ORIGINAL,
    STRATEGY_SIMPLIFIED,
    STRATEGY_SIMPLIFIED_PLUS_COMPLEMENT,
    STRATEGY_SIMPLIFIED_PLUS_ORIGINAL,
    STRATEGY_SWAPPED,
)


class LineageError(ValueError):
    """A simplified record does not trace back to any original."""


@dataclass(frozen=True)
class CriticalSpan:
    role: str
    surface: str

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"unknown critical-span role {self.role!r}")


@dataclass(frozen=True)
class TaggedExample:
    example_id: str
    text: str
    critical_spans: tuple[CriticalSpan, ...] = ()
    label: str = ""
    provenance: str = PROVENANCE_ORIGINAL

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "text": self.text,
            "critical_spans": [
                {"role": s.role, "surface": s.surface} for s in self.critical_spans
            ],
            "label": self.label,
            "provenance": self.provenance,
        }

    @classmethod
    def from_record(cls, row: dict) -> "TaggedExample":
        return cls(
            example_id=str(row["example_id"]),
            text=row["text"],
            critical_spans=tuple(
                CriticalSpan(s["role"], s["surface"])
                for s in row.get("critical_spans", [])
            ),
            label=str(row.get("label", "")),
            provenance=row.get("provenance", PROVENANCE_ORIGINAL),
        )


@dataclass(frozen=True)
class CompositionStrategy:
    kind: str
    sample_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown composition strategy {self.kind!r}")
        if not 0.0 <= self.sample_fraction <= 1.0:
            raise ValueError("sample_fraction must be in [0, 1]")


Simplifier = Callable[[str], str]


def identity_simplifier(text: str) -> str:
    return text


class RuleLiteSimplifier:
    """Small deterministic reference simplifier for tests and demos.

    Applies a word-level synonym table and splits comma-bounded clauses
    into separate sentences. Not a serious simplifier; it exists so every
    pipeline can run without a neural rewriting model.
    """

    SYNONYMS = {
        "approximately": "about",
        "assistance": "help",
        "commence": "begin",
        "demonstrate": "show",
        "frequently": "often",
        "individuals": "people",
        "obtain": "get",
        "physician": "doctor",
        "purchase": "buy",
        "requires": "needs",
        "sufficient": "enough",
        "utilize": "use",
    }

    def __init__(self, split_clauses: bool = True):
        self.split_clauses = split_clauses

    def __call__(self, text: str) -> str:
        clauses = [c.strip() for c in text.split(",")] if self.split_clauses else [text]
        clauses = [c for c in clauses if c]
        out_parts = []
        for clause in clauses:
            words = []
            for word in clause.split():
                bare = word.strip(".;:!?")
                repl = self.SYNONYMS.get(bare.lower())
                if repl is not None:
                    trailing = word[len(bare):]
                    words.append(repl + trailing)
                else:
                    words.append(word)
            out_parts.append(" ".join(words))
        if not out_parts:
            return ""
        joined = " . ".join(part.rstrip(" .") for part in out_parts)
        return joined + " ." if text.rstrip().endswith(".") else joined


SIMPLIFIERS: dict[str, Simplifier] = {
    "identity": identity_simplifier,
    "rule_lite": RuleLiteSimplifier(),
}


def sample_and_simplify(
    examples: Sequence[TaggedExample],
    simplifier: Simplifier,
    p: float,
    seed: int,
) -> list[TaggedExample]:
    """Simplify a p-fraction of the examples, preserving id and label.

    Selection draws one uniform per example keyed on (seed, example_id),
    so runs are reproducible and order-independent. A simplifier failure
    skips that example with a log line rather than failing the pass.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    out: list[TaggedExample] = []
    for example in examples:
        if record_uniform(seed, example.example_id) >= p:
            continue
        try:
            simplified_text = simplifier(example.text)
        except Exception as exc:
            logger.warning("simplifier failed on %s: %s", example.example_id, exc)
            continue
        out.append(
            TaggedExample(
                example_id=example.example_id,
                text=simplified_text,
                critical_spans=example.critical_spans,
                label=example.label,
                provenance=PROVENANCE_SIMPLIFIED,
            )
        )
    return out


def _normalize(text: str) -> str:
    return " ".join(text.split()).lower()


def preserves_critical_info(original: TaggedExample, simplified_text: str) -> bool:
    """True iff every critical surface string survives the rewrite.

    Matching is case-insensitive exact substring after whitespace
    normalization. Examples without critical spans (e.g. inference pairs
    where no span is markable) pass vacuously; their quality control is the
    gate classifier instead.
    """
    haystack = _normalize(simplified_text)
    return all(_normalize(span.surface) in haystack for span in original.critical_spans)


def compose_training_set(
    original: Sequence[TaggedExample],
    simplified: Sequence[TaggedExample],
    strategy: CompositionStrategy,
) -> list[TaggedExample]:
    """Assemble a training set from originals and their simplifications.

    - original: the originals unchanged.
    - simplified: every simplified record.
    - simplified_plus_complement: per original, its preserving
      simplification when one exists, else the original itself.
    - simplified_plus_original: originals plus all preserving
      simplifications.
    - swapped: originals with a sampled fraction replaced by their
      simplification.

    Every simplified record must trace to an original by example_id;
    a lineage gap is a hard error.
    """
    by_id = {ex.example_id: ex for ex in original}
    simplified_by_id: dict[str, TaggedExample] = {}
    for simp in simplified:
        if simp.example_id not in by_id:
            raise LineageError(f"simplified {simp.example_id} has no original")
        simplified_by_id.setdefault(simp.example_id, simp)

    if strategy.kind == STRATEGY_ORIGINAL:
        return list(original)
    if strategy.kind == STRATEGY_SIMPLIFIED:
        return list(simplified)

    def preserving(ex: TaggedExample) -> TaggedExample | None:
        simp = simplified_by_id.get(ex.example_id)
        if simp is not None and preserves_critical_info(ex, simp.text):
            return simp
        return None

    if strategy.kind == STRATEGY_SIMPLIFIED_PLUS_COMPLEMENT:
        return [preserving(ex) or ex for ex in original]
    if strategy.kind == STRATEGY_SIMPLIFIED_PLUS_ORIGINAL:
        extras = [simp for ex in original if (simp := preserving(ex)) is not None]
        return list(original) + extras
    # swapped
    out = []
    for ex in original:
        simp = simplified_by_id.get(ex.example_id)
        take_simplified = (
            simp is not None
            and record_uniform(strategy.rng_seed, f"swap:{ex.example_id}")
            < strategy.sample_fraction
        )
        out.append(simp if take_simplified else ex)
    return out


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def sentence_bleu(
    candidate: Sequence[str], reference: Sequence[str], max_order: int = 4
) -> float:
    """Sentence-level BLEU of a candidate against one reference.

    Unigram precision is unsmoothed (so disjoint sentences score 0 and
    only token-identical ones reach 1.0); higher orders use add-one
    smoothing on the clipped counts. Standard brevity penalty.
    """
    if not candidate or not reference:
        return 0.0
    log_sum = 0.0
    for order in range(1, max_order + 1):
        cand_counts = _ngram_counts(candidate, order)
        ref_counts = _ngram_counts(reference, order)
        matches = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = max(len(candidate) - order + 1, 0)
        if order == 1:
            if matches == 0:
                return 0.0
            precision = matches / total
        else:
            precision = (matches + 1) / (total + 1)
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / max_order)
    if len(candidate) >= len(reference):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return brevity * geo_mean


def bleu_divergence(pairs: Sequence[tuple[str, str]]) -> tuple[float, float]:
    """Mean and population std of BLEU(simplified | original) over pairs.

    High values mean the simplifier barely rewrites; low values mean
    aggressive rewriting. Pairs with an empty side score 0.
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    scores = [
        sentence_bleu(simplified.split(), original.split())
        for original, simplified in pairs
    ]
    mean = sum(scores) / len(scores)
    variance = sum((s - mean) ** 2 for s in scores) / len(scores)
    return mean, math.sqrt(variance)


def load_examples(path) -> list[TaggedExample]:
    from . import records

    return [TaggedExample.from_record(row) for row in records.read_jsonl(path)]


def dump_examples(examples: Iterable[TaggedExample]) -> Iterable[dict]:
    for example in examples:
        yield example.to_record()
