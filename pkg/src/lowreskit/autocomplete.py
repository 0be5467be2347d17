"""The autocomplete simplification task.

A user simplifying a difficult sentence has typed a prefix of the simple
sentence; the task is to predict the next word. Batch evaluation turns an
aligned pair into one prediction task per position (an n-token simple
sentence yields n-1 tasks), and the interactive loop repeatedly asks a
backend for suggestions, letting an acceptor callback (a human in the
editor, an oracle in tests) decide the token that actually extends the
prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .med_corpus import AlignedPair

MASK_TOKEN = "[MASK]"
SEP_TOKEN = "[SEP]"
END_TOKEN = "[END]"

MODE_NO_CONTEXT = "no_context"
MODE_CONTEXT_AWARE = "context_aware"

DEFAULT_MAX_TOKENS = 128

Tokenizer = Callable[[str], list[str]]


def whitespace_tokenize(text: str) -> list[str]:
    return text.split()


@dataclass(frozen=True)
class PredictionTask:
    """One next-word prediction unit: typed prefix plus its gold answer."""

    task_id: str
    difficult_tokens: tuple[str, ...]
    typed_prefix: tuple[str, ...]
    gold_next: str
    position_index: int

    def __post_init__(self) -> None:
        if self.position_index < 1:
            raise ValueError("position_index must be >= 1")
        if len(self.typed_prefix) != self.position_index:
            raise ValueError("typed_prefix length must equal position_index")

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "difficult": " ".join(self.difficult_tokens),
            "prefix": " ".join(self.typed_prefix),
            "gold": self.gold_next,
            "position": self.position_index,
        }

    @classmethod
    def from_record(cls, row: dict) -> "PredictionTask":
        return cls(
            task_id=str(row["task_id"]),
            difficult_tokens=tuple(str(row["difficult"]).split()),
            typed_prefix=tuple(str(row["prefix"]).split()),
            gold_next=row["gold"],
            position_index=int(row["position"]),
        )


@dataclass(frozen=True)
class ContextMode:
    """Whether model inputs carry the difficult sentence as context."""

    mode: str = MODE_CONTEXT_AWARE
    separator: str = SEP_TOKEN

    def __post_init__(self) -> None:
        if self.mode not in (MODE_NO_CONTEXT, MODE_CONTEXT_AWARE):
            raise ValueError(f"unknown context mode {self.mode!r}")


NO_CONTEXT = ContextMode(mode=MODE_NO_CONTEXT)
CONTEXT_AWARE = ContextMode(mode=MODE_CONTEXT_AWARE)


def generate_tasks(
    pair: AlignedPair,
    tokenizer: Tokenizer = whitespace_tokenize,
    *,
    task_id_base: str | None = None,
) -> list[PredictionTask]:
    """All next-word tasks for an aligned pair.

    Task i carries the first i tokens of the simple sentence and the token
    at position i+1 as gold, so prefixes are strictly nested. A one-token
    simple sentence yields no tasks.
    """
    difficult = tuple(tokenizer(pair.difficult_text))
    simple = tokenizer(pair.simple_text)
    base = task_id_base if task_id_base is not None else pair.article_title or "pair"
    tasks = []
    for i in range(1, len(simple)):
        tasks.append(
            PredictionTask(
                task_id=f"{base}#{i:03d}",
                difficult_tokens=difficult,
                typed_prefix=tuple(simple[:i]),
                gold_next=simple[i],
                position_index=i,
            )
        )
    return tasks


def build_model_input(task: PredictionTask, context_mode: ContextMode) -> list[str]:
    """Token sequence handed to a backend, always ending with the mask.

    Context-aware inputs prepend the difficult sentence and a separator in
    front of the typed prefix; the backend architecture itself is never
    touched.
    """
    if context_mode.mode == MODE_NO_CONTEXT:
        return list(task.typed_prefix) + [MASK_TOKEN]
    if not task.difficult_tokens:
        raise ValueError("context-aware input requires a difficult sentence")
    return (
        list(task.difficult_tokens)
        + [context_mode.separator]
        + list(task.typed_prefix)
        + [MASK_TOKEN]
    )


def prefix_model_input(
    difficult_tokens: Sequence[str],
    typed_tokens: Sequence[str],
    context_mode: ContextMode,
) -> list[str]:
    """Model input for a live prefix (interactive path, no gold attached)."""
    if context_mode.mode == MODE_NO_CONTEXT:
        return list(typed_tokens) + [MASK_TOKEN]
    if not difficult_tokens:
        raise ValueError("context-aware input requires a difficult sentence")
    return list(difficult_tokens) + [context_mode.separator] + list(typed_tokens) + [MASK_TOKEN]


def training_sequences(
    pairs: Sequence[AlignedPair],
    context_mode: ContextMode,
    tokenizer: Tokenizer = whitespace_tokenize,
    *,
    append_end: bool = True,
) -> list[list[str]]:
    """Token sequences for fitting a next-word backend on aligned pairs.

    Context-aware sequences are ``difficult [SEP] simple [END]`` so the
    count tables line up with prediction-time inputs.
    """
    sequences = []
    for pair in pairs:
        simple = tokenizer(pair.simple_text)
        if context_mode.mode == MODE_CONTEXT_AWARE:
            seq = tokenizer(pair.difficult_text) + [context_mode.separator] + simple
        else:
            seq = simple
        if append_end:
            seq = seq + [END_TOKEN]
        sequences.append(seq)
    return sequences


# Acceptor callback: (typed tokens so far, current suggestions) -> accepted
# token, which may override every suggestion; END_TOKEN finishes.
Acceptor = Callable[[tuple[str, ...], Sequence[tuple[str, float]]], str]


@dataclass(frozen=True)
class LoopStep:
    prefix: tuple[str, ...]
    suggestions: tuple[tuple[str, float], ...]
    accepted: str


@dataclass(frozen=True)
class LoopResult:
    tokens: tuple[str, ...]
    completed: bool
    error: str | None
    transcript: tuple[LoopStep, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def autocomplete_loop(
    difficult: str,
    backend,
    acceptor: Acceptor,
    *,
    first_token: str,
    context_mode: ContextMode = CONTEXT_AWARE,
    top_n: int = 5,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    tokenizer: Tokenizer = whitespace_tokenize,
) -> LoopResult:
    """Interactive suggestion loop.

    Starting from the first typed token, repeatedly request suggestions and
    extend the prefix with whatever the acceptor returns (the accepted
    token, not the suggestion, forms the new context) until the end
    sentinel is accepted. A backend failure aborts the loop, returning the
    partial sentence with the error; a max-length guard keeps the loop live
    under backends that never propose an end.
    """
    difficult_tokens = tokenizer(difficult)
    tokens: list[str] = [first_token]
    steps: list[LoopStep] = []
    while len(tokens) < max_tokens:
        model_input = prefix_model_input(difficult_tokens, tokens, context_mode)
        try:
            suggestion_list = backend.predict_next(model_input, top_n)
        except Exception as exc:
            return LoopResult(
                tokens=tuple(tokens),
                completed=False,
                error=str(exc),
                transcript=tuple(steps),
            )
        suggestions = tuple((s.word, s.probability) for s in suggestion_list.suggestions)
        accepted = acceptor(tuple(tokens), suggestions)
        steps.append(LoopStep(tuple(tokens), suggestions, accepted))
        if accepted == END_TOKEN:
            return LoopResult(tuple(tokens), True, None, tuple(steps))
        tokens.append(accepted)
    return LoopResult(
        tokens=tuple(tokens),
        completed=False,
        error=f"max length {max_tokens} reached before end sentinel",
        transcript=tuple(steps),
    )


def replay_acceptor(gold_tokens: Sequence[str]) -> Acceptor:
    """Acceptor that types a known sentence, ignoring the suggestions."""
    gold = list(gold_tokens)

    def accept(prefix: tuple[str, ...], _suggestions) -> str:
        return gold[len(prefix)] if len(prefix) < len(gold) else END_TOKEN

    return accept
