"""Toolkit for mitigating training-data scarcity in NLP pipelines.

Subpackages cover four workflows that share record formats and backends:

- answer-span augmentation for extractive QA (``qa_augment``) and the
  span-score document reranker it feeds (``retrieval``);
- simplification-based training-set augmentation (``ts_augment``) with an
  inference-time quality gate (``simp_gate``);
- medical parallel-corpus extraction and splitting (``med_corpus``);
- the autocomplete next-word simplification task (``autocomplete``), the
  next-word backends behind it (``backends``), ensemble combination
  strategies (``ensemble``), and shared metrics (``metrics``).

``cli`` and ``service`` expose the pipelines as subcommands and as a small
HTTP API used by the interactive editor.
"""

__version__ = "0.1.0"
