"""Python interface to the qtextbench C++ core."""

from __future__ import annotations

import json
from typing import Any, Iterable, Optional, Sequence

from . import _core
from ._core import (
    DATASET_NAMES,
    CapacityError,
    ContractError,
    Dataset,
    DimensionError,
    DomainError,
    GenerationError,
    LengthError,
    NumericalError,
    SplitError,
    Vocabulary,
    bleu,
    circuit_expectations,
    distinct_n,
    fluency_stats,
    perplexity,
    perplexity_from_probabilities,
    repetition_rate,
    synthesize_dataset,
    tokenize,
    train_val_split,
    write_dataset,
)

__all__ = [
    "ARCHITECTURES",
    "DATASET_NAMES",
    "CapacityError",
    "ContractError",
    "Dataset",
    "DimensionError",
    "DomainError",
    "GenerationError",
    "LengthError",
    "Model",
    "NumericalError",
    "SplitError",
    "Vocabulary",
    "benchmark",
    "bleu",
    "circuit_expectations",
    "distinct_n",
    "evaluate",
    "fluency_stats",
    "manifest",
    "perplexity",
    "perplexity_from_probabilities",
    "repetition_rate",
    "synthesize_dataset",
    "tokenize",
    "train",
    "train_val_split",
    "write_dataset",
]

__version__ = "0.1.0"

ARCHITECTURES = ("qksan", "qrwkv", "qasa", "transformer", "mlp")


class Model:
    """A language model of one of the five architectures."""

    def __init__(self, arch: str, vocab_size: int, **overrides: Any) -> None:
        self._impl = _core.Model(arch, vocab_size, json.dumps(overrides) if overrides else "")

    @classmethod
    def load(cls, path: str) -> tuple["Model", Vocabulary]:
        impl, vocab = _core.Model.load(str(path))
        model = cls.__new__(cls)
        model._impl = impl
        return model, vocab

    @property
    def config(self) -> dict:
        return json.loads(self._impl.config_json)

    @property
    def parameter_count(self) -> int:
        return self._impl.parameter_count

    def forward(self, ids: Sequence[int]):
        """Logits of shape (len(ids), vocab_size) as a numpy array."""
        return self._impl.forward(list(ids))

    def generate(
        self,
        prompt: Sequence[int],
        decode: str = "greedy",
        temperature: float = 1.0,
        max_new: int = 16,
        seed: int = 0,
    ) -> list[int]:
        return self._impl.generate(list(prompt), decode, temperature, max_new, seed)

    def save(self, vocab: Vocabulary, path: str) -> None:
        self._impl.save(vocab, str(path))


def manifest(dataset: Dataset) -> dict:
    return json.loads(dataset.manifest_json)


def train(
    model: Model,
    train_set: Iterable[Sequence[int]],
    val_set: Iterable[Sequence[int]],
    *,
    epochs: int = 50,
    patience: int = 10,
    batch_size: int = 8,
    learning_rate: float = 1e-3,
    min_delta: float = 1e-6,
    seed: int = 42,
) -> dict:
    """Trains in place with Adam and early stopping; returns the training log."""
    log = _core.train(
        model._impl,
        [list(s) for s in train_set],
        [list(s) for s in val_set],
        epochs,
        patience,
        batch_size,
        learning_rate,
        min_delta,
        seed,
    )
    return json.loads(log)


def evaluate(
    model: Model,
    vocab: Vocabulary,
    dataset: str,
    sequences: Iterable[Sequence[int]],
    max_length_words: int,
    *,
    decode: str = "greedy",
    temperature: float = 1.0,
    seed: int = 42,
) -> dict:
    """Perplexity, BLEU, diversity and fluency on held-out sequences."""
    report = _core.evaluate(
        model._impl,
        vocab,
        dataset,
        [list(s) for s in sequences],
        max_length_words,
        decode,
        temperature,
        seed,
    )
    return json.loads(report)


def benchmark(config: Optional[dict] = None, out_dir: Optional[str] = None) -> list[dict]:
    """Runs the model x dataset matrix; optionally writes tables and reports."""
    reports = _core.benchmark(json.dumps(config or {}), str(out_dir) if out_dir else "")
    return json.loads(reports)
