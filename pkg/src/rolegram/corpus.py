"""Sentence store, tokenization and stand-off role annotations.

A corpus file is plain UTF-8 text, one sentence per line. Role annotations
live in a separate tab-separated file, one span per line:

    sentence_id <TAB> start <TAB> end <TAB> role

with ``start`` inclusive, ``end`` exclusive over token indices. Lines
starting with ``#`` are comments. The role field accepts the canonical
names Agent / Patient / Relation / Other as well as raw argument tags
(arg0 -> Agent, arg1 -> Patient, rel -> Relation, arg2..arg5 and argm ->
Other).
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field


PUNCT_EDGE = ".,!?;:"

ROLES = ("Agent", "Patient", "Relation", "Other")

_ARG_TAG_MAP = {
    "arg0": "Agent",
    "arg1": "Patient",
    "arg2": "Other",
    "arg3": "Other",
    "arg4": "Other",
    "arg5": "Other",
    "argm": "Other",
    "rel": "Relation",
}


class EmptyCorpusError(Exception):
    """Raised when a corpus file contains no usable sentences."""


class AnnotationError(Exception):
    """Raised for malformed or inconsistent role-annotation data."""


@dataclass
class Sentence:
    id: int
    tokens: list[str]

    def __len__(self):
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    vocabulary: Counter = field(default_factory=Counter)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def token_count(self) -> int:
        return sum(self.vocabulary.values())

    def sentence(self, sid: int) -> Sentence:
        return self.sentences[sid]


@dataclass
class RoleAnnotation:
    """All annotated spans of one sentence.

    Spans are (start, end, role) with end exclusive; they never overlap
    within the sentence.
    """

    sentence_id: int
    spans: list[tuple[int, int, str]]


def tokenize(line: str) -> list[str]:
    """Split a raw line into lowercase tokens.

    Splits on whitespace, lowercases, and strips the edge punctuation
    characters ``.,!?;:`` from both ends of each token. Tokens that
    become empty are dropped.
    """
    tokens = []
    for piece in line.lower().split():
        piece = piece.strip(PUNCT_EDGE)
        if piece:
            tokens.append(piece)
    return tokens


def load_corpus(path: str | os.PathLike, max_tokens: int | None = None) -> Corpus:
    """Read a one-sentence-per-line text file into a Corpus.

    Blank lines are skipped. Sentence ids are assigned sequentially from 0
    over the kept sentences. When ``max_tokens`` is given, sentences with
    more than that many tokens are filtered out at load time (annotation
    files must be produced against the same filter setting, since filtering
    changes the id sequence).
    """
    corpus = Corpus()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            tokens = tokenize(line)
            if not tokens:
                continue
            if max_tokens is not None and len(tokens) > max_tokens:
                continue
            corpus.sentences.append(Sentence(len(corpus.sentences), tokens))
            corpus.vocabulary.update(tokens)
    if not corpus.sentences:
        raise EmptyCorpusError(f"no usable sentences in {path}")
    return corpus


def normalize_role(tag: str) -> str:
    """Map a role field to one of Agent/Patient/Relation/Other."""
    if tag in ROLES:
        return tag
    mapped = _ARG_TAG_MAP.get(tag.lower())
    if mapped is None:
        raise AnnotationError(f"unknown role tag {tag!r}")
    return mapped


def load_annotations(path: str | os.PathLike, corpus: Corpus) -> list[RoleAnnotation]:
    """Read a stand-off annotation file and validate it against a corpus.

    Returns one RoleAnnotation per annotated sentence, ordered by sentence
    id. Raises AnnotationError for unknown sentence ids, out-of-bounds or
    inverted spans, overlapping spans within a sentence, and unknown role
    tags.
    """
    by_sentence: dict[int, list[tuple[int, int, str]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise AnnotationError(f"line {lineno}: expected 4 tab-separated fields, got {len(fields)}")
            try:
                sid, start, end = int(fields[0]), int(fields[1]), int(fields[2])
            except ValueError:
                raise AnnotationError(f"line {lineno}: non-integer sentence id or span bound") from None
            role = normalize_role(fields[3])
            if sid < 0 or sid >= len(corpus.sentences):
                raise AnnotationError(f"line {lineno}: sentence id {sid} not in corpus")
            length = len(corpus.sentences[sid].tokens)
            if not (0 <= start < end <= length):
                raise AnnotationError(
                    f"line {lineno}: span ({start}, {end}) out of bounds for sentence {sid} of length {length}"
                )
            by_sentence.setdefault(sid, []).append((start, end, role))

    annotations = []
    for sid in sorted(by_sentence):
        spans = sorted(by_sentence[sid])
        for (s1, e1, _), (s2, _, _) in zip(spans, spans[1:]):
            if s2 < e1:
                raise AnnotationError(f"overlapping spans in sentence {sid}: ({s1}, {e1}) and starting {s2}")
        annotations.append(RoleAnnotation(sid, spans))
    return annotations
