"""Relational-tag extraction from captions.

Produces lowercase, lemmatized, space-joined phrases of two kinds:

* attribute pairs  — modifier + noun ("wooden table", "black chair"),
  including noun compounds ("park bench") and, for chunks with several
  modifiers, the full flattened chunk ("multiple metal shelf");
* relation triples — subject verb object ("man ride horse"), plus
  verb-preposition variants ("area combine into space") and passive
  agent-subject rewrites ("chair surround table" from
  "table surrounded by chairs").

Tagging is lexicon+suffix based; the caption domain is simple enough that
unknown words default to nouns. Output order is first-occurrence stable and
per-caption deduplicated.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .lexicon import (
    ADJECTIVES,
    ADVERBS,
    AUXILIARIES,
    CONJUNCTIONS,
    DETERMINERS,
    PREPOSITIONS,
    PRONOUNS,
    VERBS,
    IRREGULAR_VERB_LEMMAS,
    lemma_noun,
    lemma_verb,
)

RULESET = "svo_triple,modifier_noun"
VERSION = "0.1.0"

_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)?", re.UNICODE)


class ParserFailure(Exception):
    """Raised when a caption cannot be processed; caller keeps the text."""


def tokenize(caption: str) -> list:
    return [w.lower().split("'")[0] for w in _WORD_RE.findall(caption)]


def _base_tag(word: str) -> str:
    if word in DETERMINERS:
        return "DET"
    if word in PRONOUNS:
        return "PRON"
    if word in PREPOSITIONS:
        return "PREP"
    if word in CONJUNCTIONS:
        return "CONJ"
    if word in AUXILIARIES:
        return "AUX"
    if word in ADVERBS or (word.endswith("ly") and len(word) > 3):
        return "ADV"
    if word in ADJECTIVES:
        return "ADJ"
    if word in VERBS or word in IRREGULAR_VERB_LEMMAS:
        return "VERB"
    return "NOUN"


def pos_tag(tokens: list) -> list:
    """(word, tag) pairs; inflection and position disambiguate the rest."""
    tags = []
    for i, word in enumerate(tokens):
        tag = _base_tag(word)
        prev = tags[-1][1] if tags else "START"
        if tag == "NOUN":
            if word.endswith("ing") and len(word) > 4:
                # gerund: a verb reading after aux ("is riding") or after a
                # nominal when the lemma is a known verb ("man riding");
                # otherwise a modifier ("dining room") or a compound head
                # ("track lighting")
                if prev == "AUX":
                    tag = "VERB"
                elif prev in ("NOUN", "PRON") and lemma_verb(word) in VERBS:
                    tag = "VERB"
                elif prev not in ("NOUN", "PRON"):
                    tag = "ADJ"
            elif word.endswith("ed") and len(word) > 3:
                stem = lemma_verb(word)
                if stem in VERBS or prev in ("AUX", "NOUN", "PRON"):
                    tag = "VERB"
            elif word.endswith("s") and not word.endswith("ss") \
                    and lemma_verb(word) in VERBS and prev in ("NOUN", "PRON"):
                tag = "VERB"
        elif tag == "VERB" and prev in ("DET", "ADJ"):
            tag = "NOUN"   # "the park", "a ride", "green run"
        tags.append((word, tag))
    return tags


@dataclass
class Chunk:
    """A noun phrase: optional determiner, modifiers, head noun."""

    start: int
    end: int           # exclusive
    modifiers: list    # lemmatized modifier strings in order
    head: str          # lemmatized head noun

    @property
    def full(self) -> str:
        return " ".join([*self.modifiers, self.head])


def chunk_nouns(tagged: list) -> list:
    chunks = []
    i = 0
    while i < len(tagged):
        word, tag = tagged[i]
        if tag == "DET":
            j = i + 1
            while j < len(tagged) and tagged[j][1] in ("ADJ", "NOUN"):
                j += 1
            if j > i + 1 and tagged[j - 1][1] == "NOUN":
                chunks.append(_make_chunk(tagged, i + 1, j))
                i = j
                continue
            i += 1
            continue
        if tag in ("ADJ", "NOUN"):
            j = i
            while j < len(tagged) and tagged[j][1] in ("ADJ", "NOUN"):
                j += 1
            if tagged[j - 1][1] == "NOUN":
                chunks.append(_make_chunk(tagged, i, j))
            i = j
            continue
        i += 1
    return chunks


def _make_chunk(tagged: list, start: int, end: int) -> Chunk:
    words = tagged[start:end]
    head = lemma_noun(words[-1][0])
    modifiers = []
    for word, tag in words[:-1]:
        modifiers.append(word if tag == "ADJ" else lemma_noun(word))
    return Chunk(start=start, end=end, modifiers=modifiers, head=head)


def _attribute_tags(chunks: list) -> list:
    tags = []
    for chunk in chunks:
        for modifier in chunk.modifiers:
            tags.append(f"{modifier} {chunk.head}")
        if len(chunk.modifiers) >= 2:
            tags.append(chunk.full)
    return tags


def _chunk_before(chunks: list, index: int) -> Chunk | None:
    best = None
    for chunk in chunks:
        if chunk.end <= index and (best is None or chunk.end > best.end):
            best = chunk
    return best


def _chunk_after(chunks: list, index: int, limit: int | None = None) -> Chunk | None:
    for chunk in chunks:
        if chunk.start > index and (limit is None or chunk.start < limit):
            return chunk
    return None


def _relation_tags(tagged: list, chunks: list) -> list:
    tags = []
    n = len(tagged)
    for i, (word, tag) in enumerate(tagged):
        if tag != "VERB":
            continue
        verb = lemma_verb(word)
        if verb in AUXILIARIES:
            continue
        subject = _chunk_before(chunks, i)

        # passive: "<np> (aux)? <verb-ed> by <np>" maps agent -> subject
        if word.endswith(("ed", "en")) or word in IRREGULAR_VERB_LEMMAS:
            j = i + 1
            if j < n and tagged[j][0] == "by":
                agent = _chunk_after(chunks, j)
                if agent is not None and subject is not None:
                    tags.append(f"{agent.head} {verb} {subject.head}")
                continue

        if subject is None:
            continue
        # direct object: next chunk before any preposition/conjunction
        stop = n
        for j in range(i + 1, n):
            if tagged[j][1] in ("PREP", "CONJ", "VERB", "AUX"):
                stop = j
                break
        obj = _chunk_after(chunks, i, stop)
        if obj is not None:
            tags.append(f"{subject.head} {verb} {obj.head}")
            continue
        # no direct object: attach prepositional objects instead,
        # "<subj> <verb> <prep> <np>" ("area combine into space")
        j = i + 1
        while j < n:
            w, t = tagged[j]
            if t in ("VERB", "CONJ", "AUX"):
                break
            if t == "PREP" and w != "by":
                pobj = _chunk_after(chunks, j)
                if pobj is not None:
                    tags.append(f"{subject.head} {verb} {w} {pobj.head}")
                    j = pobj.end
                    continue
            j += 1
    return tags


def extract_tags(caption: str) -> list:
    """Ordered, deduplicated relational tags for one caption."""
    if not caption or not caption.strip():
        raise ParserFailure("empty caption")
    try:
        tokens = tokenize(caption)
        tagged = pos_tag(tokens)
        chunks = chunk_nouns(tagged)
        raw = _attribute_tags(chunks) + _relation_tags(tagged, chunks)
    except ParserFailure:
        raise
    except Exception as exc:  # rule bug on unexpected input: keep the caption
        raise ParserFailure(f"{type(exc).__name__}: {exc}") from exc
    seen = set()
    tags = []
    for tag in raw:
        if tag not in seen:
            seen.add(tag)
            tags.append(tag)
    return tags
