"""Tokenization, direction taxonomies, phrase parsing, and sub-instruction chunking."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

# Characters treated as separators in addition to whitespace.
PUNCTUATION = frozenset('.,;:!?"')

# Tokens that open a new sub-instruction chunk.
BOUNDARY_TOKENS = frozenset({"and", "then"})

# Raw-text characters that mark a clause boundary before the next token.
_CLAUSE_PUNCT = frozenset({",", "."})

BUILTIN_TAXONOMIES = ("r2r", "urban")


def data_dir() -> Path:
    """Root of the bundled data files. The NAVEVAL_DATA_DIR env var overrides it."""
    override = os.environ.get("NAVEVAL_DATA_DIR")
    if override:
        return Path(override)
    return Path(str(resources.files("naveval") / "data"))


@dataclass(frozen=True)
class Instruction:
    """A tokenized instruction plus per-token character spans into the raw text."""

    raw: str
    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.spans):
            raise ValueError("tokens and spans must have equal length")
        prev_end = 0
        for tok, (start, end) in zip(self.tokens, self.spans):
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r}: tokens must be nonempty and whitespace-free")
            if not (0 <= start < end <= len(self.raw)) or start < prev_end:
                raise ValueError("token spans must be strictly increasing and within the raw text")
            prev_end = end

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(raw: str) -> Instruction:
    """Split raw text into lowercase tokens.

    Whitespace and the punctuation characters .,;:!?" act as separators and
    never appear inside tokens. Apostrophes and hyphens are kept, so "o'clock"
    and "u-turn" survive as single tokens. Total: any string, including the
    empty one, yields a valid Instruction.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    start: int | None = None
    for i, ch in enumerate(raw):
        if ch.isspace() or ch in PUNCTUATION:
            if start is not None:
                tokens.append(raw[start:i].lower())
                spans.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        tokens.append(raw[start:].lower())
        spans.append((start, len(raw)))
    return Instruction(raw=raw, tokens=tuple(tokens), spans=tuple(spans))


@dataclass(frozen=True)
class DirectionPhrase:
    """One matched direction phrase: its class label and the token span it covers."""

    class_label: str
    token_span: tuple[int, int]


@dataclass(frozen=True)
class DirectionTaxonomy:
    """Named direction classes, each with the phrase strings that signal it.

    Phrases are compared at the token level, so two spellings that tokenize
    identically may not live under different classes.
    """

    name: str
    classes: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("taxonomy name must be nonempty")
        index: dict[tuple[str, ...], str] = {}
        seen: set[str] = set()
        for label, phrases in self.classes:
            if not label:
                raise ValueError("direction class labels must be nonempty")
            if label in seen:
                raise ValueError(f"duplicate direction class {label!r}")
            seen.add(label)
            for phrase in phrases:
                toks = tokenize(phrase).tokens
                if not toks:
                    raise ValueError(f"phrase {phrase!r} in class {label!r} is empty after tokenization")
                owner = index.get(toks)
                if owner is not None and owner != label:
                    raise ValueError(f"phrase {phrase!r} appears under both {owner!r} and {label!r}")
                index[toks] = label
        # Greedy matcher: phrases grouped by first token, longest first.
        matcher: dict[str, list[tuple[str, ...]]] = {}
        for toks in index:
            matcher.setdefault(toks[0], []).append(toks)
        for options in matcher.values():
            options.sort(key=lambda t: (-len(t), t))
        object.__setattr__(self, "_phrase_index", index)
        object.__setattr__(self, "_matcher", matcher)
        object.__setattr__(self, "_label_set", frozenset(seen))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.classes)

    @property
    def label_set(self) -> frozenset[str]:
        return self._label_set  # type: ignore[attr-defined]

    @property
    def phrase_index(self) -> Mapping[tuple[str, ...], str]:
        """Mapping from tokenized phrase to its class label."""
        return self._phrase_index  # type: ignore[attr-defined]

    @classmethod
    def from_mapping(cls, obj: object) -> "DirectionTaxonomy":
        """Build a taxonomy from the JSON shape {"name": ..., "classes": [{"label","phrases"}]}."""
        if not isinstance(obj, dict):
            raise ValueError("taxonomy document must be a JSON object")
        name = obj.get("name")
        classes = obj.get("classes")
        if not isinstance(name, str) or not name:
            raise ValueError("taxonomy 'name' must be a nonempty string")
        if not isinstance(classes, list) or not classes:
            raise ValueError("taxonomy 'classes' must be a nonempty list")
        parsed: list[tuple[str, tuple[str, ...]]] = []
        for entry in classes:
            if not isinstance(entry, dict):
                raise ValueError("each taxonomy class must be an object")
            label = entry.get("label")
            phrases = entry.get("phrases")
            if not isinstance(label, str) or not label:
                raise ValueError("class 'label' must be a nonempty string")
            if (
                not isinstance(phrases, list)
                or not phrases
                or not all(isinstance(p, str) for p in phrases)
            ):
                raise ValueError(f"class {label!r}: 'phrases' must be a nonempty list of strings")
            parsed.append((label, tuple(phrases)))
        return cls(name=name, classes=tuple(parsed))


def load_taxonomy(source: str | Path) -> DirectionTaxonomy:
    """Load a taxonomy from a JSON file path or by bare name from the data dir.

    A bare name like "r2r" resolves to <data_dir>/taxonomies/<name>.json; any
    string that looks like a path (contains a separator, ends in .json, or
    names an existing file) is read directly.
    """
    path = Path(source)
    if isinstance(source, str) and not _looks_like_path(source):
        path = data_dir() / "taxonomies" / f"{source}.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    return DirectionTaxonomy.from_mapping(doc)


def _looks_like_path(s: str) -> bool:
    if s.endswith(".json") or os.sep in s:
        return True
    if os.altsep and os.altsep in s:
        return True
    return Path(s).exists()


def parse_directions(instruction: Instruction, taxonomy: DirectionTaxonomy) -> list[DirectionPhrase]:
    """Greedy longest-match scan for direction phrases, left to right.

    At each token position the longest matching phrase from any class wins and
    the scan resumes past it, so matched spans never overlap.
    """
    matcher: dict[str, list[tuple[str, ...]]] = taxonomy._matcher  # type: ignore[attr-defined]
    index = taxonomy.phrase_index
    tokens = instruction.tokens
    out: list[DirectionPhrase] = []
    i = 0
    while i < len(tokens):
        matched = False
        for phrase in matcher.get(tokens[i], ()):
            if tokens[i : i + len(phrase)] == phrase:
                out.append(DirectionPhrase(index[phrase], (i, i + len(phrase))))
                i += len(phrase)
                matched = True
                break
        if not matched:
            i += 1
    return out


def direction_labels(instruction: Instruction, taxonomy: DirectionTaxonomy) -> list[str]:
    """The ordered sequence of direction-class labels found in the instruction."""
    return [p.class_label for p in parse_directions(instruction, taxonomy)]


@dataclass(frozen=True)
class SubInstruction:
    """A contiguous token span forming one action chunk; index is its 1-based ordinal."""

    token_span: tuple[int, int]
    index: int


def load_verb_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """Read the action-verb lexicon: one lowercase verb per line, '#' comments allowed."""
    p = Path(path) if path is not None else data_dir() / "verbs.txt"
    verbs: set[str] = set()
    for line in p.read_text(encoding="utf-8").splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        verbs.add(stripped.lower())
    return frozenset(verbs)


def chunk_instruction(
    instruction: Instruction, verbs: Iterable[str] | None = None
) -> list[SubInstruction]:
    """Split an instruction into sub-instruction token spans.

    A new chunk opens before "and", before "then", and before any token that
    follows a comma or period in the raw text. Chunks that contain no verb
    from the lexicon are merged into the chunk before them; the first chunk is
    always kept. The returned spans partition the full token range in order.
    """
    if len(instruction.tokens) == 0:
        raise ValueError("cannot chunk an instruction with no tokens")
    verb_set = frozenset(verbs) if verbs is not None else load_verb_lexicon()

    cuts = [0]
    for i in range(1, len(instruction.tokens)):
        gap = instruction.raw[instruction.spans[i - 1][1] : instruction.spans[i][0]]
        if instruction.tokens[i] in BOUNDARY_TOKENS or any(ch in _CLAUSE_PUNCT for ch in gap):
            cuts.append(i)
    cuts.append(len(instruction.tokens))

    spans = [(cuts[k], cuts[k + 1]) for k in range(len(cuts) - 1)]
    merged = [spans[0]]
    for start, end in spans[1:]:
        if any(tok in verb_set for tok in instruction.tokens[start:end]):
            merged.append((start, end))
        else:
            merged[-1] = (merged[-1][0], end)
    return [SubInstruction(token_span=span, index=i) for i, span in enumerate(merged, 1)]


def span_text(instruction: Instruction, span: tuple[int, int]) -> str:
    """Tokens in the given span joined with single spaces."""
    start, end = span
    return " ".join(instruction.tokens[start:end])
