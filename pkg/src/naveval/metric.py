"""Semantic-tuple matching, LCS direction matching, and SPICE / SPICE-D scoring."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .text import DirectionTaxonomy, Instruction, direction_labels

# A semantic tuple holds 1-3 lowercase lemmas: (object,), (object, attribute),
# or (object, relation, object).
SemanticTuple = tuple[str, ...]

AGGREGATIONS = ("max", "mean")


def normalize_tuples(raw: Iterable[Sequence[str]]) -> frozenset[SemanticTuple]:
    """Validate and normalize raw tuple data into a set of lowercase tuples."""
    out: set[SemanticTuple] = set()
    for item in raw:
        if isinstance(item, str):
            raise ValueError("each semantic tuple must be a sequence of strings, not a bare string")
        elems = tuple(item)
        if not 1 <= len(elems) <= 3:
            raise ValueError(f"semantic tuple arity must be 1-3, got {len(elems)}")
        norm = []
        for e in elems:
            if not isinstance(e, str) or not e.strip():
                raise ValueError(f"semantic tuple elements must be nonempty strings, got {e!r}")
            norm.append(e.strip().lower())
        out.add(tuple(norm))
    return frozenset(out)


@dataclass(frozen=True)
class SemanticTupleSet:
    """A normalized set of semantic tuples tagged with its side of the comparison."""

    tuples: frozenset[SemanticTuple]
    source: str = "candidate"

    @classmethod
    def from_raw(cls, raw: Iterable[Sequence[str]], source: str = "candidate") -> "SemanticTupleSet":
        return cls(tuples=normalize_tuples(raw), source=source)

    def __len__(self) -> int:
        return len(self.tuples)


class SynonymMap:
    """Canonicalizes words to the representative (first member) of their synonym group."""

    def __init__(self, groups: Iterable[Iterable[str]] = ()):
        mapping: dict[str, str] = {}
        for group in groups:
            members = [w.strip().lower() for w in group]
            if not members or any(not m for m in members):
                raise ValueError("synonym groups must be nonempty lists of nonempty strings")
            rep = members[0]
            for member in members:
                existing = mapping.get(member)
                if existing is not None and existing != rep:
                    raise ValueError(f"word {member!r} appears in more than one synonym group")
                mapping[member] = rep
        self._mapping = mapping

    @classmethod
    def load(cls, path: str | Path) -> "SynonymMap":
        """Read synonym groups from a JSON file holding a list of string lists."""
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, list) or not all(
            isinstance(g, list) and all(isinstance(w, str) for w in g) for g in doc
        ):
            raise ValueError("synonym file must hold a JSON list of lists of strings")
        return cls(doc)

    def canonical(self, word: str) -> str:
        return self._mapping.get(word, word)

    def canonical_tuple(self, t: SemanticTuple) -> SemanticTuple:
        return tuple(self.canonical(e) for e in t)

    def canonical_set(self, tuples: frozenset[SemanticTuple]) -> frozenset[SemanticTuple]:
        return frozenset(self.canonical_tuple(t) for t in tuples)

    def __len__(self) -> int:
        return len(self._mapping)


def _coerce_tuple_set(value: object) -> frozenset[SemanticTuple]:
    if value is None:
        return frozenset()
    if isinstance(value, SemanticTupleSet):
        return value.tuples
    return normalize_tuples(value)  # type: ignore[arg-type]


def _canonical_sets(
    candidate: object, reference: object, synonyms: SynonymMap | None
) -> tuple[frozenset[SemanticTuple], frozenset[SemanticTuple]]:
    cand = _coerce_tuple_set(candidate)
    ref = _coerce_tuple_set(reference)
    if synonyms is not None:
        cand = synonyms.canonical_set(cand)
        ref = synonyms.canonical_set(ref)
    return cand, ref


def match_tuples(candidate: object, reference: object, synonyms: SynonymMap | None = None) -> int:
    """Count of exactly matching tuples after synonym canonicalization.

    Set semantics: each candidate tuple matches at most one reference tuple.
    """
    cand, ref = _canonical_sets(candidate, reference, synonyms)
    return len(cand & ref)


def _ratio(num: int, den: int) -> float:
    # Convention: a ratio with zero denominator is 0.
    return num / den if den > 0 else 0.0


def _f_score(p: float, r: float) -> float:
    # Harmonic mean with F(0, 0) defined as 0.
    return 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0


def spice_score(
    candidate: object, reference: object, synonyms: SynonymMap | None = None
) -> tuple[float, float, float]:
    """Tuple-level precision, recall, and their harmonic mean.

    Counts are taken on the canonicalized sets, so precision and recall always
    land in [0, 1].
    """
    cand, ref = _canonical_sets(candidate, reference, synonyms)
    inter = len(cand & ref)
    pr = _ratio(inter, len(cand))
    re = _ratio(inter, len(ref))
    return pr, re, _f_score(pr, re)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence of two label sequences."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class ScoreReport:
    """SPICE and SPICE-D scores for one candidate-reference comparison.

    For reports produced by spice_d_score, spice is the harmonic mean of
    (pr_s, re_s) and spice_d the harmonic mean of (pr_sd, re_sd); reports
    aggregated by mean over several references carry field-wise means instead.
    """

    spice: float
    spice_d: float
    pr_s: float
    re_s: float
    pr_sd: float
    re_sd: float
    n_cand_tuples: int
    n_ref_tuples: int
    n_tuple_matches: int
    n_cand_dirs: int
    n_ref_dirs: int
    n_dir_matches: int
    direction_only: bool = False

    def to_dict(self) -> dict:
        return {
            "spice": self.spice,
            "spice_d": self.spice_d,
            "pr_s": self.pr_s,
            "re_s": self.re_s,
            "pr_sd": self.pr_sd,
            "re_sd": self.re_sd,
            "counts": {
                "cand_tuples": self.n_cand_tuples,
                "ref_tuples": self.n_ref_tuples,
                "tuple_matches": self.n_tuple_matches,
                "cand_dirs": self.n_cand_dirs,
                "ref_dirs": self.n_ref_dirs,
                "dir_matches": self.n_dir_matches,
            },
            "direction_only": self.direction_only,
        }


def spice_d_score(
    candidate_tuples: object,
    reference_tuples: object,
    candidate_dirs: Sequence[str],
    reference_dirs: Sequence[str],
    synonyms: SynonymMap | None = None,
) -> ScoreReport:
    """Direction-aware score: tuple matches and LCS direction matches pooled.

    Precision adds the direction-sequence LCS length to the tuple intersection
    and divides by candidate tuple plus direction counts; recall divides by
    the reference counts; the score is their harmonic mean. With no directions
    on either side this reduces exactly to plain SPICE.
    """
    cand, ref = _canonical_sets(candidate_tuples, reference_tuples, synonyms)
    inter = len(cand & ref)
    pr_s = _ratio(inter, len(cand))
    re_s = _ratio(inter, len(ref))

    matches = lcs_length(candidate_dirs, reference_dirs)
    pr_sd = _ratio(inter + matches, len(cand) + len(candidate_dirs))
    re_sd = _ratio(inter + matches, len(ref) + len(reference_dirs))

    return ScoreReport(
        spice=_f_score(pr_s, re_s),
        spice_d=_f_score(pr_sd, re_sd),
        pr_s=pr_s,
        re_s=re_s,
        pr_sd=pr_sd,
        re_sd=re_sd,
        n_cand_tuples=len(cand),
        n_ref_tuples=len(ref),
        n_tuple_matches=inter,
        n_cand_dirs=len(candidate_dirs),
        n_ref_dirs=len(reference_dirs),
        n_dir_matches=matches,
    )


@dataclass(frozen=True)
class ScoringInput:
    """One side of a comparison: tokenized text, optional tuples, optional labels.

    tuples=None means the tuple annotation is absent (direction-only scoring);
    an empty set means it is present but empty. When directions is None the
    labels are parsed from the instruction text.
    """

    instruction: Instruction
    tuples: frozenset[SemanticTuple] | None = None
    directions: tuple[str, ...] | None = None


def _resolve_directions(item: ScoringInput, taxonomy: DirectionTaxonomy) -> list[str]:
    if item.directions is not None:
        unknown = sorted(set(item.directions) - taxonomy.label_set)
        if unknown:
            raise ValueError(
                f"direction labels not in taxonomy {taxonomy.name!r}: {', '.join(unknown)}"
            )
        return list(item.directions)
    return direction_labels(item.instruction, taxonomy)


def score_pair(
    candidate: ScoringInput,
    references: Sequence[ScoringInput],
    taxonomy: DirectionTaxonomy,
    synonyms: SynonymMap | None = None,
    aggregation: str = "max",
) -> ScoreReport:
    """Score one candidate against one or more references.

    Each reference is scored separately. Under "max" the report of the
    best-scoring reference is returned (ties favor the earliest); under "mean"
    the six score fields are averaged and the counts are those of the best
    reference. If the candidate or any reference lacks tuple annotations the
    whole record is scored on directions alone and flagged direction_only.
    """
    if not references:
        raise ValueError("at least one reference is required")
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")

    direction_only = candidate.tuples is None or any(r.tuples is None for r in references)
    cand_tuples: frozenset[SemanticTuple] = frozenset() if direction_only else candidate.tuples
    cand_dirs = _resolve_directions(candidate, taxonomy)

    reports = []
    for ref in references:
        ref_tuples: frozenset[SemanticTuple] = frozenset() if direction_only else ref.tuples
        ref_dirs = _resolve_directions(ref, taxonomy)
        reports.append(spice_d_score(cand_tuples, ref_tuples, cand_dirs, ref_dirs, synonyms))

    best = max(range(len(reports)), key=lambda i: (reports[i].spice_d, -i))
    chosen = reports[best]
    if aggregation == "mean":
        n = len(reports)
        chosen = replace(
            chosen,
            spice=sum(r.spice for r in reports) / n,
            spice_d=sum(r.spice_d for r in reports) / n,
            pr_s=sum(r.pr_s for r in reports) / n,
            re_s=sum(r.re_s for r in reports) / n,
            pr_sd=sum(r.pr_sd for r in reports) / n,
            re_sd=sum(r.re_sd for r in reports) / n,
        )
    return replace(chosen, direction_only=direction_only)
