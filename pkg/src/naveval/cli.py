"""Command-line interface: corpus scoring, alignment reports, and utilities.

Exit codes: 0 on success, 1 on input errors (missing files, unresolvable ids,
degenerate data), 2 on schema violations (malformed JSON/JSONL/CSV/TSV).
Output files are written atomically; stdout is used when --out is absent.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .align import (
    DEFAULT_EPS,
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    attention_coverage_loss,
    build_cost,
    contrastive_loss,
    dtw_align,
    softmax_attention,
    target_from_word_map,
    total_loss,
)
from .knowledge import DEFAULT_TOP_K, KnowledgeBaseError, load_kb, retrieve_facts
from .metric import ScoringInput, SemanticTuple, SynonymMap, normalize_tuples, score_pair
from .stats import correlate_metrics
from .text import (
    DirectionTaxonomy,
    chunk_instruction,
    direction_labels,
    load_taxonomy,
    load_verb_lexicon,
    span_text,
    tokenize,
)

DEFAULT_TAXONOMY = "r2r"


class CommandError(Exception):
    exit_code = 1


class InputError(CommandError):
    exit_code = 1


class SchemaError(CommandError):
    exit_code = 2


@dataclass(frozen=True)
class EvalRecord:
    """One JSONL corpus row: id, instruction text, optional tuples and labels."""

    id: str
    text: str
    tuples: frozenset[SemanticTuple] | None
    directions: tuple[str, ...] | None


def _parse_record(obj: object, where: str) -> EvalRecord:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: record must be a JSON object")
    rid = obj.get("id")
    text = obj.get("text")
    if not isinstance(rid, str) or not rid:
        raise SchemaError(f"{where}: 'id' must be a nonempty string")
    if not isinstance(text, str) or not text.strip():
        raise SchemaError(f"{where}: 'text' must be a nonempty string")
    tuples = None
    if obj.get("tuples") is not None:
        if not isinstance(obj["tuples"], list):
            raise SchemaError(f"{where}: 'tuples' must be a list of string lists")
        try:
            tuples = normalize_tuples(obj["tuples"])
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from None
    directions = None
    if obj.get("directions") is not None:
        d = obj["directions"]
        if not isinstance(d, list) or not all(isinstance(lab, str) and lab for lab in d):
            raise SchemaError(f"{where}: 'directions' must be a list of nonempty strings")
        directions = tuple(d)
    return EvalRecord(id=rid, text=text, tuples=tuples, directions=directions)


def _load_jsonl(path: Path) -> list[EvalRecord]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from None
    records = []
    for lineno, line in enumerate(raw.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
        records.append(_parse_record(obj, f"{path}:{lineno}"))
    return records


def _load_json(path: Path) -> object:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or Path("."))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        _write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _emit_json(doc: object, out: str | None) -> None:
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _note(args: argparse.Namespace, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _taxonomy_from_args(args: argparse.Namespace) -> DirectionTaxonomy:
    try:
        return load_taxonomy(args.taxonomy)
    except FileNotFoundError as exc:
        raise InputError(f"taxonomy {args.taxonomy!r} not found: {exc}") from None
    except ValueError as exc:
        raise SchemaError(f"taxonomy {args.taxonomy!r}: {exc}") from None


def _synonyms_from_args(args: argparse.Namespace) -> SynonymMap | None:
    if not args.synonyms:
        return None
    try:
        return SynonymMap.load(args.synonyms)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise SchemaError(f"{args.synonyms}: {exc}") from None


# ---------------------------------------------------------------------------
# score


def _scoring_input(record: EvalRecord) -> ScoringInput:
    return ScoringInput(
        instruction=tokenize(record.text), tuples=record.tuples, directions=record.directions
    )


def _check_overrides(record: EvalRecord, taxonomy: DirectionTaxonomy, where: str) -> None:
    if record.directions is None:
        return
    unknown = sorted(set(record.directions) - taxonomy.label_set)
    if unknown:
        raise SchemaError(
            f"{where}: direction labels not in taxonomy {taxonomy.name!r}: {', '.join(unknown)}"
        )


def _cmd_score(args: argparse.Namespace) -> int:
    candidates = _load_jsonl(Path(args.candidates))
    if not candidates:
        raise InputError(f"{args.candidates}: no candidate records")
    seen: set[str] = set()
    for rec in candidates:
        if rec.id in seen:
            raise SchemaError(f"{args.candidates}: duplicate candidate id {rec.id!r}")
        seen.add(rec.id)

    references: dict[str, list[EvalRecord]] = {}
    for rec in _load_jsonl(Path(args.references)):
        references.setdefault(rec.id, []).append(rec)

    missing = [rec.id for rec in candidates if rec.id not in references]
    if missing:
        raise InputError("candidate ids missing from references: " + ", ".join(missing))

    taxonomy = _taxonomy_from_args(args)
    synonyms = _synonyms_from_args(args)

    rows = []
    for rec in candidates:
        _check_overrides(rec, taxonomy, f"{args.candidates} id {rec.id!r}")
        refs = references[rec.id]
        for ref in refs:
            _check_overrides(ref, taxonomy, f"{args.references} id {rec.id!r}")
        try:
            report = score_pair(
                _scoring_input(rec),
                [_scoring_input(r) for r in refs],
                taxonomy,
                synonyms,
                aggregation=args.aggregation,
            )
        except ValueError as exc:
            raise InputError(f"id {rec.id!r}: {exc}") from None
        rows.append({"id": rec.id, "n_references": len(refs), **report.to_dict()})

    n = len(rows)
    corpus = {
        "mean_spice": sum(r["spice"] for r in rows) / n,
        "mean_spice_d": sum(r["spice_d"] for r in rows) / n,
        "n_records": n,
        "n_direction_only": sum(1 for r in rows if r["direction_only"]),
        "n_dropped": 0,
    }
    doc = {
        "taxonomy": taxonomy.name,
        "aggregation": args.aggregation,
        "records": rows,
        "corpus": corpus,
    }
    _emit_json(doc, args.out)
    _note(
        args,
        f"scored {n} records: mean SPICE {corpus['mean_spice']:.4f}, "
        f"mean SPICE-D {corpus['mean_spice_d']:.4f}",
    )
    return 0


# ---------------------------------------------------------------------------
# align


def _cmd_align(args: argparse.Namespace) -> int:
    doc = _load_json(Path(args.features))
    if not isinstance(doc, dict):
        raise SchemaError(f"{args.features}: feature document must be a JSON object")
    for key in ("sub_instructions", "panoramas", "words", "word_to_sub"):
        if key not in doc:
            raise SchemaError(f"{args.features}: missing required key {key!r}")

    word_to_sub = doc["word_to_sub"]
    if not isinstance(word_to_sub, list):
        raise SchemaError(f"{args.features}: 'word_to_sub' must be a list of integers")

    try:
        cost = build_cost(doc["sub_instructions"], doc["panoramas"])
        a = dtw_align(cost)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    words = doc["words"]
    if not isinstance(words, list) or len(words) != len(word_to_sub):
        raise SchemaError(
            f"{args.features}: 'word_to_sub' must map every word "
            f"({len(word_to_sub)} entries for {len(words) if isinstance(words, list) else '?'} words)"
        )
    try:
        target = target_from_word_map(a, word_to_sub)
    except ValueError as exc:
        raise SchemaError(f"{args.features}: {exc}") from None

    try:
        beta = softmax_attention(words, doc["panoramas"])
        l_att = attention_coverage_loss(beta, target, eps=args.eps)
        l_nce = contrastive_loss(doc["panoramas"], words, target)
        total = total_loss(args.ce, l_att, l_nce, args.lambda1, args.lambda2)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    out_doc = {
        "A": a.tolist(),
        "A_prime": target.a_prime.astype(int).tolist(),
        "l_att": l_att,
        "l_nce": l_nce,
        "ce": args.ce,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "total_loss": total,
    }
    _emit_json(out_doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# directions / chunk


def _cmd_directions(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy_from_args(args)
    labels = direction_labels(tokenize(args.text), taxonomy)
    _emit(" ".join(labels) + "\n", args.out)
    return 0


def _cmd_chunk(args: argparse.Namespace) -> int:
    instruction = tokenize(args.text)
    try:
        verbs = load_verb_lexicon()
        chunks = chunk_instruction(instruction, verbs)
    except FileNotFoundError as exc:
        raise InputError(f"verb lexicon not found: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    lines = [span_text(instruction, c.token_span) for c in chunks]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# correlate


def _read_score_table(path: Path) -> tuple[list[str], dict[str, list[float | None]], list[float | None]]:
    try:
        handle = path.open(encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(str(exc)) from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty table") from None
        if len(header) < 3 or header[0] != "id" or header[-1] != "human":
            raise SchemaError(
                f"{path}: header must be 'id', one or more metric names, then 'human'"
            )
        metric_names = header[1:-1]
        ids: list[str] = []
        columns: dict[str, list[float | None]] = {name: [] for name in metric_names}
        human: list[float | None] = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            ids.append(row[0])
            for name, cell in zip(metric_names, row[1:-1]):
                columns[name].append(_parse_cell(cell, path, lineno))
            human.append(_parse_cell(row[-1], path, lineno))
    return ids, columns, human


def _parse_cell(cell: str, path: Path, lineno: int) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"{path}:{lineno}: non-numeric value {cell!r}") from None


def _cmd_correlate(args: argparse.Namespace) -> int:
    ids, columns, human = _read_score_table(Path(args.table))

    if args.min_directions is not None:
        if args.min_directions < 0:
            raise InputError("--min-directions must be nonnegative")
        if not args.instructions:
            raise InputError("--min-directions requires --instructions with the instruction texts")
        taxonomy = _taxonomy_from_args(args)
        texts = {rec.id: rec.text for rec in _load_jsonl(Path(args.instructions))}
        unknown = [rid for rid in ids if rid not in texts]
        if unknown:
            raise InputError(
                "table ids missing from the instructions file: " + ", ".join(unknown)
            )
        keep = [
            i
            for i, rid in enumerate(ids)
            if len(direction_labels(tokenize(texts[rid]), taxonomy)) >= args.min_directions
        ]
        n_filtered = len(ids) - len(keep)
        ids = [ids[i] for i in keep]
        columns = {name: [col[i] for i in keep] for name, col in columns.items()}
        human = [human[i] for i in keep]
        _note(args, f"direction filter kept {len(ids)} rows, removed {n_filtered}")

    try:
        report = correlate_metrics(columns, human)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    entries = [
        {"metric": e.metric, "pearson": e.pearson, "n": e.n} for e in report.entries
    ]
    _emit_json(entries, args.out)
    if report.n_dropped:
        _note(args, f"dropped {report.n_dropped} rows with missing values")
    return 0


# ---------------------------------------------------------------------------
# kb


def _cmd_kb(args: argparse.Namespace) -> int:
    if args.kb_command != "query":
        raise InputError(f"unknown kb subcommand {args.kb_command!r}")
    try:
        kb = load_kb(Path(args.kb))
    except OSError as exc:
        raise InputError(str(exc)) from None
    except KnowledgeBaseError as exc:
        raise SchemaError(str(exc)) from None
    try:
        facts = retrieve_facts(kb, args.entity, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    lines = [f"{f.head}\t{f.relation}\t{f.tail}\t{f.weight}" for f in facts]
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--taxonomy",
        default=DEFAULT_TAXONOMY,
        help="direction taxonomy: a bundled name (r2r, urban) or a JSON file path",
    )
    common.add_argument("--synonyms", default=None, help="JSON file of synonym groups")
    common.add_argument(
        "--aggregation",
        choices=("max", "mean"),
        default="max",
        help="how to combine scores over multiple references",
    )
    common.add_argument("--lambda1", type=float, default=DEFAULT_LAMBDA1, help="attention-coverage loss weight")
    common.add_argument("--lambda2", type=float, default=DEFAULT_LAMBDA2, help="contrastive loss weight")
    common.add_argument("--eps", type=float, default=DEFAULT_EPS, help="log clamp for the coverage loss")
    common.add_argument("--out", default=None, help="write output to this file atomically instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress informational stderr messages")

    parser = argparse.ArgumentParser(
        prog="naveval", description="Navigation-instruction evaluation toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", parents=[common], help="score a JSONL corpus against references")
    p_score.add_argument("candidates", help="candidate records, one JSON object per line")
    p_score.add_argument("references", help="reference records; repeat an id for multiple references")

    p_align = sub.add_parser("align", parents=[common], help="DTW-align feature sequences and report losses")
    p_align.add_argument("features", help="JSON file with sub_instructions, panoramas, words, word_to_sub")
    p_align.add_argument("--ce", type=float, default=0.0, help="cross-entropy term added to the total loss")

    p_dirs = sub.add_parser("directions", parents=[common], help="print direction labels parsed from text")
    p_dirs.add_argument("--text", required=True)

    p_chunk = sub.add_parser("chunk", parents=[common], help="print sub-instruction chunks, one per line")
    p_chunk.add_argument("--text", required=True)

    p_corr = sub.add_parser("correlate", parents=[common], help="correlate metric columns with human scores")
    p_corr.add_argument("table", help="CSV with columns: id, <metrics...>, human")
    p_corr.add_argument("--min-directions", type=int, default=None, help="keep only rows whose instruction has at least this many direction phrases")
    p_corr.add_argument("--instructions", default=None, help="JSONL instruction texts, required by --min-directions")

    p_kb = sub.add_parser("kb", help="knowledge-base utilities")
    kb_sub = p_kb.add_subparsers(dest="kb_command", required=True)
    p_query = kb_sub.add_parser("query", parents=[common], help="print top-k facts for an entity as TSV")
    p_query.add_argument("--kb", required=True, help="tab-separated knowledge-base file")
    p_query.add_argument("--entity", required=True)
    p_query.add_argument("--k", type=int, default=DEFAULT_TOP_K)

    return parser


_HANDLERS = {
    "score": _cmd_score,
    "align": _cmd_align,
    "directions": _cmd_directions,
    "chunk": _cmd_chunk,
    "correlate": _cmd_correlate,
    "kb": _cmd_kb,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except CommandError as exc:
        print(f"naveval: error: {exc}", file=sys.stderr)
        return exc.exit_code


def run() -> None:
    raise SystemExit(main())
