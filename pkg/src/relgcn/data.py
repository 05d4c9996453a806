"""Dataset readers and writers: N-Triples graphs, TSV splits and label files.

N-Triples support is a pragmatic subset: IRIs, blank nodes and literals are
kept as opaque term strings; only term identity matters.
"""

from __future__ import annotations

import csv
import gzip
import io
import os
import re
from typing import NamedTuple

import numpy as np

from .errors import DataError, ParseError
from .graph import KnowledgeGraph, LabeledNodeSet
from .training import atomic_write

__all__ = [
    "LoadedGraph",
    "TSVSplits",
    "load_ntriples",
    "parse_ntriples_line",
    "write_ntriples",
    "load_tsv_split",
    "load_labels",
    "write_labels",
]

_IRI = r"<[^<>\"{}|^`\\\s]*>"
_BNODE = r"_:[A-Za-z0-9_][A-Za-z0-9_.\-]*"
_LITERAL = r'"(?:[^"\\\n\r]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^' + _IRI + r")?"
_LINE = re.compile(
    rf"^\s*(?P<s>{_IRI}|{_BNODE})\s+(?P<p>{_IRI})\s+(?P<o>{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*(?:#.*)?$"
)


class LoadedGraph(NamedTuple):
    graph: KnowledgeGraph
    entities: list
    relations: list


class TSVSplits(NamedTuple):
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    entities: list
    relations: list

    @property
    def num_entities(self):
        return len(self.entities)

    @property
    def num_relations(self):
        return len(self.relations)


def _open_text(path):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def parse_ntriples_line(line: str):
    """Return ``(subject, predicate, object)`` terms, ``None`` for blank/comment lines.

    Raises :class:`ParseError` for anything else that does not parse.
    """
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    m = _LINE.match(line.rstrip("\r\n"))
    if m is None:
        raise ParseError(f"malformed N-Triples line: {stripped[:80]!r}")
    return m.group("s"), m.group("p"), m.group("o")


def load_ntriples(path, exclude_relations=()) -> LoadedGraph:
    """Read an N-Triples file (optionally gzipped) into a :class:`KnowledgeGraph`.

    Entity and relation ids are assigned in order of first appearance
    (subject before object). Predicates listed in ``exclude_relations``
    (with or without angle brackets) are skipped entirely.
    """
    excluded = {p if p.startswith("<") else f"<{p}>" for p in exclude_relations}
    ents, rels, rows = {}, {}, []
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            try:
                terms = parse_ntriples_line(line)
            except ParseError as exc:
                raise ParseError(str(exc).split(": ", 1)[-1], path=path, line=lineno) from None
            if terms is None:
                continue
            s, p, o = terms
            if p in excluded:
                continue
            si = ents.setdefault(s, len(ents))
            ri = rels.setdefault(p, len(rels))
            oi = ents.setdefault(o, len(ents))
            rows.append((si, ri, oi))
    if not rows:
        raise DataError(f"{path}: no triples (empty graph)")
    g = KnowledgeGraph(len(ents), len(rels), np.array(rows, dtype=np.int64))
    return LoadedGraph(g, list(ents), list(rels))


def write_ntriples(path, graph: KnowledgeGraph, entities, relations):
    """Write ``graph`` back out (atomically); term strings are emitted verbatim."""
    lines = [f"{entities[s]} {relations[r]} {entities[o]} .\n" for s, r, o in graph.triples.tolist()]
    atomic_write(path, "".join(lines).encode("utf-8"))


def _read_tsv(path, ents, rels):
    rows = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(f"expected 3 tab-separated columns, got {len(cols)}", path=path, line=lineno)
            s, r, o = (c.strip() for c in cols)
            rows.append((ents.setdefault(s, len(ents)), rels.setdefault(r, len(rels)), ents.setdefault(o, len(ents))))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def load_tsv_split(directory) -> TSVSplits:
    """Read ``train.txt``, ``valid.txt`` and ``test.txt`` (tab-separated s, r, o).

    One vocabulary is shared by all three splits, built in file order
    train, valid, test.
    """
    ents, rels = {}, {}
    parts = []
    for name in ("train", "valid", "test"):
        path = os.path.join(directory, f"{name}.txt")
        if not os.path.exists(path):
            raise DataError(f"missing split file {path}")
        parts.append(_read_tsv(path, ents, rels))
    return TSVSplits(*parts, list(ents), list(rels))


def load_labels(path, entity_index: dict, entity_column, label_column, classes=None) -> tuple:
    """Read a tab-separated label file with a header row.

    Entity cells are matched against ``entity_index`` with and without
    angle brackets. ``classes`` fixes the class-name order; by default it is
    the sorted set of labels in this file. Returns ``(LabeledNodeSet, classes)``.
    """
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise DataError(f"cannot open label file {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh, delimiter="\t")
        if reader.fieldnames is None or entity_column not in reader.fieldnames or label_column not in reader.fieldnames:
            raise DataError(f"{path}: needs columns {entity_column!r} and {label_column!r}")
        pairs = []
        for lineno, row in enumerate(reader, 2):
            term = row[entity_column].strip()
            key = term if term in entity_index else f"<{term}>"
            if key not in entity_index:
                raise DataError(f"{path}:{lineno}: labelled entity {term!r} is not in the graph")
            pairs.append((entity_index[key], row[label_column].strip()))
    if classes is None:
        classes = sorted({lab for _, lab in pairs})
    cls_index = {c: i for i, c in enumerate(classes)}
    for _, lab in pairs:
        if lab not in cls_index:
            raise DataError(f"{path}: unknown class {lab!r}")
    ents = np.array([e for e, _ in pairs], dtype=np.int64)
    labs = np.array([cls_index[lab] for _, lab in pairs], dtype=np.int64)
    return LabeledNodeSet(ents, labs, len(classes)), list(classes)


def write_labels(path, labels: LabeledNodeSet, entities, classes, entity_column="entity", label_column="label"):
    lines = [f"{entity_column}\t{label_column}\n"]
    for e, c in zip(labels.entities.tolist(), labels.classes.tolist()):
        lines.append(f"{entities[e]}\t{classes[c]}\n")
    atomic_write(path, "".join(lines).encode("utf-8"))
