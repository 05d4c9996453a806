import gzip

import numpy as np
import pytest

from relgcn.data import (
    load_labels,
    load_ntriples,
    load_tsv_split,
    parse_ntriples_line,
    write_labels,
    write_ntriples,
)
from relgcn.errors import DataError, ParseError
from relgcn.graph import KnowledgeGraph, LabeledNodeSet

# -- generated corpus ---------------------------------------------------------

IRI_CHARS = "abcxyz019/#:._-~%?=&"


def gen_iri(rng):
    body = "".join(rng.choice(list(IRI_CHARS), size=int(rng.integers(0, 15))))
    return f"<http://ex.org/{body}>"


def gen_bnode(rng):
    return "_:" + rng.choice(["b", "node", "x_1", "B0"]) + str(int(rng.integers(0, 99)))


def gen_literal(rng):
    body = "".join(rng.choice(list("abc 019 <>.#_:'"), size=int(rng.integers(0, 10))))
    body += rng.choice(["", "\\\"", "\\n", "\\\\", "\\u00e9"])
    suffix = rng.choice(["", "@en", "@en-GB", "^^<http://www.w3.org/2001/XMLSchema#string>"])
    return f'"{body}"{suffix}'


def gen_valid(rng):
    s = gen_iri(rng) if rng.random() < 0.7 else gen_bnode(rng)
    p = gen_iri(rng)
    o = [gen_iri, gen_bnode, gen_literal][int(rng.integers(0, 3))](rng)
    sep = rng.choice([" ", "\t", "  "])
    tail = rng.choice([" .", ".", " . ", " . # trailing comment"])
    return f"{rng.choice(['', ' '])}{s}{sep}{p}{sep}{o}{tail}", (s, p, o)


def gen_malformed(rng):
    """A line that violates the subset grammar in one known way."""
    s, p, o = gen_iri(rng), gen_iri(rng), gen_iri(rng)
    kind = int(rng.integers(0, 9))
    if kind == 0:
        return f"{s} {p} {o}"  # missing terminating dot
    if kind == 1:
        return f"{s[1:]} {p} {o} ."  # subject lost its opening bracket
    if kind == 2:
        return f'{gen_literal(rng)} {p} {o} .'  # literal in subject position
    if kind == 3:
        return f"{s} {gen_literal(rng)} {o} ."  # literal as predicate
    if kind == 4:
        return f"{s} {p} \"unterminated ."
    if kind == 5:
        return f"{s} {p} ."  # only two terms
    if kind == 6:
        return f"{s} {p} {o} {o} ."  # four terms
    if kind == 7:
        return f"{s} {gen_bnode(rng)} {o} ."  # blank node as predicate
    return f"<http://ex.org/a b> {p} {o} ."  # whitespace inside an IRI


def test_fuzz_corpus_accepts_valid_rejects_malformed():
    rng = np.random.default_rng(2024)
    valid = [gen_valid(rng) for _ in range(1000)]
    malformed = [gen_malformed(rng) for _ in range(1000)]
    for line, terms in valid:
        assert parse_ntriples_line(line) == terms, line
    for line in malformed:
        with pytest.raises(ParseError):
            parse_ntriples_line(line)
    for line in ["", "   ", "# a comment", "   # indented comment"]:
        assert parse_ntriples_line(line) is None


# -- N-Triples files ----------------------------------------------------------


def test_single_line_graph(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text("<a> <p> <b> .\n")
    loaded = load_ntriples(f)
    assert loaded.graph.num_entities == 2
    assert loaded.graph.num_relations == 1
    assert loaded.graph.num_edges == 1


def test_duplicate_lines_stored_once(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text("<a> <p> <b> .\n<a> <p> <b> .\n\n# note\n<b> <p> \"lit\" .\n")
    loaded = load_ntriples(f)
    assert loaded.graph.num_edges == 2
    assert loaded.entities == ["<a>", "<b>", '"lit"']


def test_first_appearance_ids_and_exclusion(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text("<x> <p> <y> .\n<y> <label> <c1> .\n<z> <q> <x> .\n")
    loaded = load_ntriples(f, exclude_relations=["label"])
    assert loaded.entities == ["<x>", "<y>", "<z>"]
    assert loaded.relations == ["<p>", "<q>"]
    np.testing.assert_array_equal(loaded.graph.triples, [[0, 0, 1], [2, 1, 0]])


def test_parse_error_reports_line(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text("<a> <p> <b> .\n# ok\n<a> <p> <b>\n")
    with pytest.raises(ParseError) as info:
        load_ntriples(f)
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_empty_file_is_an_error(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text("# nothing here\n\n")
    with pytest.raises(DataError):
        load_ntriples(f)
    with pytest.raises(DataError):
        load_ntriples(tmp_path / "missing.nt")


def test_gzip_input(tmp_path):
    f = tmp_path / "g.nt.gz"
    with gzip.open(f, "wt", encoding="utf-8") as fh:
        fh.write("<a> <p> <b> .\n<b> <p> <c> .\n")
    assert load_ntriples(f).graph.num_edges == 2


def test_ntriples_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    lines = [gen_valid(rng)[0] for _ in range(300)]
    src = tmp_path / "src.nt"
    src.write_text("\n".join(lines) + "\n")
    first = load_ntriples(src)
    out = tmp_path / "out.nt"
    write_ntriples(out, first.graph, first.entities, first.relations)
    second = load_ntriples(out)
    assert second.graph == first.graph
    assert second.entities == first.entities
    assert second.relations == first.relations


# -- TSV splits ---------------------------------------------------------------


def write_split(d, train, valid, test):
    d.mkdir(exist_ok=True)
    for name, rows in (("train", train), ("valid", valid), ("test", test)):
        (d / f"{name}.txt").write_text("".join("\t".join(r) + "\n" for r in rows))


def test_tsv_shared_vocabulary(tmp_path):
    write_split(tmp_path / "kg", [("a", "r", "b"), ("b", "s", "c")], [("c", "r", "d")], [("d", "t", "a")])
    s = load_tsv_split(tmp_path / "kg")
    assert s.num_entities == 4 and s.num_relations == 3
    assert s.entities == ["a", "b", "c", "d"]
    np.testing.assert_array_equal(s.test, [[3, 2, 0]])


def test_tsv_empty_valid_split(tmp_path):
    write_split(tmp_path / "kg", [("a", "r", "b")], [], [("b", "r", "a")])
    s = load_tsv_split(tmp_path / "kg")
    assert s.valid.shape == (0, 3)


def test_tsv_column_errors(tmp_path):
    d = tmp_path / "kg"
    write_split(d, [("a", "r", "b")], [], [])
    (d / "valid.txt").write_text("a\tr\tb\na\tr\n")
    with pytest.raises(ParseError) as info:
        load_tsv_split(d)
    assert info.value.line == 2
    (d / "valid.txt").unlink()
    with pytest.raises(DataError):
        load_tsv_split(d)


# -- labels -------------------------------------------------------------------


def test_labels_with_and_without_brackets(tmp_path):
    f = tmp_path / "labels.tsv"
    f.write_text("id\tperson\tlabel\n1\thttp://x/a\tgroupB\n2\t<http://x/b>\tgroupA\n")
    index = {"<http://x/a>": 0, "<http://x/b>": 5}
    labels, classes = load_labels(f, index, "person", "label")
    assert classes == ["groupA", "groupB"]
    np.testing.assert_array_equal(labels.entities, [0, 5])
    np.testing.assert_array_equal(labels.classes, [1, 0])


def test_labels_errors(tmp_path):
    f = tmp_path / "labels.tsv"
    f.write_text("person\tlabel\nhttp://x/zz\tA\n")
    with pytest.raises(DataError):
        load_labels(f, {"<http://x/a>": 0}, "person", "label")
    with pytest.raises(DataError):
        load_labels(f, {"<http://x/zz>": 0}, "person", "class")
    with pytest.raises(DataError):
        load_labels(f, {"<http://x/zz>": 0}, "person", "label", classes=["B"])


def test_labels_round_trip(tmp_path):
    ents = [f"<http://x/e{i}>" for i in range(6)]
    labels = LabeledNodeSet(np.array([4, 1, 3]), np.array([1, 0, 1]), 2)
    f = tmp_path / "l.tsv"
    write_labels(f, labels, ents, ["neg", "pos"])
    back, classes = load_labels(f, {e: i for i, e in enumerate(ents)}, "entity", "label", classes=["neg", "pos"])
    np.testing.assert_array_equal(back.entities, labels.entities)
    np.testing.assert_array_equal(back.classes, labels.classes)


def test_write_graph_is_atomic(tmp_path):
    g = KnowledgeGraph(2, 1, [(0, 0, 1)])
    write_ntriples(tmp_path / "g.nt", g, ["<a>", "<b>"], ["<p>"])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["g.nt"]
