"""Loading, cleaning, and chunking behavior, including the frozen span
arithmetic for separator-free pages (stride = chunk_size - overlap)."""

import random

import pytest

from iotadmin import corpus


# ---------------------------------------------------------------------------
# clean

def test_clean_removes_control_chars():
    assert corpus.clean("a\x00b") == "ab"
    assert corpus.clean("a\rb") == "ab"
    assert corpus.clean("keep\ttabs\nand newlines") == "keep\ttabs\nand newlines"


def test_clean_collapses_blank_runs():
    assert corpus.clean("a\n\n\n\nb") == "a\n\nb"
    assert corpus.clean("a\n\nb") == "a\n\nb"


def test_clean_trims():
    assert corpus.clean("  hi  ") == "hi"


def test_clean_idempotent():
    rng = random.Random(1)
    alphabet = "ab \n\t\x00\x07\r"
    for _ in range(300):
        s = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 40)))
        once = corpus.clean(s)
        assert corpus.clean(once) == once


# ---------------------------------------------------------------------------
# load_documents

def test_empty_directory(tmp_path):
    assert corpus.load_documents(tmp_path) == []


def test_single_file_no_markers(tmp_path):
    (tmp_path / "echo.txt").write_text("setup the echo device", encoding="utf-8")
    docs = corpus.load_documents(tmp_path)
    assert len(docs) == 1
    assert docs[0].source_id == "echo.txt"
    assert docs[0].pages == ((1, "setup the echo device"),)


def test_form_feed_pages(tmp_path):
    (tmp_path / "m.txt").write_text("first page\x0csecond page", encoding="utf-8")
    docs = corpus.load_documents(tmp_path)
    assert docs[0].pages == ((1, "first page"), (2, "second page"))


def test_marker_line_pages(tmp_path):
    (tmp_path / "m.md").write_text("first\n\\f\nsecond", encoding="utf-8")
    docs = corpus.load_documents(tmp_path)
    assert docs[0].pages == ((1, "first"), (2, "second"))


def test_invalid_utf8_recorded_and_skipped(tmp_path):
    (tmp_path / "bad.txt").write_bytes(b"\xff\xfe broken")
    (tmp_path / "good.txt").write_text("fine", encoding="utf-8")
    errors = []
    docs = corpus.load_documents(tmp_path, errors=errors)
    assert [d.source_id for d in docs] == ["good.txt"]
    assert len(errors) == 1 and errors[0].source_id == "bad.txt"


def test_missing_directory_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        corpus.load_documents(tmp_path / "nope")


def test_deterministic_ordering(tmp_path):
    for name in ("z.txt", "a.txt", "m.md"):
        (tmp_path / name).write_text("x", encoding="utf-8")
    docs = corpus.load_documents(tmp_path)
    assert [d.source_id for d in docs] == ["a.txt", "m.md", "z.txt"]


def test_unsupported_suffix_ignored(tmp_path):
    (tmp_path / "raw.bin").write_bytes(b"\x00\x01")
    (tmp_path / "doc.txt").write_text("hello", encoding="utf-8")
    assert [d.source_id for d in corpus.load_documents(tmp_path)] == ["doc.txt"]


# ---------------------------------------------------------------------------
# chunk_page: frozen span arithmetic

def test_exact_fit_single_chunk():
    text = "x" * 800
    chunks = corpus.chunk_page(text)
    assert [span for span, _ in chunks] == [(0, 800)]


def test_separator_free_1520():
    chunks = corpus.chunk_page("x" * 1520)
    assert [span for span, _ in chunks] == [(0, 800), (720, 1520)]


def test_separator_free_1600():
    chunks = corpus.chunk_page("x" * 1600)
    assert [span for span, _ in chunks] == [(0, 800), (720, 1520), (1440, 1600)]


def test_empty_text_empty_list():
    assert corpus.chunk_page("") == []


def test_bad_overlap_rejected():
    with pytest.raises(ValueError):
        corpus.chunk_page("abc", chunk_size=10, overlap=10)
    with pytest.raises(ValueError):
        corpus.chunk_page("abc", chunk_size=10, overlap=-1)


def test_exact_overlap_for_separator_free_text():
    text = "y" * 3000
    spans = [span for span, _ in corpus.chunk_page(text, 800, 80)]
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert s2 == e1 - 80 or e1 == 3000


def test_paragraph_packing_respects_overlap():
    p1, p2 = "a" * 500, "b" * 500
    text = f"{p1}\n\n{p2}"
    chunks = corpus.chunk_page(text, 800, 80)
    spans = [span for span, _ in chunks]
    assert spans[0] == (0, 502)
    assert spans[1] == (422, 1002)  # reaches back exactly 80 characters
    assert chunks[1][1].startswith("a" * 78 + "\n\n")


def _check_invariants(text, chunk_size, overlap):
    chunks = corpus.chunk_page(text, chunk_size, overlap)
    if not text:
        assert chunks == []
        return
    covered = set()
    for (s, e), ctext in chunks:
        assert 0 < len(ctext) <= chunk_size
        assert text[s:e] == ctext
        covered.update(range(s, e))
    assert covered == set(range(len(text))), "spans must cover every character"


def test_coverage_and_bounds_on_random_texts():
    rng = random.Random(42)
    alphabet = "abcdef \n"
    for _ in range(500):
        n = rng.randrange(0, 4000)
        text = corpus.clean("".join(rng.choice(alphabet) for _ in range(n)))
        _check_invariants(text, 800, 80)


def test_chunking_deterministic():
    rng = random.Random(9)
    text = corpus.clean("".join(rng.choice("ab. \n") for _ in range(5000)))
    assert corpus.chunk_page(text) == corpus.chunk_page(text)


# ---------------------------------------------------------------------------
# assign_ids

def _doc(source="m.txt", pages=((1, "x"),)):
    return corpus.Document(source_id=source, pages=tuple(pages))


def test_assign_ids_formula():
    chunks = corpus.assign_ids(_doc(), [(1, [((0, 1), "x"), ((1, 2), "y")])])
    assert [c.id for c in chunks] == ["m.txt:1:0", "m.txt:1:1"]


def test_assign_ids_deterministic():
    items = [(1, [((0, 1), "x")]), (2, [((0, 1), "y")])]
    a = corpus.assign_ids(_doc(), items)
    b = corpus.assign_ids(_doc(), items)
    assert a == b


def test_ids_unique_across_documents():
    a = corpus.assign_ids(_doc("a.txt"), [(1, [((0, 1), "x")])])
    b = corpus.assign_ids(_doc("b.txt"), [(1, [((0, 1), "x")])])
    assert a[0].id != b[0].id


def test_seq_restarts_per_page():
    chunks = corpus.assign_ids(
        _doc(pages=((1, "x"), (2, "y"))),
        [(1, [((0, 1), "x")]), (2, [((0, 1), "y")])])
    assert [(c.page, c.seq) for c in chunks] == [(1, 0), (2, 0)]


def test_chunk_document_ids_unique():
    text_a = "word " * 400
    doc = corpus.Document("dev.md", ((1, corpus.clean(text_a)), (2, "short page")))
    chunks = corpus.chunk_document(doc)
    ids = [c.id for c in chunks]
    assert len(ids) == len(set(ids))
    assert all(c.text == doc.pages[c.page - 1][1][c.char_span[0]:c.char_span[1]]
               for c in chunks)
