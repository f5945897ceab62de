"""Document loading, cleaning, and chunking for the manual corpus.

Input is a directory of UTF-8 ``.txt``/``.md`` files. A page break is either
a form-feed character (U+000C) or a line consisting solely of the two
characters ``\\f``. Files without markers are single-page documents.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

SUPPORTED_SUFFIXES = (".txt", ".md")
DEFAULT_CHUNK_SIZE = 800
DEFAULT_OVERLAP = 80

# Separator priority for recursive splitting; "" is the hard character split.
SEPARATORS = ("\n\n", "\n", ". ", " ", "")

_MARKER_LINE = re.compile(r"^\\f$", re.MULTILINE)
_BLANK_RUN = re.compile(r"\n{3,}")

Span = tuple[int, int]


@dataclass(frozen=True)
class Document:
    source_id: str
    pages: tuple[tuple[int, str], ...]  # (page_number, cleaned text), 1-based


@dataclass(frozen=True)
class Chunk:
    id: str
    source_id: str
    page: int
    seq: int
    text: str
    char_span: Span


@dataclass(frozen=True)
class LoadError:
    source_id: str
    message: str


def clean(text: str) -> str:
    """Drop control characters (keeping newline and tab), collapse runs of
    three or more newlines to two, and trim. Idempotent."""
    kept = []
    for ch in text:
        if ch in ("\n", "\t") or unicodedata.category(ch) != "Cc":
            kept.append(ch)
    out = _BLANK_RUN.sub("\n\n", "".join(kept))
    return out.strip()


def split_pages(raw: str) -> list[str]:
    normalized = _MARKER_LINE.sub("\f", raw)
    return normalized.split("\f")


def load_documents(directory: str | Path,
                   errors: list[LoadError] | None = None) -> list[Document]:
    """Load every supported file under ``directory`` (recursive), ordered by
    source id. Files that fail to decode are recorded and skipped."""
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"not a readable directory: {root}")
    docs = []
    paths = sorted(p for p in root.rglob("*")
                   if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES)
    for path in paths:
        source_id = path.relative_to(root).as_posix()
        try:
            raw = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            logger.warning("skipping %s: %s", source_id, exc)
            if errors is not None:
                errors.append(LoadError(source_id, str(exc)))
            continue
        pages = tuple((i + 1, clean(seg)) for i, seg in enumerate(split_pages(raw)))
        docs.append(Document(source_id=source_id, pages=pages))
    return docs


def chunk_page(text: str, chunk_size: int = DEFAULT_CHUNK_SIZE,
               overlap: int = DEFAULT_OVERLAP) -> list[tuple[Span, str]]:
    """Split one cleaned page into chunk spans.

    Separators are tried in priority order; pieces are greedily packed up to
    ``chunk_size``. Each chunk after the first reaches back over the final
    ``overlap`` characters of its predecessor; on separator-free text the
    stride is exactly ``chunk_size - overlap``. Spans cover every character.
    """
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    if not 0 <= overlap < chunk_size:
        raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")
    if not text:
        return []
    spans = _split_span(text, 0, len(text), 0, chunk_size, overlap)
    return [((s, e), text[s:e]) for s, e in spans]


def _fragment_spans(text: str, start: int, end: int, sep: str) -> list[Span]:
    spans = []
    pos = start
    while pos < end:
        hit = text.find(sep, pos, end)
        if hit == -1:
            spans.append((pos, end))
            break
        cut = hit + len(sep)
        spans.append((pos, cut))
        pos = cut
    return spans or [(start, end)]


def _split_span(text: str, start: int, end: int, sep_idx: int,
                chunk_size: int, overlap: int) -> list[Span]:
    if end - start <= chunk_size:
        return [(start, end)]
    sep = SEPARATORS[sep_idx]
    if sep == "":
        stride = chunk_size - overlap
        out = []
        s = start
        while True:
            e = min(s + chunk_size, end)
            out.append((s, e))
            if e >= end:
                return out
            s += stride
    frags = _fragment_spans(text, start, end, sep)
    if len(frags) == 1:
        return _split_span(text, start, end, sep_idx + 1, chunk_size, overlap)

    out: list[Span] = []
    cur: Span | None = None

    def reopen(frag_end: int) -> int:
        # new chunk start: overlap tail of the predecessor, clamped so the
        # chunk stays within chunk_size and inside the predecessor
        ps, pe = out[-1]
        return max(ps, pe - overlap, frag_end - chunk_size)

    for fs, fe in frags:
        if fe - fs > chunk_size:
            if cur is not None:
                out.append(cur)
                cur = None
            out.extend(_split_span(text, fs, fe, sep_idx + 1, chunk_size, overlap))
            continue
        if cur is None:
            cur = (reopen(fe) if out else fs, fe)
        elif fe - cur[0] <= chunk_size:
            cur = (cur[0], fe)
        else:
            out.append(cur)
            cur = (reopen(fe), fe)
    if cur is not None:
        out.append(cur)
    return out


def assign_ids(document: Document,
               page_chunks: list[tuple[int, list[tuple[Span, str]]]]) -> list[Chunk]:
    """Assign ``source:page:seq`` ids; seq restarts at 0 on each page."""
    chunks = []
    for page, items in page_chunks:
        for seq, (span, text) in enumerate(items):
            chunks.append(Chunk(
                id=f"{document.source_id}:{page}:{seq}",
                source_id=document.source_id,
                page=page,
                seq=seq,
                text=text,
                char_span=span,
            ))
    return chunks


def chunk_document(document: Document, chunk_size: int = DEFAULT_CHUNK_SIZE,
                   overlap: int = DEFAULT_OVERLAP) -> list[Chunk]:
    page_chunks = [(page, chunk_page(text, chunk_size, overlap))
                   for page, text in document.pages]
    return assign_ids(document, page_chunks)
