"""Bit-exact single-file persistence for trained models (.kgsq).

Layout, all integers little-endian:

    magic "KGSQ" | version u32 | dim u32 | n_entities u64 | n_relations_total u64
    entity names        (n_entities strings)
    relation names      (n_relations_total / 2 strings, originals only)
    type pair count u64 | pairs of (entity id u64, type label string)
    head_vectors | tail_vectors | relation_vectors   (row-major float32)

Strings are u32 length-prefixed UTF-8. Matrices are rounded to float32 on
save; loading validates sizes, finiteness, and rejects trailing bytes.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .graph import Vocabulary
from .model import EmbeddingModel, ModelConfig

MAGIC = b"KGSQ"
VERSION = 1
FILE_EXTENSION = ".kgsq"
DEFAULT_MAX_BYTES = 4 << 30


class ModelFormatError(ValueError):
    """A model file failed validation; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def save_model(model: EmbeddingModel, sink: BinaryIO) -> int:
    """Write the model; returns the byte count. Deterministic per model."""
    vocab = model.vocabulary
    n, d = model.n_entities, model.dim
    r_total = model.n_relations_total

    with np.errstate(over="ignore"):  # overflow is caught by the check below
        head = np.ascontiguousarray(model.head_vectors, dtype=np.float32)
        tail = np.ascontiguousarray(model.tail_vectors, dtype=np.float32)
        rel = np.ascontiguousarray(model.relation_vectors, dtype=np.float32)
    for name, matrix in (("head_vectors", head), ("tail_vectors", tail), ("relation_vectors", rel)):
        if not np.isfinite(matrix).all():
            raise ValueError(f"{name} contain non-finite values after float32 rounding")

    parts = [MAGIC, struct.pack("<IIQQ", VERSION, d, n, r_total)]
    parts.extend(_pack_str(s) for s in vocab.entity_names)
    parts.extend(_pack_str(s) for s in vocab.relation_names)
    typed = sorted(vocab.entity_types.items())
    parts.append(struct.pack("<Q", len(typed)))
    for eid, label in typed:
        parts.append(struct.pack("<Q", eid))
        parts.append(_pack_str(label))
    for matrix in (head, tail, rel):
        parts.append(matrix.astype("<f4", copy=False).tobytes())

    written = 0
    for part in parts:
        sink.write(part)
        written += len(part)
    return written


class _Reader:
    """Tracks the byte offset so errors can name where validation failed."""

    def __init__(self, source: BinaryIO, max_bytes: int):
        self.source = source
        self.offset = 0
        self.max_bytes = max_bytes

    def take(self, count: int, section: str) -> bytes:
        if count > self.max_bytes:
            raise ModelFormatError(
                f"{section} declares {count} bytes, over the {self.max_bytes}-byte cap",
                self.offset,
            )
        data = self.source.read(count)
        if len(data) != count:
            raise ModelFormatError(
                f"truncated {section}: expected {count} bytes, got {len(data)}",
                self.offset,
            )
        self.offset += count
        return data

    def u32(self, section: str) -> int:
        return struct.unpack("<I", self.take(4, section))[0]

    def u64(self, section: str) -> int:
        return struct.unpack("<Q", self.take(8, section))[0]

    def string(self, section: str) -> str:
        length = self.u32(section)
        start = self.offset
        try:
            return self.take(length, section).decode("utf-8")
        except UnicodeDecodeError:
            raise ModelFormatError(f"{section} is not valid UTF-8", start) from None


def load_model(source: BinaryIO, max_bytes: int = DEFAULT_MAX_BYTES) -> EmbeddingModel:
    """Read and validate a model file; errors name the failing section and offset."""
    r = _Reader(source, max_bytes)

    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    version = r.u32("version")
    if version != VERSION:
        raise ModelFormatError(f"unsupported version {version}, expected {VERSION}", 4)
    dim = r.u32("dim")
    n_entities = r.u64("n_entities")
    n_rel_total = r.u64("n_relations_total")
    if dim < 1 or n_entities < 1 or n_rel_total < 2:
        raise ModelFormatError(
            f"degenerate header: dim={dim}, entities={n_entities}, relations={n_rel_total}", 8
        )
    if n_rel_total % 2 != 0:
        raise ModelFormatError(f"relation count {n_rel_total} is not even", 20)

    matrix_bytes = (2 * n_entities + n_rel_total) * dim * 4
    if matrix_bytes > max_bytes:
        raise ModelFormatError(
            f"matrices declare {matrix_bytes} bytes, over the {max_bytes}-byte cap",
            r.offset,
        )

    entity_names = [r.string("entity names") for _ in range(n_entities)]
    relation_names = [r.string("relation names") for _ in range(n_rel_total // 2)]
    n_typed = r.u64("type pair count")
    if n_typed > n_entities:
        raise ModelFormatError(
            f"{n_typed} type pairs for {n_entities} entities", r.offset - 8
        )
    entity_types: dict[int, str] = {}
    for _ in range(n_typed):
        at = r.offset
        eid = r.u64("type pair entity id")
        if eid >= n_entities:
            raise ModelFormatError(f"type pair entity id {eid} out of range", at)
        entity_types[eid] = r.string("type pair label")

    def read_matrix(rows: int, section: str) -> np.ndarray:
        at = r.offset
        data = np.frombuffer(r.take(rows * dim * 4, section), dtype="<f4")
        matrix = data.reshape(rows, dim).copy()
        if not np.isfinite(matrix).all():
            raise ModelFormatError(f"{section} contain non-finite values", at)
        return matrix

    head = read_matrix(n_entities, "head_vectors")
    tail = read_matrix(n_entities, "tail_vectors")
    rel = read_matrix(n_rel_total, "relation_vectors")

    if source.read(1):
        raise ModelFormatError("trailing bytes after relation_vectors", r.offset)

    vocab = Vocabulary(entity_names, relation_names, entity_types)
    return EmbeddingModel(head, tail, rel, ModelConfig(dim=dim), vocab)


def save_model_file(model: EmbeddingModel, path) -> int:
    with open(path, "wb") as f:
        return save_model(model, f)


def load_model_file(path, max_bytes: int = DEFAULT_MAX_BYTES) -> EmbeddingModel:
    with open(path, "rb") as f:
        return load_model(f, max_bytes)
