"""Embedding-file I/O: the `.pfeb` binary format and caption manifests.

`.pfeb` layout (all little-endian):

    bytes 0-3   magic "PFEB"
    u32         version (currently 1)
    u32         n  (rows)
    u32         d  (embedding dimension)
    u32         flags (bit0 = labels present, bit1 = ids present)
    n*d f32     embeddings, row-major
    n   f32     labels               (only if bit0)
    n   times   u16 length + UTF-8   (only if bit1)

Rows are L2-normalized on load (producers need not normalize), so cosine
similarity downstream reduces to a dot product. Stored payload bytes are
whatever the writer was given; normalization is never written back.
"""

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError

MAGIC = b"PFEB"
VERSION = 1
FLAG_LABELS = 1
FLAG_IDS = 2

TASK_REGRESSION = "regression"
TASK_CLASSIFICATION = "classification"


@dataclass
class EmbeddingDataset:
    """n embeddings of dimension d, with optional ground-truth labels/ids.

    Instances returned by ``read_embeddings`` have unit-norm float64 rows;
    instances built in memory (e.g. by a generator) may hold raw values
    destined for ``write_embeddings``.
    """

    embeddings: np.ndarray
    labels: np.ndarray | None = None
    ids: list[str] | None = None

    @property
    def n(self):
        return self.embeddings.shape[0]

    @property
    def d(self):
        return self.embeddings.shape[1]


@dataclass
class CaptionSet:
    """m caption embeddings with their label values and display names."""

    embeddings: np.ndarray
    values: np.ndarray
    names: list[str]
    task: str

    @property
    def m(self):
        return self.embeddings.shape[0]

    @property
    def d(self):
        return self.embeddings.shape[1]


def _read_exact(fh, size, path, what):
    data = fh.read(size)
    if len(data) != size:
        raise DataError(f"{path}: truncated file while reading {what} "
                        f"(wanted {size} bytes, got {len(data)})")
    return data


def read_embeddings(path):
    """Read a `.pfeb` file, validate it, and L2-normalize the rows."""
    with open(path, "rb") as fh:
        header = _read_exact(fh, 20, path, "header")
        magic = header[:4]
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        version, n, d, flags = struct.unpack("<IIII", header[4:])
        if version != VERSION:
            raise DataError(f"{path}: unsupported version {version}, expected {VERSION}")
        if n == 0:
            raise DataError(f"{path}: empty dataset (n=0)")
        if d == 0:
            raise DataError(f"{path}: zero embedding dimension")
        payload = _read_exact(fh, 4 * n * d, path, "embedding payload")
        raw = np.frombuffer(payload, dtype="<f4").reshape(n, d)
        labels = None
        if flags & FLAG_LABELS:
            labels = np.frombuffer(_read_exact(fh, 4 * n, path, "labels"), dtype="<f4")
            labels = labels.astype(np.float64)
        ids = None
        if flags & FLAG_IDS:
            ids = []
            for i in range(n):
                (length,) = struct.unpack("<H", _read_exact(fh, 2, path, f"id {i} length"))
                ids.append(_read_exact(fh, length, path, f"id {i}").decode("utf-8"))
        trailing = fh.read(1)
        if trailing:
            raise DataError(f"{path}: trailing data after payload")

    if not np.isfinite(raw).all():
        raise DataError(f"{path}: embeddings contain NaN or Inf values")
    embeddings = raw.astype(np.float64)
    norms = np.sqrt((embeddings * embeddings).sum(axis=1))
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DataError(f"{path}: zero-norm embedding row {zero[0]}")
    embeddings, _ = kernels.l2_normalize_rows(embeddings)
    if labels is not None and not np.isfinite(labels).all():
        raise DataError(f"{path}: labels contain NaN or Inf values")
    return EmbeddingDataset(embeddings=embeddings, labels=labels, ids=ids)


def write_embeddings(dataset, path):
    """Write a dataset as `.pfeb`. Embeddings are stored as float32 as-is."""
    emb = np.ascontiguousarray(dataset.embeddings, dtype="<f4")
    n, d = emb.shape
    if n == 0:
        raise DataError("refusing to write an empty dataset (n=0)")
    if dataset.labels is not None and len(dataset.labels) != n:
        raise DataError(f"labels length {len(dataset.labels)} does not match n={n}")
    if dataset.ids is not None and len(dataset.ids) != n:
        raise DataError(f"ids length {len(dataset.ids)} does not match n={n}")
    flags = 0
    if dataset.labels is not None:
        flags |= FLAG_LABELS
    if dataset.ids is not None:
        flags |= FLAG_IDS
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIII", VERSION, n, d, flags))
        fh.write(emb.tobytes())
        if dataset.labels is not None:
            fh.write(np.ascontiguousarray(dataset.labels, dtype="<f4").tobytes())
        if dataset.ids is not None:
            for sample_id in dataset.ids:
                encoded = sample_id.encode("utf-8")
                if len(encoded) > 0xFFFF:
                    raise DataError(f"id too long to encode ({len(encoded)} bytes)")
                fh.write(struct.pack("<H", len(encoded)))
                fh.write(encoded)


def read_captions(manifest_path):
    """Read a caption manifest (JSON) plus its embedding payload.

    Manifest keys: "embeddings" (path to a `.pfeb` with m rows, relative
    paths resolved against the manifest), "names", "values", and "task"
    ("regression" or "classification"). Regression values must be strictly
    increasing; classification values must be exactly 0..m-1.
    """
    with open(manifest_path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{manifest_path}: not valid JSON: {exc}") from None
    for key in ("embeddings", "names", "values", "task"):
        if key not in manifest:
            raise DataError(f"{manifest_path}: missing key {key!r}")
    task = manifest["task"]
    if task not in (TASK_REGRESSION, TASK_CLASSIFICATION):
        raise DataError(f"{manifest_path}: unknown task {task!r}")
    emb_path = manifest["embeddings"]
    if not os.path.isabs(emb_path):
        emb_path = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), emb_path)
    payload = read_embeddings(emb_path)
    names = list(manifest["names"])
    values = np.asarray(manifest["values"], dtype=np.float64)
    if values.ndim != 1 or len(names) != payload.n or values.size != payload.n:
        raise DataError(
            f"{manifest_path}: names ({len(names)}), values ({values.size}) and "
            f"embedding rows ({payload.n}) must all agree"
        )
    if task == TASK_REGRESSION:
        if not np.all(np.diff(values) > 0.0):
            raise DataError(f"{manifest_path}: regression values must be strictly increasing")
    else:
        if not np.array_equal(values, np.arange(payload.n, dtype=np.float64)):
            raise DataError(
                f"{manifest_path}: classification values must be the class indices 0..{payload.n - 1}"
            )
    return CaptionSet(embeddings=payload.embeddings, values=values, names=names, task=task)


def write_captions(captions, manifest_path, embeddings_path=None):
    """Write a caption set as a manifest plus its `.pfeb` payload."""
    if embeddings_path is None:
        base, _ = os.path.splitext(manifest_path)
        embeddings_path = base + ".pfeb"
    write_embeddings(EmbeddingDataset(embeddings=captions.embeddings), embeddings_path)
    manifest = {
        "embeddings": os.path.relpath(embeddings_path, os.path.dirname(os.path.abspath(manifest_path))),
        "names": list(captions.names),
        "values": np.asarray(captions.values).tolist(),
        "task": captions.task,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
