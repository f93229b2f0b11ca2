"""Reading and writing annotation datasets as CSV.

Wide: ``instance_id,<class1>,...,<classK>[,gold][,meta:<key>...]``, one row
of integer counts per instance. ``gold`` holds a class name or is empty.

Long: ``instance_id,vote[,annotator_id]``, one row per ballot. Class order
comes from ``labels`` when given, otherwise from first appearance (with a
warning, since the order then depends on the file).

Every malformed line raises :class:`DatasetParseError` with its 1-based
line number (the header is line 1).
"""
from __future__ import annotations

import codecs
import csv
import io
import logging
import os
from pathlib import Path
from typing import Iterator, Optional, Sequence

from pydantic import ValidationError

from ..imports import GOLD_COLUMN, META_PREFIX, DatasetParseError, DomainError
from ..model_core import AnnotationDataset, ClassLabels, Instance, VoteCounts
from .schemas import DatasetFormat

logger = logging.getLogger("abstract_labelembed.io_cli")

ID_COLUMN = "instance_id"
VOTE_COLUMN = "vote"
ANNOTATOR_COLUMN = "annotator_id"


def _validation_reason(exc: ValidationError) -> str:
    first = exc.errors()[0]
    return str(first.get("msg", exc)).removeprefix("Value error, ")


def _decode(path: Path) -> str:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw.startswith(codecs.BOM_UTF8):
        raw = raw[len(codecs.BOM_UTF8):]
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        raise DatasetParseError(path, line, f"invalid UTF-8 (byte 0x{raw[exc.start]:02x})") from None


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    """``(line_number, cells)`` for every non-blank line."""
    reader = csv.reader(io.StringIO(_decode(path), newline=""))
    for cells in reader:
        if not cells or all(not c.strip() for c in cells):
            continue
        yield reader.line_num, [c.strip() for c in cells]


def _parse_count(path: Path, line: int, raw: str, column: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise DatasetParseError(path, line, f"count {raw!r} in column {column!r} is not an integer") from None
    if value < 0:
        raise DatasetParseError(path, line, f"negative count {value} in column {column!r}")
    return value


def _read_wide(path: Path, labels: Optional[Sequence[str]]) -> AnnotationDataset:
    rows = _rows(path)
    try:
        line, header = next(rows)
    except StopIteration:
        raise DatasetParseError(path, 1, "file is empty") from None
    if header[0] != ID_COLUMN:
        raise DatasetParseError(path, line, f"first column must be {ID_COLUMN!r}, got {header[0]!r}")
    if len(set(header)) != len(header):
        raise DatasetParseError(path, line, "header repeats a column name")

    class_cols = [i for i, h in enumerate(header[1:], 1)
                  if h != GOLD_COLUMN and not h.startswith(META_PREFIX)]
    gold_col = header.index(GOLD_COLUMN) if GOLD_COLUMN in header else None
    meta_cols = [(i, h[len(META_PREFIX):]) for i, h in enumerate(header) if h.startswith(META_PREFIX)]
    names = [header[i] for i in class_cols]
    if labels is not None:
        if sorted(labels) != sorted(names):
            raise DatasetParseError(
                path, line, f"header classes {names} do not match labels {list(labels)}")
        class_cols = [class_cols[names.index(name)] for name in labels]
        names = list(labels)
    try:
        class_labels = ClassLabels(names=tuple(names))
    except ValidationError as exc:
        raise DatasetParseError(path, line, _validation_reason(exc)) from None

    instances: list[Instance] = []
    seen: set[str] = set()
    for line, cells in rows:
        if len(cells) != len(header):
            raise DatasetParseError(path, line, f"expected {len(header)} fields, got {len(cells)}")
        instance_id = cells[0]
        if not instance_id:
            raise DatasetParseError(path, line, "empty instance_id")
        if instance_id in seen:
            raise DatasetParseError(path, line, f"duplicate instance id {instance_id!r}")
        seen.add(instance_id)
        counts = tuple(_parse_count(path, line, cells[i], header[i]) for i in class_cols)
        if sum(counts) == 0:
            raise DatasetParseError(path, line, f"instance {instance_id!r} has no votes")
        gold = None
        if gold_col is not None and cells[gold_col]:
            if cells[gold_col] not in class_labels.names:
                raise DatasetParseError(path, line, f"gold label {cells[gold_col]!r} is not a class")
            gold = class_labels.names.index(cells[gold_col])
        metadata = {key: cells[i] for i, key in meta_cols if cells[i]}
        try:
            instances.append(Instance(instance_id=instance_id, votes=VoteCounts(counts=counts),
                                      gold=gold, metadata=metadata))
        except ValidationError as exc:
            raise DatasetParseError(path, line, _validation_reason(exc)) from None

    if not instances:
        raise DatasetParseError(path, 1, "no instances after the header")
    return AnnotationDataset(labels=class_labels, instances=tuple(instances))


def _read_long(path: Path, labels: Optional[Sequence[str]]) -> AnnotationDataset:
    rows = _rows(path)
    try:
        line, header = next(rows)
    except StopIteration:
        raise DatasetParseError(path, 1, "file is empty") from None
    if header[:2] != [ID_COLUMN, VOTE_COLUMN] or len(header) > 3 or (
            len(header) == 3 and header[2] != ANNOTATOR_COLUMN):
        raise DatasetParseError(
            path, line, f"long header must be {ID_COLUMN},{VOTE_COLUMN}[,{ANNOTATOR_COLUMN}]")

    order: list[str] = list(labels) if labels is not None else []
    tallies: dict[str, dict[str, int]] = {}
    for line, cells in rows:
        if len(cells) != len(header):
            raise DatasetParseError(path, line, f"expected {len(header)} fields, got {len(cells)}")
        instance_id, vote = cells[0], cells[1]
        if not instance_id:
            raise DatasetParseError(path, line, "empty instance_id")
        if not vote:
            raise DatasetParseError(path, line, "empty vote")
        if vote not in order:
            if labels is not None:
                raise DatasetParseError(path, line, f"unknown class {vote!r}")
            order.append(vote)
        tally = tallies.setdefault(instance_id, {})
        tally[vote] = tally.get(vote, 0) + 1

    if not tallies:
        raise DatasetParseError(path, 1, "no votes after the header")
    if labels is None:
        logger.warning("%s: no class order given; using first-appearance order %s", path, order)
    try:
        class_labels = ClassLabels(names=tuple(order))
    except ValidationError as exc:
        raise DatasetParseError(path, 1, _validation_reason(exc)) from None
    instances = tuple(
        Instance(instance_id=iid, votes=VoteCounts(counts=tuple(t.get(c, 0) for c in order)))
        for iid, t in tallies.items()
    )
    return AnnotationDataset(labels=class_labels, instances=instances)


def load_dataset(path, format: DatasetFormat = "wide",
                 labels: Optional[Sequence[str]] = None) -> AnnotationDataset:
    """Parse a wide or long CSV into an :class:`AnnotationDataset`."""
    path = Path(path)
    if format == "wide":
        dataset = _read_wide(path, labels)
    elif format == "long":
        dataset = _read_long(path, labels)
    else:
        raise DatasetParseError(path, 0, f"unknown dataset format {format!r}")
    logger.info("loaded %d instances over %d classes from %s", dataset.n, dataset.K, path)
    return dataset


def write_dataset(dataset: AnnotationDataset, path, format: DatasetFormat = "wide") -> Path:
    """Write ``dataset`` as CSV.

    The long format has no place for gold labels or metadata, so a dataset
    carrying either (a subsample's ``J_group`` tags, say) is refused there.
    """
    path = Path(path)
    if format == "long" and any(inst.gold is not None or inst.metadata for inst in dataset.instances):
        raise DomainError("the long format cannot hold gold labels or metadata; write it wide")
    if path.parent:
        os.makedirs(path.parent, exist_ok=True)
    names = dataset.labels.names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if format == "long":
            writer.writerow([ID_COLUMN, VOTE_COLUMN])
            for inst in dataset.instances:
                for name, count in zip(names, inst.votes.counts):
                    for _ in range(count):
                        writer.writerow([inst.instance_id, name])
            return path
        has_gold = any(inst.gold is not None for inst in dataset.instances)
        meta_keys = sorted({k for inst in dataset.instances for k in inst.metadata})
        writer.writerow([ID_COLUMN, *names, *([GOLD_COLUMN] if has_gold else []),
                         *(META_PREFIX + k for k in meta_keys)])
        for inst in dataset.instances:
            gold = [names[inst.gold] if inst.gold is not None else ""] if has_gold else []
            writer.writerow([inst.instance_id, *inst.votes.counts, *gold,
                             *(inst.metadata.get(k, "") for k in meta_keys)])
    return path
