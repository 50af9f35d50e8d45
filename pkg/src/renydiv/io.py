"""Count-table ingestion and machine-readable report emission."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .counts import CountVector
from .errors import ValidationError


@dataclass(frozen=True)
class CountTableFile:
    """Parsed tab-separated count table: unique category ids, named count columns."""

    categories: list
    samples: dict  # name -> np.ndarray of int64, insertion-ordered

    def count_vector(self, name: str) -> CountVector:
        if name not in self.samples:
            raise ValidationError(f"no sample named {name!r}; have {list(self.samples)}")
        return CountVector(self.samples[name])

    @property
    def sample_names(self) -> list:
        return list(self.samples)


def parse_count_table(path) -> CountTableFile:
    """Parse `category<TAB>sample1[<TAB>sample2...]` with one row per category.

    UTF-8, trailing-newline tolerant. Rejects duplicate category ids,
    negative or non-integer counts, and rows of the wrong width, naming the
    offending line.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    header = lines[0].split("\t")
    if len(header) < 2:
        raise ValidationError(f"{path}: line 1: header needs category + at least one sample")
    names = header[1:]
    if len(set(names)) != len(names):
        raise ValidationError(f"{path}: line 1: duplicate sample names")
    categories: list[str] = []
    seen: dict[str, int] = {}
    columns = [[] for _ in names]
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != len(header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        cat = parts[0]
        if cat in seen:
            raise ValidationError(
                f"{path}: line {lineno}: duplicate category {cat!r} "
                f"(first seen on line {seen[cat]})"
            )
        seen[cat] = lineno
        categories.append(cat)
        for k, raw in enumerate(parts[1:]):
            try:
                value = int(raw)
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}: count {raw!r} is not an integer"
                ) from None
            if value < 0:
                raise ValidationError(f"{path}: line {lineno}: negative count {raw!r}")
            columns[k].append(value)
    if not categories:
        raise ValidationError(f"{path}: no category rows")
    samples = {name: np.asarray(col, dtype=np.int64) for name, col in zip(names, columns)}
    return CountTableFile(categories=categories, samples=samples)


def write_count_table(table: CountTableFile, path) -> None:
    """Emit a CountTableFile in the same TSV format parse_count_table reads."""
    names = table.sample_names
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("category\t" + "\t".join(names) + "\n")
        for i, cat in enumerate(table.categories):
            row = [str(int(table.samples[name][i])) for name in names]
            fh.write(cat + "\t" + "\t".join(row) + "\n")


def _round_sig(x: float, digits: int = 9):
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return None if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
        return float(f"{x:.{digits}g}")
    return x


def jsonable(obj):
    """Convert reports (dataclasses, arrays, numpy scalars) to JSON-ready values.

    Floats carry 9 significant digits; key order follows field declaration
    order so output is stable.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round_sig(float(obj))
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return str(obj)


def dumps_report(obj) -> str:
    return json.dumps(jsonable(obj), indent=2)


def dumps_report_tsv(obj) -> str:
    """Flatten a report into `dotted.key<TAB>value` lines for spreadsheets."""
    flat: list[tuple[str, str]] = []

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(value, list):
            for i, v in enumerate(value):
                walk(f"{prefix}[{i}]", v)
        else:
            flat.append((prefix, "" if value is None else str(value)))

    walk("", jsonable(obj))
    return "\n".join(f"{k}\t{v}" for k, v in flat) + "\n"
