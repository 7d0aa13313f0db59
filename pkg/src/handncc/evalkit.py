"""Per-class accuracy tables and confusion matrices for a labelled dataset."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

from .classifier import EmptyForegroundError, TemplateRegistry, recognize
from .morphology import DEFAULT_SE, StructuringElement

# column for samples whose segmentation came out empty
NO_FOREGROUND = "∅"


class LabelMismatchError(ValueError):
    pass


def accuracy_pct(recognized: int, total: int) -> Decimal:
    """100 * recognized / total, truncated (not rounded) to two decimals."""
    if total <= 0:
        raise ValueError("accuracy needs at least one input")
    if not 0 <= recognized:
        raise ValueError("recognized count must be non-negative")
    hundredths = (10000 * recognized) // total
    return Decimal(hundredths).scaleb(-2)


@dataclass(frozen=True)
class ClassRow:
    label: str
    inputs: int
    recognized: int

    @property
    def accuracy(self) -> Decimal:
        return accuracy_pct(self.recognized, self.inputs)


@dataclass
class EvaluationReport:
    """Confusion counts; rows are true labels, columns predicted labels plus ``NO_FOREGROUND``."""

    labels: list[str]
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)

    @classmethod
    def empty(cls, labels: Iterable[str], predictable: Iterable[str] | None = None) -> "EvaluationReport":
        labels = list(labels)
        columns = list(labels if predictable is None else predictable) + [NO_FOREGROUND]
        return cls(labels, {a: dict.fromkeys(columns, 0) for a in labels})

    @property
    def columns(self) -> list[str]:
        if not self.labels:
            return [NO_FOREGROUND]
        return list(self.confusion[self.labels[0]])

    def add(self, actual: str, predicted: str) -> None:
        self.confusion[actual][predicted] += 1

    def row(self, label: str) -> ClassRow:
        counts = self.confusion[label]
        return ClassRow(label, sum(counts.values()), counts[label])

    @property
    def per_class(self) -> list[ClassRow]:
        return [self.row(label) for label in self.labels]

    @property
    def total(self) -> ClassRow:
        rows = self.per_class
        return ClassRow("Total", sum(r.inputs for r in rows), sum(r.recognized for r in rows))


def evaluate(registry: TemplateRegistry, samples: Iterable, se: StructuringElement = DEFAULT_SE,
             labels: list[str] | None = None) -> EvaluationReport:
    """Classify every sample (anything with ``label`` and ``image``) and tally."""
    samples = list(samples)
    if labels is None:
        labels = [label for label in registry.labels if any(s.label == label for s in samples)]
    unknown = sorted({s.label for s in samples} - set(registry.labels))
    if unknown:
        raise LabelMismatchError(f"dataset labels missing from the registry: {', '.join(unknown)}")
    report = EvaluationReport.empty(labels, registry.labels)
    for s in samples:
        try:
            predicted = recognize(s.image, registry, se).label
        except EmptyForegroundError:
            predicted = NO_FOREGROUND
        report.add(s.label, predicted)
    return report


_TEXT_HEADER = ("Hand Gesture", "Input Image", "Recognized Image", "Accuracy Rate")
_TEXT_FORMAT = "{:<14}{:>13}{:>18}{:>15}\n"


def render_text(report: EvaluationReport) -> str:
    out = [_TEXT_FORMAT.format(*_TEXT_HEADER)]
    if not report.labels:
        return "".join(out)
    for r in report.per_class + [report.total]:
        out.append(_TEXT_FORMAT.format(r.label, r.inputs, r.recognized, f"{r.accuracy}%"))
    return "".join(out)


def render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_TEXT_HEADER)
    if not report.labels:
        return buf.getvalue()
    for r in report.per_class + [report.total]:
        writer.writerow([r.label, r.inputs, r.recognized, f"{r.accuracy}"])
    writer.writerow([])
    columns = report.columns
    writer.writerow(["actual\\predicted"] + columns)
    for label in report.labels:
        writer.writerow([label] + [report.confusion[label][c] for c in columns])
    return buf.getvalue()


def render_report(report: EvaluationReport, fmt: str = "text") -> bytes:
    if fmt == "text":
        return render_text(report).encode("utf-8")
    if fmt == "csv":
        return render_csv(report).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
