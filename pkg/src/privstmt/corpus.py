"""Corpus data model and persistence.

File formats (all UTF-8, one JSON object per line for JSONL):
  samples.jsonl      {"id", "code", "label", "project"?}
  annotations.jsonl  {"sample_id", "annotator_id", "none_relevant",
                      "selections": [{"order", "statement_index", "rationale"?}]}
  split.json         {"seed", "train_ids": [], "val_ids": [], "test_ids": []}

Loads are pure and the loaded objects immutable; writers require exclusive
access to the target file.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence


class CorpusError(ValueError):
    pass


class SchemaError(CorpusError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DuplicateId(SchemaError):
    pass


class DuplicateStatementIndex(SchemaError):
    pass


class NonContiguousOrder(SchemaError):
    pass


class IndexOutOfRange(SchemaError):
    pass


class InsufficientSamples(CorpusError):
    pass


class PrivacyLabel(enum.Enum):
    ADVERTISEMENT = "Advertisement"
    FUNCTIONALITY = "Functionality"
    ANALYTICS = "Analytics"
    OTHER = "Other"

    @property
    def description(self) -> str:
        return _LABEL_DESCRIPTIONS[self]

    @classmethod
    def from_name(cls, name: str) -> "PrivacyLabel":
        for label in cls:
            if label.value == name:
                return label
        raise KeyError(name)


_LABEL_DESCRIPTIONS = {
    PrivacyLabel.ADVERTISEMENT: "when the personal data is being used for advertisement services.",
    PrivacyLabel.FUNCTIONALITY: "when the personal data is being used for the functionality of the app.",
    PrivacyLabel.ANALYTICS: "when the personal data is being used for analytics in or outside the app.",
    PrivacyLabel.OTHER: "when the personal data is being used for other/unknown purposes.",
}


@dataclass(frozen=True)
class MethodSample:
    id: str
    code: str
    label: PrivacyLabel
    project: Optional[str] = None


@dataclass(frozen=True)
class Selection:
    order: int
    statement_index: int
    rationale: Optional[str] = None


@dataclass(frozen=True)
class Annotation:
    sample_id: str
    annotator_id: str
    selections: tuple[Selection, ...] = ()
    none_relevant: bool = False

    def validate(self, statement_count: Optional[int] = None, line: Optional[int] = None) -> None:
        if len(self.selections) > 3:
            raise SchemaError("more than 3 selections", line)
        if self.none_relevant and self.selections:
            raise SchemaError("none_relevant annotation has selections", line)
        orders = [s.order for s in self.selections]
        if orders != list(range(1, len(orders) + 1)):
            raise NonContiguousOrder(f"selection orders {orders} are not 1..{len(orders)}", line)
        indices = [s.statement_index for s in self.selections]
        if len(set(indices)) != len(indices):
            raise DuplicateStatementIndex(f"duplicate statement_index in {indices}", line)
        for s in self.selections:
            if s.statement_index < 0:
                raise IndexOutOfRange(f"negative statement_index {s.statement_index}", line)
            if statement_count is not None and s.statement_index >= statement_count:
                raise IndexOutOfRange(
                    f"statement_index {s.statement_index} >= {statement_count} statements", line
                )


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def _read_jsonl(path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fp:
        for lineno, raw in enumerate(fp, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(obj, dict):
                raise SchemaError("expected a JSON object", lineno)
            yield lineno, obj


def load_samples(path) -> list[MethodSample]:
    samples: list[MethodSample] = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        try:
            sid = obj["id"]
            code = obj["code"]
            label_name = obj["label"]
        except KeyError as exc:
            raise SchemaError(f"missing field {exc.args[0]!r}", lineno) from None
        if not isinstance(sid, str) or not isinstance(code, str) or not isinstance(label_name, str):
            raise SchemaError("id, code and label must be strings", lineno)
        try:
            label = PrivacyLabel.from_name(label_name)
        except KeyError:
            raise SchemaError(f"unknown label {label_name!r}", lineno) from None
        if sid in seen:
            raise DuplicateId(f"duplicate sample id {sid!r}", lineno)
        seen.add(sid)
        project = obj.get("project")
        if project is not None and not isinstance(project, str):
            raise SchemaError("project must be a string", lineno)
        samples.append(MethodSample(id=sid, code=code, label=label, project=project))
    return samples


def save_samples(samples: Sequence[MethodSample], path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for s in samples:
            obj = {"id": s.id, "code": s.code, "label": s.label.value}
            if s.project is not None:
                obj["project"] = s.project
            fp.write(json.dumps(obj, ensure_ascii=False) + "\n")


def annotation_to_obj(a: Annotation) -> dict:
    sels = []
    for s in a.selections:
        sel = {"order": s.order, "statement_index": s.statement_index}
        if s.rationale is not None:
            sel["rationale"] = s.rationale
        sels.append(sel)
    return {
        "sample_id": a.sample_id,
        "annotator_id": a.annotator_id,
        "none_relevant": a.none_relevant,
        "selections": sels,
    }


def _annotation_from_obj(obj: dict, lineno: Optional[int]) -> Annotation:
    try:
        sample_id = obj["sample_id"]
        annotator_id = obj["annotator_id"]
        none_relevant = obj["none_relevant"]
        raw_sels = obj["selections"]
    except KeyError as exc:
        raise SchemaError(f"missing field {exc.args[0]!r}", lineno) from None
    if not isinstance(sample_id, str) or not isinstance(annotator_id, str):
        raise SchemaError("sample_id and annotator_id must be strings", lineno)
    if not isinstance(none_relevant, bool):
        raise SchemaError("none_relevant must be a boolean", lineno)
    if not isinstance(raw_sels, list):
        raise SchemaError("selections must be a list", lineno)
    sels = []
    for raw in raw_sels:
        if not isinstance(raw, dict):
            raise SchemaError("selection must be an object", lineno)
        try:
            order = raw["order"]
            idx = raw["statement_index"]
        except KeyError as exc:
            raise SchemaError(f"selection missing {exc.args[0]!r}", lineno) from None
        if not isinstance(order, int) or not isinstance(idx, int):
            raise SchemaError("order and statement_index must be integers", lineno)
        rationale = raw.get("rationale")
        if rationale is not None and not isinstance(rationale, str):
            raise SchemaError("rationale must be a string", lineno)
        sels.append(Selection(order=order, statement_index=idx, rationale=rationale))
    sels.sort(key=lambda s: s.order)
    return Annotation(
        sample_id=sample_id,
        annotator_id=annotator_id,
        selections=tuple(sels),
        none_relevant=none_relevant,
    )


def load_annotations(path, statement_counts: Optional[Mapping[str, int]] = None) -> list[Annotation]:
    """Load and validate annotations.

    When ``statement_counts`` (sample id -> number of statements) is given,
    selection indices are range-checked against it.
    """
    out: list[Annotation] = []
    for lineno, obj in _read_jsonl(path):
        a = _annotation_from_obj(obj, lineno)
        count = None
        if statement_counts is not None:
            if a.sample_id not in statement_counts:
                raise SchemaError(f"annotation references unknown sample {a.sample_id!r}", lineno)
            count = statement_counts[a.sample_id]
        a.validate(statement_count=count, line=lineno)
        out.append(a)
    return out


def save_annotations(annotations: Sequence[Annotation], path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for a in annotations:
            fp.write(json.dumps(annotation_to_obj(a), ensure_ascii=False) + "\n")


def make_split(
    samples: Sequence[MethodSample],
    annotations: Sequence[Annotation],
    val_count: Optional[int] = None,
    seed: int = 0,
) -> SplitSpec:
    """Split annotated samples: multi-annotator samples are the test set,
    the rest is shuffled with the seeded PRNG into val (first ``val_count``)
    and train. Test membership does not depend on the seed."""
    annotators: dict[str, set[str]] = {}
    for a in annotations:
        annotators.setdefault(a.sample_id, set()).add(a.annotator_id)
    annotated = [s.id for s in samples if s.id in annotators]
    test = [sid for sid in annotated if len(annotators[sid]) >= 2]
    singles = [sid for sid in annotated if len(annotators[sid]) < 2]
    if val_count is None:
        val_count = round(0.10 * len(singles))
    if val_count >= len(singles):
        raise InsufficientSamples(
            f"val_count {val_count} >= {len(singles)} singly-annotated samples"
        )
    rng = random.Random(seed)
    shuffled = list(singles)
    rng.shuffle(shuffled)
    return SplitSpec(
        seed=seed,
        train_ids=tuple(shuffled[val_count:]),
        val_ids=tuple(shuffled[:val_count]),
        test_ids=tuple(test),
    )


def save_split(split: SplitSpec, path) -> None:
    obj = {
        "seed": split.seed,
        "train_ids": list(split.train_ids),
        "val_ids": list(split.val_ids),
        "test_ids": list(split.test_ids),
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_split(path) -> SplitSpec:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return SplitSpec(
            seed=obj["seed"],
            train_ids=tuple(obj["train_ids"]),
            val_ids=tuple(obj["val_ids"]),
            test_ids=tuple(obj["test_ids"]),
        )
    except KeyError as exc:
        raise SchemaError(f"split file missing field {exc.args[0]!r}") from None
