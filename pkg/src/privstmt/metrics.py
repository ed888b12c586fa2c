"""Agreement metrics and category-distribution analyses.

Overlap between a predicted top-3 and a reference top-3 comes in two modes:
``any_order`` is the size of the set intersection, ``in_order`` counts
positions where both lists name the same statement. Chance-corrected
coefficients (Cohen's Kappa and friends) are deliberately not provided.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .corpus import Annotation, MethodSample
from .javastmt import MethodCode


class MissingReference(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


@dataclass(frozen=True)
class OverlapResult:
    sample_id: str
    annotator_id: str
    any_order: int
    in_order: int


@dataclass(frozen=True)
class OverlapHistogram:
    mode: str  # "any_order" | "in_order"
    counts: tuple[int, int, int, int]  # overlap levels 0..3
    percentages: tuple[float, float, float, float]

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class CategoryDistribution:
    grouping: str  # "all" | "by_order" | "by_label"
    funccall_on: bool
    cells: Mapping[str, Mapping[str, float]]  # group -> category -> frequency
    counts: Mapping[str, Mapping[str, int]]
    skipped_groups: tuple[str, ...] = ()


def overlap_any_order(pred: Sequence[Optional[int]], ref: Sequence[int]) -> int:
    """Size of the intersection; null prediction slots never match."""
    chosen = {p for p in pred if p is not None}
    return len(chosen & set(ref))


def overlap_in_order(pred: Sequence[Optional[int]], ref: Sequence[int]) -> int:
    """Positional matches only."""
    return sum(
        1
        for i in range(min(len(pred), len(ref)))
        if pred[i] is not None and pred[i] == ref[i]
    )


def histogram(levels: Sequence[int], mode: str) -> OverlapHistogram:
    counts = [0, 0, 0, 0]
    for lv in levels:
        counts[lv] += 1
    total = sum(counts)
    if total == 0:
        pct = (0.0, 0.0, 0.0, 0.0)
    else:
        pct = tuple(100.0 * c / total for c in counts)
    return OverlapHistogram(mode=mode, counts=tuple(counts), percentages=pct)


def _reference_indices(annotation: Annotation) -> list[int]:
    return [s.statement_index for s in sorted(annotation.selections, key=lambda s: s.order)]


def evaluate(
    predictions: Mapping[str, Sequence[Optional[int]]],
    annotations: Sequence[Annotation],
    pairing: str = "per_annotator",
) -> dict:
    """Score predictions against reference annotations.

    ``per_annotator`` yields one result per (prediction, annotator) pair and
    histograms per annotator plus their average; ``max_over_annotators``
    yields one result per sample with the maximum overlap across annotators.
    none_relevant annotations are excluded from scoring and reported as a
    separate count.
    """
    if pairing not in ("per_annotator", "max_over_annotators"):
        raise ValueError(f"unknown pairing {pairing!r}")
    by_sample: dict[str, list[Annotation]] = defaultdict(list)
    none_relevant = 0
    for a in annotations:
        if a.none_relevant:
            none_relevant += 1
            continue
        by_sample[a.sample_id].append(a)

    results: list[OverlapResult] = []
    for sample_id, pred in predictions.items():
        refs = by_sample.get(sample_id)
        if not refs:
            raise MissingReference(f"no reference annotation for sample {sample_id!r}")
        pair_scores = [
            OverlapResult(
                sample_id=sample_id,
                annotator_id=a.annotator_id,
                any_order=overlap_any_order(pred, _reference_indices(a)),
                in_order=overlap_in_order(pred, _reference_indices(a)),
            )
            for a in refs
        ]
        if pairing == "per_annotator":
            results.extend(pair_scores)
        else:
            results.append(
                OverlapResult(
                    sample_id=sample_id,
                    annotator_id="max",
                    any_order=max(r.any_order for r in pair_scores),
                    in_order=max(r.in_order for r in pair_scores),
                )
            )

    return {
        "pairing": pairing,
        "results": results,
        "histograms": _histogram_block(results, pairing),
        "none_relevant_excluded": none_relevant,
    }


def _histogram_block(results: Sequence[OverlapResult], pairing: str) -> dict:
    block: dict = {}
    for mode, attr in (("any_order", "any_order"), ("in_order", "in_order")):
        levels_all = [getattr(r, attr) for r in results]
        pooled = histogram(levels_all, mode)
        entry: dict = {"pooled": pooled}
        if pairing == "per_annotator":
            by_annot: dict[str, OverlapHistogram] = {}
            for aid in sorted({r.annotator_id for r in results}):
                by_annot[aid] = histogram(
                    [getattr(r, attr) for r in results if r.annotator_id == aid], mode
                )
            entry["by_annotator"] = by_annot
            if by_annot:
                # Mean of per-annotator percentages; differs from pooled when
                # annotators cover different numbers of samples, so both are
                # reported.
                n = len(by_annot)
                entry["average_of_percentages"] = tuple(
                    sum(h.percentages[lv] for h in by_annot.values()) / n for lv in range(4)
                )
        block[mode] = entry
    return block


def human_vs_human(
    annotations: Sequence[Annotation], sample_ids: Optional[Sequence[str]] = None
) -> dict:
    """Agreement between the annotator pairs of multiply-annotated samples.

    For each sample with two or more non-none_relevant annotations, every
    annotator pair contributes one result (overlap is symmetric in both
    modes).
    """
    wanted = set(sample_ids) if sample_ids is not None else None
    by_sample: dict[str, list[Annotation]] = defaultdict(list)
    none_relevant = 0
    for a in annotations:
        if wanted is not None and a.sample_id not in wanted:
            continue
        if a.none_relevant:
            none_relevant += 1
            continue
        by_sample[a.sample_id].append(a)

    results: list[OverlapResult] = []
    for sample_id in sorted(by_sample):
        anns = by_sample[sample_id]
        for i in range(len(anns)):
            for j in range(i + 1, len(anns)):
                a, b = anns[i], anns[j]
                ra, rb = _reference_indices(a), _reference_indices(b)
                results.append(
                    OverlapResult(
                        sample_id=sample_id,
                        annotator_id=f"{a.annotator_id}|{b.annotator_id}",
                        any_order=overlap_any_order(ra, rb),
                        in_order=overlap_in_order(ra, rb),
                    )
                )
    return {
        "pairing": "human_vs_human",
        "results": results,
        "histograms": _histogram_block(results, pairing="max_over_annotators"),
        "none_relevant_excluded": none_relevant,
    }


_ORDER_NAMES = {1: "first", 2: "second", 3: "third"}


def distribution(
    methods: Mapping[str, MethodCode],
    annotations: Optional[Sequence[Annotation]] = None,
    grouping: str = "all",
    funccall_on: bool = True,
    samples: Optional[Mapping[str, MethodSample]] = None,
) -> CategoryDistribution:
    """Normalized category frequencies.

    With ``annotations`` None, every statement of every method is counted
    (all-statements mode); otherwise only annotator-selected statements are
    counted (ratings mode). ``by_order`` groups ratings by selection order;
    ``by_label`` groups by the sample's privacy label (requires ``samples``).
    Groups that collect no statements are omitted and reported in
    ``skipped_groups``.
    """
    if grouping not in ("all", "by_order", "by_label"):
        raise ValueError(f"unknown grouping {grouping!r}")
    if grouping == "by_order" and annotations is None:
        raise ValueError("by_order grouping requires annotations")
    if grouping == "by_label" and samples is None:
        raise ValueError("by_label grouping requires samples")

    def category_of(method: MethodCode, index: int) -> str:
        st = method.statements[index]
        return st.category if funccall_on else st.category_no_call

    counts: dict[str, Counter] = defaultdict(Counter)
    expected_groups: list[str]
    if annotations is None:
        expected_groups = ["all"] if grouping == "all" else []
        if grouping == "by_label":
            expected_groups = [s.label.value for s in samples.values()]
        for sid, method in methods.items():
            if grouping == "all":
                group_keys = ["all"]
            else:  # by_label over all statements
                group_keys = [samples[sid].label.value]
            for st in method.statements:
                cat = st.category if funccall_on else st.category_no_call
                for g in group_keys:
                    counts[g][cat] += 1
    else:
        expected_groups = []
        for a in annotations:
            if a.none_relevant:
                continue
            method = methods.get(a.sample_id)
            if method is None:
                raise MissingReference(f"no extracted statements for sample {a.sample_id!r}")
            for sel in a.selections:
                cat = category_of(method, sel.statement_index)
                if grouping == "all":
                    counts["all"][cat] += 1
                elif grouping == "by_order":
                    counts[_ORDER_NAMES[sel.order]][cat] += 1
                else:
                    counts[samples[a.sample_id].label.value][cat] += 1
        if grouping == "by_order":
            expected_groups = list(_ORDER_NAMES.values())
        elif grouping == "all":
            expected_groups = ["all"]

    skipped = tuple(g for g in expected_groups if not counts.get(g))
    cells: dict[str, dict[str, float]] = {}
    final_counts: dict[str, dict[str, int]] = {}
    for group, counter in counts.items():
        total = sum(counter.values())
        if total == 0:
            continue
        cells[group] = {cat: c / total for cat, c in sorted(counter.items())}
        final_counts[group] = dict(sorted(counter.items()))
    return CategoryDistribution(
        grouping=grouping,
        funccall_on=funccall_on,
        cells=cells,
        counts=final_counts,
        skipped_groups=skipped,
    )


def histogram_to_obj(h: OverlapHistogram) -> dict:
    return {"mode": h.mode, "counts": list(h.counts), "percentages": list(h.percentages)}


def report_to_obj(report: dict) -> dict:
    """JSON-ready form of an evaluate()/human_vs_human() report."""
    hist = {}
    for mode, entry in report["histograms"].items():
        obj = {"pooled": histogram_to_obj(entry["pooled"])}
        if "by_annotator" in entry:
            obj["by_annotator"] = {
                aid: histogram_to_obj(h) for aid, h in entry["by_annotator"].items()
            }
        if "average_of_percentages" in entry:
            obj["average_of_percentages"] = list(entry["average_of_percentages"])
        hist[mode] = obj
    return {
        "mode": list(report["histograms"].keys()),
        "pairing": report["pairing"],
        "histograms": hist,
        "none_relevant_excluded": report["none_relevant_excluded"],
        "per_sample": [
            {
                "sample_id": r.sample_id,
                "annotator_id": r.annotator_id,
                "any_order": r.any_order,
                "in_order": r.in_order,
            }
            for r in report["results"]
        ],
    }


def format_histogram_table(report: dict) -> str:
    """Aligned plain-text overlap table for terminal display."""
    lines = []
    header = f"{'overlap':<10}{'any order':>12}{'in order':>12}"
    lines.append(header)
    any_h = report["histograms"]["any_order"]["pooled"]
    in_h = report["histograms"]["in_order"]["pooled"]
    for level in (3, 2, 1, 0):
        lines.append(
            f"{level:<10}{any_h.percentages[level]:>11.2f}%{in_h.percentages[level]:>11.2f}%"
        )
    lines.append(f"{'n':<10}{any_h.total:>12}{in_h.total:>12}")
    return "\n".join(lines)


def distribution_to_obj(dist: CategoryDistribution) -> dict:
    return {
        "grouping": dist.grouping,
        "funccall_mode": "on" if dist.funccall_on else "off",
        "groups": {g: dict(cats) for g, cats in dist.cells.items()},
        "counts": {g: dict(cats) for g, cats in dist.counts.items()},
        "skipped_groups": list(dist.skipped_groups),
    }
