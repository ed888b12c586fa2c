"""Training/inference prompt rendering and completion parsing.

Template:

    CODE:<TAB><code><NL>LABEL:<TAB><label><NL>STATEMENT:<s><TAB><stmt1>[<TAB><stmt2>[<TAB><stmt3>]]</s>

Statements are the raw texts of the selected statements, in selection order.
Because TAB separates the statement fields and "</s>" terminates generation,
literal TABs inside a statement are replaced by a single space and a literal
"</s>" is escaped to "<\\/s>" before rendering; parse_completion applies the
inverse "</s>" mapping (the TAB substitution is not invertible and is simply
documented).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .corpus import Annotation, MethodSample
from .javastmt import MethodCode

TERMINATOR = "</s>"
_ESCAPED_TERMINATOR = "<\\/s>"


class EmptyAnnotation(ValueError):
    pass


class UnknownScheme(ValueError):
    pass


@dataclass(frozen=True)
class TokenBudget:
    max_tokens: int = 256
    counter: str = "whitespace"

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class PromptRecord:
    sample_id: str
    training_text: str
    inference_prefix: str
    target_statements: tuple[str, ...]


def _sanitize(stmt_text: str) -> str:
    return stmt_text.replace("\t", " ").replace(TERMINATOR, _ESCAPED_TERMINATOR)


def _unsanitize(piece: str) -> str:
    return piece.replace(_ESCAPED_TERMINATOR, TERMINATOR)


def render_inference(sample: MethodSample) -> str:
    return f"CODE:\t{sample.code}\nLABEL:\t{sample.label.value}\nSTATEMENT:<s>\t"


def render_training(
    sample: MethodSample, annotation: Annotation, statements: MethodCode
) -> PromptRecord:
    """Render one training prompt for one annotator's selections."""
    if not annotation.selections:
        raise EmptyAnnotation(
            f"annotation by {annotation.annotator_id!r} on {sample.id!r} has no selections"
        )
    ordered = sorted(annotation.selections, key=lambda s: s.order)
    targets = tuple(statements.statements[s.statement_index].text for s in ordered)
    prefix = render_inference(sample)
    body = "\t".join(_sanitize(t) for t in targets)
    return PromptRecord(
        sample_id=sample.id,
        training_text=prefix + body + TERMINATOR,
        inference_prefix=prefix,
        target_statements=targets,
    )


def count_tokens(text: str, scheme: str = "whitespace") -> int:
    if scheme != "whitespace":
        raise UnknownScheme(scheme)
    return len(text.split())


def _truncate_at_tokens(text: str, max_tokens: int) -> str:
    """Cut after the max_tokens-th whitespace-delimited token."""
    count = 0
    in_token = False
    for i, c in enumerate(text):
        if c.isspace():
            in_token = False
        elif not in_token:
            in_token = True
            count += 1
            if count > max_tokens:
                return text[:i]
    return text


def parse_completion(completion: str, budget: TokenBudget = TokenBudget()) -> list[str]:
    """Extract up to three statement texts from a model completion.

    The completion is cut at the first terminator tag or at the token budget,
    whichever comes first; the remainder splits on TAB.
    """
    if budget.counter != "whitespace":
        raise UnknownScheme(budget.counter)
    cut = completion
    term = completion.find(TERMINATOR)
    if term != -1:
        cut = completion[:term]
    limited = _truncate_at_tokens(completion, budget.max_tokens)
    if len(limited) < len(cut):
        cut = limited
    pieces = [_unsanitize(p.strip()) for p in cut.split("\t")]
    return [p for p in pieces if p][:3]


def write_prompts_jsonl(records: Iterable[PromptRecord], fp: IO[str]) -> int:
    count = 0
    for r in records:
        fp.write(
            json.dumps(
                {
                    "sample_id": r.sample_id,
                    "training_text": r.training_text,
                    "inference_prefix": r.inference_prefix,
                    "targets": list(r.target_statements),
                },
                ensure_ascii=False,
            )
            + "\n"
        )
        count += 1
    return count


def write_prompts_text(records: Sequence[PromptRecord], fp: IO[str]) -> int:
    """Plain-text export for external trainers: one prompt per record,
    records separated by a blank line."""
    for i, r in enumerate(records):
        if i:
            fp.write("\n\n")
        fp.write(r.training_text)
    if records:
        fp.write("\n")
    return len(records)
