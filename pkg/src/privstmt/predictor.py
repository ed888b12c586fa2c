"""Top-3 statement prediction.

Two routes: a deterministic category-prior baseline trained from annotation
statistics, and an adapter socket that hands prompts to an external model
process over newline-delimited JSON (request ``{"id", "prompt"}``, response
``{"id", "completion"}``, one object per line, ids echo requests).
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .corpus import Annotation, MethodSample
from .javastmt import ALL_CATEGORIES, MethodCode


class EmptyTrainingSet(ValueError):
    pass


class AdapterError(RuntimeError):
    pass


class AdapterTimeout(AdapterError):
    pass


class AdapterProtocolError(AdapterError):
    pass


class AdapterExit(AdapterError):
    pass


GLOBAL_TABLE = "*"


@dataclass(frozen=True)
class CategoryPrior:
    """P(category | selection position [, label]) with Laplace smoothing."""

    alpha: float
    funccall_on: bool
    per_label: bool
    # label name (or "*" for the global table) -> position (1..3) -> category -> prob
    tables: Mapping[str, Mapping[int, Mapping[str, float]]]

    def prob(self, category: str, position: int, label: Optional[str] = None) -> float:
        table = None
        if self.per_label and label is not None:
            table = self.tables.get(label)
        if table is None:
            table = self.tables[GLOBAL_TABLE]
        return table[position][category]


@dataclass(frozen=True)
class AdapterConfig:
    command: str
    timeout: float = 30.0
    max_parallel: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_parallel <= 0:
            raise ValueError("max_parallel must be positive")


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    texts: tuple[str, ...]
    indices: tuple[Optional[int], ...]


def _smooth(counter: Mapping[str, int], alpha: float) -> dict[str, float]:
    total = sum(counter.values())
    denom = total + alpha * len(ALL_CATEGORIES)
    return {cat: (counter.get(cat, 0) + alpha) / denom for cat in ALL_CATEGORIES}


def train_baseline(
    annotations: Sequence[Annotation],
    methods: Mapping[str, MethodCode],
    alpha: float = 1.0,
    per_label: bool = False,
    samples: Optional[Mapping[str, MethodSample]] = None,
    funccall_on: bool = True,
) -> CategoryPrior:
    """Count selected-statement categories per position and smooth."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if per_label and samples is None:
        raise ValueError("per_label training requires samples")
    raw: dict[str, dict[int, dict[str, int]]] = {GLOBAL_TABLE: {1: {}, 2: {}, 3: {}}}
    n_selections = 0
    for a in annotations:
        if a.none_relevant:
            continue
        method = methods.get(a.sample_id)
        if method is None:
            continue
        keys = [GLOBAL_TABLE]
        if per_label:
            label = samples[a.sample_id].label.value
            raw.setdefault(label, {1: {}, 2: {}, 3: {}})
            keys.append(label)
        for sel in a.selections:
            st = method.statements[sel.statement_index]
            cat = st.category if funccall_on else st.category_no_call
            for key in keys:
                pos = raw[key][sel.order]
                pos[cat] = pos.get(cat, 0) + 1
            n_selections += 1
    if n_selections == 0:
        raise EmptyTrainingSet("no selections in training annotations")
    tables = {
        key: {pos: _smooth(counter, alpha) for pos, counter in positions.items()}
        for key, positions in raw.items()
    }
    return CategoryPrior(alpha=alpha, funccall_on=funccall_on, per_label=per_label, tables=tables)


def predict_baseline(
    method: MethodCode, label: Optional[str], prior: CategoryPrior, k: int = 3
) -> list[int]:
    """Greedy argmax per position; ties go to the smallest line_start, then
    the smallest index. Deterministic; never repeats an index."""
    chosen: list[int] = []
    taken: set[int] = set()
    for position in range(1, k + 1):
        best = None
        best_key = None
        for st in method.statements:
            if st.index in taken:
                continue
            cat = st.category if prior.funccall_on else st.category_no_call
            p = prior.prob(cat, position, label)
            key = (-p, st.line_start, st.index)
            if best_key is None or key < best_key:
                best_key = key
                best = st.index
        if best is None:
            break
        chosen.append(best)
        taken.add(best)
    return chosen


def match_statement(predicted_text: str, method: MethodCode) -> Optional[int]:
    """Index of the first statement whose normalized text equals the
    prediction's normalized text; None when nothing matches."""
    wanted = " ".join(predicted_text.split())
    for st in method.statements:
        if st.normalized_text == wanted:
            return st.index
    return None


def prior_to_obj(prior: CategoryPrior) -> dict:
    return {
        "alpha": prior.alpha,
        "funccall_mode": "on" if prior.funccall_on else "off",
        "per_label": prior.per_label,
        "tables": {
            key: {str(pos): dict(sorted(cats.items())) for pos, cats in positions.items()}
            for key, positions in prior.tables.items()
        },
    }


def prior_from_obj(obj: dict) -> CategoryPrior:
    return CategoryPrior(
        alpha=obj["alpha"],
        funccall_on=obj["funccall_mode"] == "on",
        per_label=obj["per_label"],
        tables={
            key: {int(pos): dict(cats) for pos, cats in positions.items()}
            for key, positions in obj["tables"].items()
        },
    )


def save_prior(prior: CategoryPrior, path) -> None:
    Path(path).write_text(json.dumps(prior_to_obj(prior), indent=2) + "\n", encoding="utf-8")


def load_prior(path) -> CategoryPrior:
    return prior_from_obj(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# adapter protocol


class _Reader(threading.Thread):
    """Drains the child's stdout into a queue, line by line."""

    def __init__(self, pipe):
        super().__init__(daemon=True)
        self.pipe = pipe
        self.lines: queue.Queue = queue.Queue()

    def run(self):
        try:
            for line in self.pipe:
                self.lines.put(line)
        except ValueError:
            pass  # pipe closed under us during shutdown
        self.lines.put(None)  # EOF marker


class _Writer(threading.Thread):
    """Feeds requests to the child's stdin, bounded by a window semaphore."""

    def __init__(self, pipe, requests: list[str], window: threading.Semaphore):
        super().__init__(daemon=True)
        self.pipe = pipe
        self.requests = requests
        self.window = window
        self.failed = False

    def run(self):
        try:
            for line in self.requests:
                self.window.acquire()
                self.pipe.write(line)
                self.pipe.flush()
            self.pipe.close()
        except (BrokenPipeError, OSError, ValueError):
            self.failed = True


def adapter_predict(prompts: Sequence[tuple[str, str]], config: AdapterConfig) -> list[str]:
    """Run ``(request_id, prompt)`` pairs through the adapter process.

    Returns completions in request order. Up to ``max_parallel`` requests are
    in flight at once; responses may arrive in any order and are matched by
    id. Raises AdapterTimeout when no response arrives within the configured
    seconds, AdapterProtocolError on malformed/unknown responses, AdapterExit
    when the process dies with a nonzero status.
    """
    if not prompts:
        return []
    ids = [rid for rid, _ in prompts]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be unique")
    proc = subprocess.Popen(
        shlex.split(config.command),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
        text=True,
        encoding="utf-8",
    )
    window = threading.Semaphore(config.max_parallel)
    request_lines = [
        json.dumps({"id": rid, "prompt": prompt}, ensure_ascii=False) + "\n"
        for rid, prompt in prompts
    ]
    reader = _Reader(proc.stdout)
    writer = _Writer(proc.stdin, request_lines, window)
    reader.start()
    writer.start()

    pending = set(ids)
    completions: dict[str, str] = {}
    try:
        while pending:
            try:
                line = reader.lines.get(timeout=config.timeout)
            except queue.Empty:
                raise AdapterTimeout(
                    f"no adapter response within {config.timeout}s "
                    f"({len(pending)} request(s) outstanding)"
                ) from None
            if line is None:  # child closed stdout
                code = proc.wait()
                if code != 0:
                    raise AdapterExit(f"adapter exited with status {code}")
                raise AdapterProtocolError(
                    f"adapter closed its output with {len(pending)} request(s) unanswered"
                )
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise AdapterProtocolError(f"malformed adapter response: {line[:200]!r}") from None
            if not isinstance(obj, dict) or "id" not in obj or "completion" not in obj:
                raise AdapterProtocolError(f"adapter response missing id/completion: {line[:200]!r}")
            rid = obj["id"]
            if rid not in pending:
                raise AdapterProtocolError(f"adapter response for unknown id {rid!r}")
            if not isinstance(obj["completion"], str):
                raise AdapterProtocolError("adapter completion must be a string")
            pending.discard(rid)
            completions[rid] = obj["completion"]
            window.release()
    except Exception:
        proc.kill()
        proc.wait()
        raise
    finally:
        window.release()  # unblock the writer if it is still waiting

    writer.join(timeout=config.timeout)
    try:
        code = proc.wait(timeout=config.timeout)
    except subprocess.TimeoutExpired:
        # all responses are in; an adapter that lingers after stdin EOF is
        # shut down but not treated as a failure
        proc.kill()
        proc.wait()
        return [completions[rid] for rid in ids]
    if code != 0:
        raise AdapterExit(f"adapter exited with status {code}")
    return [completions[rid] for rid in ids]


def predictions_to_jsonl(predictions: Sequence[Prediction], fp) -> int:
    for p in predictions:
        fp.write(
            json.dumps(
                {"sample_id": p.sample_id, "texts": list(p.texts), "indices": list(p.indices)},
                ensure_ascii=False,
            )
            + "\n"
        )
    return len(predictions)


def load_predictions(path) -> list[Prediction]:
    out = []
    with open(path, encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                Prediction(
                    sample_id=obj["sample_id"],
                    texts=tuple(obj["texts"]),
                    indices=tuple(obj["indices"]),
                )
            )
    return out
