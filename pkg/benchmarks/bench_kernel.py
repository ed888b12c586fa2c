#!/usr/bin/env python3
"""Benchmark: compiled scanning kernel vs the pure-Python twin.

Builds a corpus of realistic Android-method sources and times full
extraction (tokenize + segment + categorize) through each kernel, plus the
raw tokenizer loop on its own. Run from the repo root:

    python benchmarks/bench_kernel.py [--methods 2000] [--repeats 3]
"""

import argparse
import json
import random
import time
from pathlib import Path

from privstmt.javastmt import _kernel_py
from privstmt.javastmt.segmenter import UnbalancedSource, _Segmenter, categorize

try:
    from privstmt.javastmt import _kernel_cy
except ImportError:
    _kernel_cy = None

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "methods_labeled.json"

STATEMENTS = [
    "int v{n} = 0;",
    "String s{n} = tm.getDeviceId();",
    'editor.putString("k{n}", String.valueOf(v{n}));',
    "v{n} = v{n} + offset;",
    "tracker.send(new HitBuilders.EventBuilder().build());",
    "if (v{n} > threshold) {{",
    "}}",
    "for (int i{n} = 0; i{n} < v{n}; i{n}++) {{",
    "}}",
    "// collected for analytics batch {n}",
    "return v{n};",
]


def synth_method(rng: random.Random, k: int) -> str:
    lines = [f"void generated{k}(Context ctx, int offset) {{"]
    depth = 1
    for n in range(rng.randint(6, 24)):
        template = rng.choice(STATEMENTS)
        if template == "}}":
            if depth <= 1:
                continue
            depth -= 1
            lines.append("    " * depth + "}")
            continue
        line = "    " * depth + template.format(n=n)
        if template.endswith("{{"):
            depth += 1
        lines.append(line)
    while depth > 0:
        depth -= 1
        lines.append("    " * depth + "}")
    return "\n".join(lines) + "\n"


def build_corpus(n_methods: int) -> list:
    rng = random.Random(20240601)
    corpus = [m["code"] for m in json.loads(FIXTURES.read_text())["methods"]]
    corpus += [synth_method(rng, k) for k in range(n_methods - len(corpus))]
    return corpus


def extract_with(kernel, source: str):
    tokens, err = kernel.scan(source)
    if err:
        raise UnbalancedSource("unterminated literal or comment", err)
    seg = _Segmenter(source, tokens)
    raw = seg.run()
    for first, last, _depth in raw:
        text = source[seg.toks[first][1] : seg.toks[last][2]]
        categorize(text, funccall_precedence=True)
        categorize(text, funccall_precedence=False)
    return len(raw)


def bench(label: str, fn, corpus, repeats: int) -> float:
    best = float("inf")
    statements = 0
    for _ in range(repeats):
        start = time.perf_counter()
        statements = sum(fn(src) for src in corpus)
        best = min(best, time.perf_counter() - start)
    mps = len(corpus) / best
    print(f"{label:<28} {best:8.3f}s best of {repeats}   {mps:9.0f} methods/s   {statements} statements")
    return best


def bench_scan_only(label: str, kernel, corpus, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for src in corpus:
            kernel.scan(src)
        best = min(best, time.perf_counter() - start)
    chars = sum(len(s) for s in corpus)
    print(f"{label:<28} {best:8.3f}s best of {repeats}   {chars / best / 1e6:9.1f} Mchars/s")
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--methods", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    corpus = build_corpus(args.methods)
    print(f"corpus: {len(corpus)} methods, {sum(len(s) for s in corpus)} chars\n")

    print("tokenizer only:")
    t_py = bench_scan_only("  pure python", _kernel_py, corpus, args.repeats)
    if _kernel_cy is not None:
        t_cy = bench_scan_only("  cython", _kernel_cy, corpus, args.repeats)
        print(f"  speedup: {t_py / t_cy:.1f}x\n")
    else:
        print("  cython kernel not built; skipping\n")

    print("full extraction (segment + categorize both modes):")
    e_py = bench("  pure python kernel", lambda s: extract_with(_kernel_py, s), corpus, args.repeats)
    if _kernel_cy is not None:
        e_cy = bench("  cython kernel", lambda s: extract_with(_kernel_cy, s), corpus, args.repeats)
        print(f"  end-to-end speedup: {e_py / e_cy:.2f}x")


if __name__ == "__main__":
    main()
