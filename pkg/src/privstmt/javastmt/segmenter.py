"""Statement segmentation and categorization for single Java methods.

This is a lightweight scanner (token stream + brace/paren/literal tracking),
not a Java grammar. Inputs are method snippets that need not compile on
their own; anything the classifier cannot place falls back to ``other``
instead of failing.

Segment boundaries:
  * the method signature up to and including its opening brace;
  * each control-flow header up to its opening brace, or up to its
    closing parenthesis (or bare keyword) for braceless bodies;
  * each ``;``-terminated simple statement, at any brace depth — ``;``
    inside parentheses, literals, or comments never terminates;
  * each ``case``/``default`` label.
Brace-only and comment-only content produces no statement.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, replace
from typing import IO, Iterable, Optional

from .kernel import CHAR, COMMENT_KINDS, PUNCT, STRING, WORD, scan


class UnbalancedSource(ValueError):
    """Braces, parentheses, or literals never close."""

    def __init__(self, message: str, line: int, sample_id: Optional[str] = None):
        self.line = line
        self.sample_id = sample_id
        super().__init__(message if sample_id is None else f"{sample_id}: {message}")


class EmptySource(ValueError):
    """No statement found in the input."""

    def __init__(self, message: str = "no statement found", sample_id: Optional[str] = None):
        self.sample_id = sample_id
        super().__init__(message if sample_id is None else f"{sample_id}: {message}")


# The seven frequent categories plus the remaining named variants; anything
# unrecognized collapses to OTHER, never to one of the seven.
class StatementCategory:
    FUNC_CALL = "func_call"
    EXPR_STMT = "expr_stmt"
    DECL_STMT = "decl_stmt"
    FUNCTION_SIG = "function_sig"
    IF_STMT = "if_stmt"
    ELSE = "else"
    RETURN = "return"
    FOR = "for"
    WHILE = "while"
    DO = "do"
    SWITCH = "switch"
    CASE = "case"
    TRY = "try"
    CATCH = "catch"
    FINALLY = "finally"
    THROW = "throw"
    BREAK = "break"
    CONTINUE = "continue"
    SYNCHRONIZED = "synchronized"
    OTHER = "other"


ALL_CATEGORIES = (
    StatementCategory.FUNC_CALL,
    StatementCategory.EXPR_STMT,
    StatementCategory.DECL_STMT,
    StatementCategory.FUNCTION_SIG,
    StatementCategory.IF_STMT,
    StatementCategory.ELSE,
    StatementCategory.RETURN,
    StatementCategory.FOR,
    StatementCategory.WHILE,
    StatementCategory.DO,
    StatementCategory.SWITCH,
    StatementCategory.CASE,
    StatementCategory.TRY,
    StatementCategory.CATCH,
    StatementCategory.FINALLY,
    StatementCategory.THROW,
    StatementCategory.BREAK,
    StatementCategory.CONTINUE,
    StatementCategory.SYNCHRONIZED,
    StatementCategory.OTHER,
)

SEVEN_CORE = (
    StatementCategory.FUNC_CALL,
    StatementCategory.EXPR_STMT,
    StatementCategory.DECL_STMT,
    StatementCategory.FUNCTION_SIG,
    StatementCategory.IF_STMT,
    StatementCategory.ELSE,
    StatementCategory.RETURN,
)

# Control keywords that require a following "(" to be treated as a header.
_PAREN_HEADS = {"if", "for", "while", "switch", "catch", "synchronized"}
# Control keywords that open a header without parentheses.
_BARE_HEADS = {"else", "do", "try", "finally"}
_LABEL_HEADS = {"case", "default"}

_HEAD_CATEGORY = {
    "if": StatementCategory.IF_STMT,
    "else": StatementCategory.ELSE,
    "for": StatementCategory.FOR,
    "while": StatementCategory.WHILE,
    "do": StatementCategory.DO,
    "switch": StatementCategory.SWITCH,
    "case": StatementCategory.CASE,
    "default": StatementCategory.CASE,
    "try": StatementCategory.TRY,
    "catch": StatementCategory.CATCH,
    "finally": StatementCategory.FINALLY,
    "synchronized": StatementCategory.SYNCHRONIZED,
}

_KEYWORD_STMTS = {
    "return": StatementCategory.RETURN,
    "throw": StatementCategory.THROW,
    "break": StatementCategory.BREAK,
    "continue": StatementCategory.CONTINUE,
}

RESERVED = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    """.split()
)

_PRIMITIVES = frozenset("boolean byte char short int long float double void".split())
_MODIFIERS = frozenset(
    "public private protected static final abstract synchronized native strictfp transient volatile default".split()
)

# "{" directly after one of these punctuation characters belongs to an array
# or annotation initializer and stays inside the statement.
_INLINE_BRACE_PREV = frozenset("=,([{]")


@dataclass(frozen=True)
class Statement:
    index: int
    text: str
    normalized_text: str
    line_start: int
    line_end: int
    depth: int
    category: Optional[str] = None
    category_no_call: Optional[str] = None

    def to_json_obj(self) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "normalized_text": self.normalized_text,
            "line_start": self.line_start,
            "line_end": self.line_end,
            "category": self.category,
            "category_no_call": self.category_no_call,
            "depth": self.depth,
        }


@dataclass(frozen=True)
class MethodCode:
    sample_id: str
    source: str
    statements: tuple[Statement, ...]


def _normalize(text: str) -> str:
    return " ".join(text.split())


class _Segmenter:
    """One pass over the content-token stream, producing raw segments."""

    def __init__(self, source: str, tokens: list):
        self.source = source
        # content tokens only; comments are excluded content by definition
        self.toks = [t for t in tokens if t[0] not in COMMENT_KINDS]
        self.n = len(self.toks)
        self.i = 0
        self.paren = 0
        self.paren_lines: list[int] = []  # line of each unclosed "("
        # brace stack entries: ("inline", line) or ("block", base_paren, line)
        self.braces: list[tuple] = []
        self.base = 0  # paren depth at the current block's opening
        self.segments: list[tuple[int, int, int]] = []  # (first_tok, last_tok, depth)
        self.buf_start: Optional[int] = None
        self.just_closed = False

    def word(self, idx: int) -> str:
        if not 0 <= idx < self.n:
            return ""
        t = self.toks[idx]
        return self.source[t[1] : t[2]] if t[0] == WORD else ""

    def punct(self, idx: int) -> str:
        if not 0 <= idx < self.n:
            return ""
        t = self.toks[idx]
        return self.source[t[1]] if t[0] == PUNCT else ""

    def depth(self) -> int:
        return sum(1 for b in self.braces if b[0] == "block")

    def flush(self, last: int) -> None:
        if self.buf_start is not None:
            self.segments.append((self.buf_start, last, self._buf_depth))
            self.buf_start = None

    def start_buf(self, idx: int) -> None:
        if self.buf_start is None:
            self.buf_start = idx
            self._buf_depth = self.depth()

    def open_paren(self, idx: int) -> None:
        self.paren += 1
        self.paren_lines.append(self.toks[idx][3])

    def close_paren(self, idx: int) -> bool:
        if self.paren == 0:
            return False
        self.paren -= 1
        self.paren_lines.pop()
        return True

    def run(self) -> list[tuple[int, int, int]]:
        self._signature()
        while self.i < self.n:
            self._step()
        if self.buf_start is not None:
            self.flush(self.n - 1)
        if self.braces:
            kind = self.braces[0]
            raise UnbalancedSource("unclosed '{'", kind[-1])
        if self.paren > 0:
            raise UnbalancedSource("unclosed '('", self.paren_lines[0])
        return self.segments

    def _signature(self) -> None:
        # Signature mode: accumulate until the first statement-opening "{"
        # or a terminating ";" (abstract/interface form).
        while self.i < self.n:
            t = self.toks[self.i]
            ch = self.punct(self.i)
            if ch == "(":
                self.start_buf(self.i)
                self.open_paren(self.i)
            elif ch == ")":
                self.start_buf(self.i)
                if not self.close_paren(self.i):
                    raise UnbalancedSource("unmatched ')'", t[3])
            elif ch == "{":
                prev = self._prev_punct_char()
                if self.paren > 0 or prev in _INLINE_BRACE_PREV:
                    # annotation/array initializer brace: part of the signature
                    self.start_buf(self.i)
                    self.braces.append(("inline", t[3]))
                else:
                    self.start_buf(self.i)
                    self.braces.append(("block", self.paren, t[3]))
                    self.base = self.paren
                    self.flush(self.i)
                    self.i += 1
                    return
            elif ch == "}":
                if not self.braces:
                    raise UnbalancedSource("unmatched '}'", t[3])
                self.braces.pop()
                self.start_buf(self.i)
            elif ch == ";" and self.paren == 0:
                self.start_buf(self.i)
                self.flush(self.i)
                self.i += 1
                return
            else:
                self.start_buf(self.i)
            self.i += 1
        self.flush(self.n - 1)

    def _prev_punct_char(self) -> str:
        j = self.i - 1
        if j < 0:
            return ""
        t = self.toks[j]
        return self.source[t[1]] if t[0] == PUNCT else ""

    def _step(self) -> None:
        t = self.toks[self.i]
        kind = t[0]
        ch = self.punct(self.i)

        if self.buf_start is None and kind == WORD:
            w = self.word(self.i)
            if w in _PAREN_HEADS or w in _BARE_HEADS:
                if self._try_header(w):
                    return
            elif w in _LABEL_HEADS:
                if self._try_label():
                    return

        if ch == "(":
            self.start_buf(self.i)
            self.open_paren(self.i)
            self.just_closed = False
        elif ch == ")":
            if self.buf_start is None and self.paren > self.base:
                # closer residue after an expression-level block ("});")
                if not self.close_paren(self.i):
                    raise UnbalancedSource("unmatched ')'", t[3])
                self.just_closed = True
            elif not self.close_paren(self.i):
                raise UnbalancedSource("unmatched ')'", t[3])
            else:
                self.start_buf(self.i)
                self.just_closed = False
        elif ch == "{":
            prev = self._prev_punct_char()
            if prev in _INLINE_BRACE_PREV:
                self.start_buf(self.i)
                self.braces.append(("inline", t[3]))
            elif self.buf_start is None:
                # bare block: separator, no statement
                self.braces.append(("block", self.paren, t[3]))
                self.base = self.paren
            else:
                self.braces.append(("block", self.paren, t[3]))
                self.base = self.paren
                self.flush(self.i)
            self.just_closed = False
        elif ch == "}":
            if not self.braces:
                raise UnbalancedSource("unmatched '}'", t[3])
            top = self.braces[-1]
            if top[0] == "inline":
                self.braces.pop()
                self.start_buf(self.i)
            else:
                self.flush(self.i - 1)
                self.braces.pop()
                self.base = next(
                    (b[1] for b in reversed(self.braces) if b[0] == "block"), 0
                )
                self.just_closed = True
        elif ch == ";" and self.paren == self.base:
            if self.buf_start is None:
                self.just_closed = True  # lone ";" or closer residue
            else:
                self.flush(self.i)
        elif ch == "," and self.buf_start is None and self.just_closed:
            pass  # separator residue between expression-level blocks
        else:
            self.start_buf(self.i)
            self.just_closed = False
        self.i += 1

    def _try_header(self, keyword: str) -> bool:
        """Consume a control-flow header; False if the shape does not match."""
        j = self.i
        end = j
        k = j + 1
        if keyword == "else" and k < self.n and self.toks[k][0] == WORD and self.word(k) == "if":
            end = k
            k += 1
        want_paren = keyword in _PAREN_HEADS or (keyword == "else" and end != j)
        if self.punct(k) == "(":
            depth = 0
            while k < self.n:
                p = self.punct(k)
                if p == "(":
                    depth += 1
                elif p == ")":
                    depth -= 1
                    if depth == 0:
                        end = k
                        k += 1
                        break
                k += 1
            else:
                raise UnbalancedSource("unclosed '(' in header", self.toks[j][3])
        elif want_paren:
            return False
        # braceless body: header ends at its parenthesis (or keyword); a
        # directly-following ";" (empty body, do-while tail) joins the header
        if k < self.n and self.punct(k) == "{":
            self.braces.append(("block", self.paren, self.toks[k][3]))
            self.base = self.paren
            end = k
            k += 1
        elif k < self.n and self.punct(k) == ";":
            end = k
            k += 1
        self.segments.append((j, end, self.depth() if self.punct(end) != "{" else self._depth_before()))
        self.i = k
        self.just_closed = False
        return True

    def _depth_before(self) -> int:
        # the header's "{" was already pushed; its own depth excludes it
        return self.depth() - 1

    def _try_label(self) -> bool:
        """Consume a case/default label up to ':' (or '->' arrow form)."""
        j = self.i
        k = j + 1
        depth = 0
        while k < self.n:
            p = self.punct(k)
            if p == "(":
                depth += 1
            elif p == ")":
                depth -= 1
            elif p == ":" and depth == 0:
                nxt = self.punct(k + 1) if k + 1 < self.n else ""
                if nxt == ":":  # "::" method reference, keep scanning
                    k += 2
                    continue
                self.segments.append((j, k, self.depth()))
                self.i = k + 1
                self.just_closed = False
                return True
            elif p == "-" and depth == 0 and k + 1 < self.n and self.punct(k + 1) == ">":
                end = k + 1
                k += 2
                if k < self.n and self.punct(k) == "{":
                    self.braces.append(("block", self.paren, self.toks[k][3]))
                    self.base = self.paren
                    end = k
                    k += 1
                self.segments.append((j, end, self.depth() if self.punct(end) != "{" else self._depth_before()))
                self.i = k
                self.just_closed = False
                return True
            elif p == ";" or p == "{" or p == "}":
                return False
            k += 1
        return False


def _content_tokens(source: str):
    tokens, err_line = scan(source)
    if err_line:
        raise UnbalancedSource("unterminated literal or comment", err_line)
    return tokens


def segment(source: str) -> list[Statement]:
    """Split a method's source into uncategorized statements, in order."""
    tokens = _content_tokens(source)
    seg = _Segmenter(source, tokens)
    raw = seg.run()
    if not raw:
        raise EmptySource()
    newlines = [k for k, c in enumerate(source) if c == "\n"]
    out = []
    for idx, (first, last, depth) in enumerate(raw):
        start = seg.toks[first][1]
        end = seg.toks[last][2]
        text = source[start:end]
        line_start = seg.toks[first][3]
        line_end = bisect.bisect_right(newlines, end - 1) + 1
        out.append(
            Statement(
                index=idx,
                text=text,
                normalized_text=_normalize(text),
                line_start=line_start,
                line_end=line_end,
                depth=depth,
            )
        )
    return out


# ---------------------------------------------------------------------------
# categorization


class _TokView:
    """Word/punct accessors over a statement's own token list."""

    def __init__(self, source: str, tokens: list):
        self.toks = [t for t in tokens if t[0] not in COMMENT_KINDS]
        self.source = source

    def __len__(self):
        return len(self.toks)

    def kind(self, i):
        return self.toks[i][0]

    def text(self, i):
        t = self.toks[i]
        return self.source[t[1] : t[2]]

    def punct(self, i):
        return self.text(i) if 0 <= i < len(self.toks) and self.toks[i][0] == PUNCT else ""

    def word(self, i):
        return self.text(i) if 0 <= i < len(self.toks) and self.toks[i][0] == WORD else ""


def _skip_generic_group(v: _TokView, i: int) -> int:
    """Return index after a balanced <...> group starting at i, or i if none."""
    if v.punct(i) != "<":
        return i
    depth = 0
    j = i
    prev_amp = False
    while j < len(v):
        p = v.punct(j)
        if p == "<":
            depth += 1
        elif p == ">":
            depth -= 1
            if depth == 0:
                return j + 1
        elif p in (",", ".", "?", "[", "]"):
            pass
        elif p == "&":
            if prev_amp:
                return i  # "&&" is boolean, not an intersection bound
        elif v.kind(j) == WORD:
            w = v.word(j)
            if w in RESERVED and w not in ("extends", "super") and w not in _PRIMITIVES:
                return i
        else:
            return i
        prev_amp = p == "&"
        j += 1
    return i


def _has_invocation(v: _TokView) -> bool:
    """True when the tokens contain an identifier(...) style invocation."""
    for i in range(len(v)):
        if v.kind(i) != WORD:
            continue
        w = v.text(i)
        if w in RESERVED or w[0].isdigit():
            continue
        if v.punct(i - 1) == "@":
            continue  # annotation, not a call
        j = i + 1
        if v.punct(j) == "<":
            j = _skip_generic_group(v, j)
            if j == i + 1:
                continue
        if v.punct(j) == "(":
            return True
    return False


def _skip_annotations_and_modifiers(v: _TokView, i: int) -> int:
    while i < len(v):
        if v.punct(i) == "@" and v.word(i + 1):
            i += 2
            if v.punct(i) == "(":
                depth = 0
                while i < len(v):
                    p = v.punct(i)
                    if p == "(":
                        depth += 1
                    elif p == ")":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
        elif v.word(i) in _MODIFIERS:
            i += 1
        else:
            break
    return i


def _skip_type(v: _TokView, i: int) -> int:
    """Return index after a type reference starting at i, or i if none."""
    w = v.word(i)
    if not w or (w in RESERVED and w not in _PRIMITIVES):
        return i
    j = i + 1
    while v.punct(j) == "." and v.word(j + 1):
        if v.word(j + 1) in RESERVED:
            break
        j += 2
    j2 = _skip_generic_group(v, j)
    if j2 != j:
        j = j2
    while v.punct(j) == "[" and v.punct(j + 1) == "]":
        j += 2
    return j


def _is_declaration(v: _TokView, i: int) -> bool:
    i = _skip_annotations_and_modifiers(v, i)
    j = _skip_type(v, i)
    if j == i:
        return False
    name = v.word(j)
    if not name or name in RESERVED:
        return False
    nxt = v.punct(j + 1)
    return nxt in ("=", ";", ",", "[")


def _is_signature(v: _TokView, i: int) -> bool:
    """Modifiers/annotations, type, name, (params), ... ending in '{'."""
    if v.punct(len(v) - 1) != "{":
        return False
    i = _skip_annotations_and_modifiers(v, i)
    i2 = _skip_generic_group(v, i)  # generic methods: <T> T f(...)
    if i2 != i:
        i = i2
    j = _skip_type(v, i)
    if j == i:
        return False
    name = v.word(j)
    if not name or name in RESERVED:
        return False
    if v.punct(j + 1) != "(":
        return False
    depth = 0
    k = j + 1
    while k < len(v):
        p = v.punct(k)
        if p == "(":
            depth += 1
        elif p == ")":
            depth -= 1
            if depth == 0:
                break
        k += 1
    if depth != 0:
        return False
    # whatever trails (throws clause) must not contain "=" before the "{"
    for m in range(k + 1, len(v) - 1):
        if v.punct(m) == "=":
            return False
    return True


def _categorize_tokens(v: _TokView, funccall_precedence: bool, force_signature: bool) -> str:
    if len(v) == 0:
        return StatementCategory.OTHER
    i = 0
    # labeled statement: skip "name :" prefix (but not "::")
    if (
        v.kind(0) == WORD
        and v.word(0) not in RESERVED
        and v.punct(1) == ":"
        and v.punct(2) != ":"
        and len(v) > 2
    ):
        i = 2
    w = v.word(i)
    if w in _KEYWORD_STMTS:
        return _KEYWORD_STMTS[w]
    if w in _LABEL_HEADS:
        return _HEAD_CATEGORY[w]
    if w in _BARE_HEADS:
        return _HEAD_CATEGORY[w]
    if w in _PAREN_HEADS:
        j = i + 1
        if w == "else" and v.word(j) == "if":
            j += 1
        if v.punct(j) == "(":
            return _HEAD_CATEGORY[w]
        # keyword without "(" is a modifier (e.g. "synchronized void f() {")
    if force_signature:
        return StatementCategory.FUNCTION_SIG
    if _is_signature(v, i):
        return StatementCategory.FUNCTION_SIG
    if funccall_precedence and _has_invocation(v):
        return StatementCategory.FUNC_CALL
    if _is_declaration(v, i):
        return StatementCategory.DECL_STMT
    if any(v.kind(k) == WORD for k in range(i, len(v))):
        return StatementCategory.EXPR_STMT
    return StatementCategory.OTHER


def categorize(text: str, funccall_precedence: bool = True, is_signature: bool = False) -> str:
    """Classify one statement's text; unrecognized shapes become ``other``."""
    tokens, err = scan(text)
    if err:
        return StatementCategory.OTHER
    return _categorize_tokens(_TokView(text, tokens), funccall_precedence, is_signature)


def extract(sample_id: str, source: str) -> MethodCode:
    """Segment and categorize a method in both func_call-precedence modes."""
    try:
        statements = segment(source)
    except UnbalancedSource as exc:
        raise UnbalancedSource(str(exc), exc.line, sample_id=sample_id) from None
    except EmptySource as exc:
        raise EmptySource(str(exc), sample_id=sample_id) from None
    out = []
    for st in statements:
        force = st.index == 0
        on = categorize(st.text, funccall_precedence=True, is_signature=force)
        off = categorize(st.text, funccall_precedence=False, is_signature=force)
        out.append(replace(st, category=on, category_no_call=off))
    return MethodCode(sample_id=sample_id, source=source, statements=tuple(out))


def write_statements_jsonl(methods: Iterable[MethodCode], fp: IO[str]) -> int:
    """One JSON object per statement; returns the number of lines written."""
    count = 0
    for mc in methods:
        for st in mc.statements:
            obj = {"sample_id": mc.sample_id}
            obj.update(st.to_json_obj())
            fp.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count
