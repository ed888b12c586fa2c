"""Pure-Python scanning kernel.

Mirrors ``_kernel_cy.pyx`` exactly; both must emit identical token streams
for identical input. Keep the two files in sync when changing either.

A token is ``(kind, start, end, line)`` with ``source[start:end]`` the token
text and ``line`` the 1-based line of ``start``. String and char literals
never span lines (a raw newline inside one is an unterminated-literal error),
so a token's start line is also its end line.
"""

WORD = 1
STRING = 2
CHAR = 3
PUNCT = 4
LINE_COMMENT = 5
BLOCK_COMMENT = 6

_WS = " \t\r\f\v"


def _is_word_char(c: str) -> bool:
    return c.isalnum() or c == "_" or c == "$"


def scan(source):
    """Tokenize Java-ish source.

    Returns ``(tokens, error_line)`` where ``error_line`` is 0 on success or
    the 1-based line where an unterminated string/char/block-comment begins.
    On error the tokens scanned so far are still returned.
    """
    tokens = []
    n = len(source)
    i = 0
    line = 1
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in _WS:
            i += 1
            continue
        start = i
        start_line = line
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            i += 2
            while i < n and source[i] != "\n":
                i += 1
            tokens.append((LINE_COMMENT, start, i, start_line))
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "*":
            i += 2
            closed = False
            while i < n:
                if source[i] == "\n":
                    line += 1
                    i += 1
                elif source[i] == "*" and i + 1 < n and source[i + 1] == "/":
                    i += 2
                    closed = True
                    break
                else:
                    i += 1
            if not closed:
                tokens.append((BLOCK_COMMENT, start, n, start_line))
                return tokens, start_line
            tokens.append((BLOCK_COMMENT, start, i, start_line))
            continue
        if c == '"' or c == "'":
            quote = c
            i += 1
            closed = False
            while i < n:
                d = source[i]
                if d == "\\" and i + 1 < n:
                    i += 2
                elif d == "\n":
                    break
                elif d == quote:
                    i += 1
                    closed = True
                    break
                else:
                    i += 1
            kind = STRING if quote == '"' else CHAR
            if not closed:
                tokens.append((kind, start, i, start_line))
                return tokens, start_line
            tokens.append((kind, start, i, start_line))
            continue
        if _is_word_char(c):
            i += 1
            while i < n and _is_word_char(source[i]):
                i += 1
            tokens.append((WORD, start, i, start_line))
            continue
        i += 1
        tokens.append((PUNCT, start, i, start_line))
    return tokens, 0
