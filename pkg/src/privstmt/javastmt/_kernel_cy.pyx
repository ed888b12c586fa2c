# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled scanning kernel.

Mirrors ``_kernel_py.py`` exactly; both must emit identical token streams
for identical input. Keep the two files in sync when changing either.
"""

WORD = 1
STRING = 2
CHAR = 3
PUNCT = 4
LINE_COMMENT = 5
BLOCK_COMMENT = 6


cdef inline bint _is_word_char(Py_UCS4 c):
    if c == u"_" or c == u"$":
        return True
    return c.isalnum()


cdef inline bint _is_ws(Py_UCS4 c):
    return c == u" " or c == u"\t" or c == u"\r" or c == u"\f" or c == u"\v"


def scan(str source):
    """Tokenize Java-ish source. Same contract as the pure kernel."""
    cdef list tokens = []
    cdef Py_ssize_t n = len(source)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t start
    cdef int line = 1
    cdef int start_line
    cdef Py_UCS4 c, d, quote
    cdef bint closed
    cdef int kind
    while i < n:
        c = source[i]
        if c == u"\n":
            line += 1
            i += 1
            continue
        if _is_ws(c):
            i += 1
            continue
        start = i
        start_line = line
        if c == u"/" and i + 1 < n and source[i + 1] == u"/":
            i += 2
            while i < n and source[i] != u"\n":
                i += 1
            tokens.append((LINE_COMMENT, start, i, start_line))
            continue
        if c == u"/" and i + 1 < n and source[i + 1] == u"*":
            i += 2
            closed = False
            while i < n:
                if source[i] == u"\n":
                    line += 1
                    i += 1
                elif source[i] == u"*" and i + 1 < n and source[i + 1] == u"/":
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
        if c == u'"' or c == u"'":
            quote = c
            i += 1
            closed = False
            while i < n:
                d = source[i]
                if d == u"\\" and i + 1 < n:
                    i += 2
                elif d == u"\n":
                    break
                elif d == quote:
                    i += 1
                    closed = True
                    break
                else:
                    i += 1
            kind = STRING if quote == u'"' else CHAR
            tokens.append((kind, start, i, start_line))
            if not closed:
                return tokens, start_line
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
