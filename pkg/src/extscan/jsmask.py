"""Mask JavaScript comments and string literals so token scans cannot
match text inside them.

The masked output has the same length and line structure as the input:
every character inside a comment, quoted string, or template literal is
replaced by a space (newlines are kept so line numbers stay valid).
Template-literal interpolation holes (``${ ... }``) are live code and are
left unmasked; nested templates inside holes are handled.

Regex literals are not modeled: a pathological regex can swallow the rest
of its line (a ``//`` inside one reads as a comment), which can only hide
usage, never invent it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_NEWLINES = "\n\r"


@dataclass
class SanitizedSource:
    masked_text: str
    string_spans: list[tuple[int, int]] = field(default_factory=list)
    comment_spans: list[tuple[int, int]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def sanitize_source(js: str) -> SanitizedSource:
    out = list(js)
    string_spans: list[tuple[int, int]] = []
    comment_spans: list[tuple[int, int]] = []
    warnings: list[str] = []

    def mask(start: int, end: int) -> None:
        for k in range(start, end):
            if out[k] not in _NEWLINES:
                out[k] = " "

    n = len(js)
    i = 0
    # Each entry is one template literal we are inside of; the value is the
    # brace depth of its currently-open interpolation hole (None = no hole).
    template_stack: list[int | None] = []

    while i < n:
        ch = js[i]

        if template_stack and template_stack[-1] is not None:
            # Inside an interpolation hole: live code, but track nesting.
            if ch == "{":
                template_stack[-1] += 1
                i += 1
                continue
            if ch == "}":
                if template_stack[-1] == 0:
                    # Hole closes; the brace belongs to the template text.
                    template_stack[-1] = None
                    mask(i, i + 1)
                    string_spans.append((i, i + 1))
                    i += 1
                    continue
                template_stack[-1] -= 1
                i += 1
                continue
            # fall through: normal-code handling below also applies in holes

        elif template_stack:
            # Inside template literal text: mask until backtick or `${`.
            start = i
            while i < n:
                c = js[i]
                if c == "\\":
                    i = min(i + 2, n)
                    continue
                if c == "`":
                    i += 1
                    template_stack.pop()
                    break
                if c == "$" and i + 1 < n and js[i + 1] == "{":
                    i += 2
                    template_stack[-1] = 0
                    break
                i += 1
            else:
                warnings.append(
                    f"unterminated template literal starting near line {_line_of(js, start)}"
                )
            mask(start, i)
            string_spans.append((start, i))
            continue

        if ch == "/" and i + 1 < n and js[i + 1] == "/":
            start = i
            while i < n and js[i] not in _NEWLINES:
                i += 1
            mask(start, i)
            comment_spans.append((start, i))
            continue

        if ch == "/" and i + 1 < n and js[i + 1] == "*":
            start = i
            end = js.find("*/", i + 2)
            if end < 0:
                i = n
                warnings.append(
                    f"unterminated block comment starting at line {_line_of(js, start)}"
                )
            else:
                i = end + 2
            mask(start, i)
            comment_spans.append((start, i))
            continue

        if ch in "'\"":
            quote = ch
            start = i
            i += 1
            terminated = False
            while i < n:
                c = js[i]
                if c == "\\":
                    i = min(i + 2, n)
                    continue
                if c == quote:
                    i += 1
                    terminated = True
                    break
                if c in _NEWLINES:
                    break
                i += 1
            if not terminated:
                warnings.append(
                    f"unterminated string literal at line {_line_of(js, start)}"
                )
            mask(start, i)
            string_spans.append((start, i))
            continue

        if ch == "`":
            mask(i, i + 1)
            string_spans.append((i, i + 1))
            template_stack.append(None)
            i += 1
            continue

        i += 1

    return SanitizedSource(
        masked_text="".join(out),
        string_spans=_coalesce(string_spans),
        comment_spans=_coalesce(comment_spans),
        warnings=warnings,
    )


def _coalesce(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Merge adjacent/overlapping spans; drop empty ones."""
    merged: list[tuple[int, int]] = []
    for start, end in sorted(spans):
        if end <= start:
            continue
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(end, merged[-1][1]))
        else:
            merged.append((start, end))
    return merged
