"""Decompose raw generated reviews into structured parts.

Parsing never fails: whatever cannot be located is simply absent, and
absence is itself the signal the format penalty consumes.  All functions
are pure and deterministic.
"""

from __future__ import annotations

import re

from .errors import InvalidInputError
from .types import REVIEW_SECTIONS, ParsedReview

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"

# Markdown section markers need at least two '#' characters; any heading
# (including single-'#') terminates the preceding section's body.
_SECTION_HEADING = re.compile(
    r"^[ \t]{0,3}#{2,}\s*(?P<name>summary|strengths|weaknesses|rating)\b(?P<rest>[^\n]*)$",
    re.IGNORECASE | re.MULTILINE,
)
# "#1 flaw: ..." at line start is prose, not a heading; require either a
# space after the hashes or at least two hashes.
_ANY_HEADING = re.compile(r"^[ \t]{0,3}(?:#{1,6}[ \t]|#{2,6}\S)", re.MULTILINE)

_BULLET = re.compile(r"^\s*[-*]\s+")
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")


def _first_think_block(text: str) -> tuple[str | None, str]:
    """Return (content of the first matched think pair, text with it removed).

    Only the first matched open/close pair counts; stray delimiters later in
    the text are left in place as ordinary body text.
    """
    start = text.find(THINK_OPEN)
    if start < 0:
        return None, text
    end = text.find(THINK_CLOSE, start + len(THINK_OPEN))
    if end < 0:
        return None, text
    content = text[start + len(THINK_OPEN) : end]
    remainder = text[:start] + text[end + len(THINK_CLOSE) :]
    return content, remainder


def _section_bodies(text: str) -> dict[str, str]:
    """Map each recognized section name to the body of its first heading."""
    bodies: dict[str, str] = {}
    for match in _SECTION_HEADING.finditer(text):
        name = match.group("name").lower()
        if name in bodies:
            continue
        rest = match.group("rest").lstrip(" \t:").strip()
        tail = text[match.end() :]
        next_heading = _ANY_HEADING.search(tail)
        body = tail[: next_heading.start()] if next_heading else tail
        bodies[name] = (rest + "\n" + body).strip() if rest else body.strip()
    return bodies


def _split_bullets(body: str) -> tuple[str, ...]:
    """Split a section body on leading '-'/'*' bullet markers.

    Continuation lines attach to the current bullet.  A body without any
    bullet markers is kept as a single item.
    """
    items: list[str] = []
    current: list[str] = []
    for line in body.splitlines():
        if _BULLET.match(line):
            if current:
                items.append(" ".join(current).strip())
            current = [_BULLET.sub("", line).strip()]
        elif current:
            if line.strip():
                current.append(line.strip())
        elif line.strip():
            current = [line.strip()]
    if current:
        items.append(" ".join(current).strip())
    return tuple(item for item in items if item)


def extract_rating(text: str) -> float | None:
    """Pull the predicted rating out of a review's Rating section.

    Takes the first numeric token after the first Rating heading (models
    often append scale legends, so later numbers are ignored) and clamps it
    into [1, 10].  Returns None when there is no Rating heading or no
    numeric token in its section.
    """
    bodies = _section_bodies(text)
    body = bodies.get("rating")
    if body is None:
        return None
    match = _NUMBER.search(body)
    if match is None:
        return None
    value = float(match.group(0))
    return min(10.0, max(1.0, value))


def parse_review(text: str, *, empty_section_is_missing: bool = True) -> ParsedReview:
    """Parse a raw generated review into its structural parts.

    The first matched ``<think>``/``</think>`` pair becomes ``thinking`` and
    is excised before section headings are located, so headings inside the
    reasoning trace never count as review sections.  With the default
    ``empty_section_is_missing`` policy, a heading whose body is blank is
    treated the same as a missing heading.
    """
    if not text:
        raise InvalidInputError("review text must be non-empty")

    thinking, remainder = _first_think_block(text)
    if thinking is not None:
        thinking = thinking.strip()
        if not thinking and empty_section_is_missing:
            thinking = None

    bodies = _section_bodies(remainder)

    summary = bodies.get("summary")
    if summary is not None and not summary and empty_section_is_missing:
        summary = None

    strengths: tuple[str, ...] | None = None
    if "strengths" in bodies:
        strengths = _split_bullets(bodies["strengths"])
        if not strengths and empty_section_is_missing:
            strengths = None

    weaknesses: tuple[str, ...] | None = None
    if "weaknesses" in bodies:
        weaknesses = _split_bullets(bodies["weaknesses"])
        if not weaknesses and empty_section_is_missing:
            weaknesses = None

    return ParsedReview(
        raw=text,
        thinking=thinking,
        summary=summary,
        strengths=strengths,
        weaknesses=weaknesses,
        rating=extract_rating(remainder),
    )


def missing_sections(parsed: ParsedReview) -> set[str]:
    """Labels of the required structural elements absent from a review.

    Rating absence is deliberately not included: the format penalty covers
    exactly the four structural elements, and a missing rating is punished
    through the consistency term instead.
    """
    missing = set()
    if parsed.thinking is None:
        missing.add("thinking")
    if parsed.summary is None:
        missing.add("summary")
    if parsed.strengths is None:
        missing.add("strengths")
    if parsed.weaknesses is None:
        missing.add("weaknesses")
    assert missing <= set(REVIEW_SECTIONS)
    return missing
