"""Rule-text parsing: sentence splitting, bullet detection, and clause-level
segmentation of plain sentences into elementary discourse units.

The segmenter is deterministic and lexicon-driven. It stands behind the same
interface a trainable boundary classifier would use, so one can be swapped in
later without touching callers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

SUBORDINATORS = {
    "if", "unless", "when", "whenever", "while", "before", "after",
    "because", "although", "though", "since",
}
RELATIVE_PRONOUNS = {"who", "whom", "whose", "which", "that"}
COORDINATORS = {"and", "but", "or", "nor", "yet", "so"}
# Words that signal a clause follows a comma+coordinator (keeps plain lists whole).
CLAUSE_OPENERS = SUBORDINATORS | {
    "you", "your", "they", "their", "we", "he", "she", "it", "i", "there",
    "either", "at", "one", "all", "any",
}

MONTHS = {
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
}

ABBREVIATIONS = {
    "e.g", "i.e", "etc", "inc", "ltd", "co", "corp", "mr", "mrs", "ms", "dr",
    "prof", "sr", "jr", "st", "no", "vs", "approx", "dept", "min", "max",
    "u.s", "u.k", "sec", "fig", "para",
}

BULLET_RE = re.compile(r"^(\s*)([-*•]|\d{1,2}[.)]|[a-z][.)])\s+")


@dataclass(frozen=True)
class Condition:
    text: str
    char_start: int
    char_end: int
    sentence_index: int
    kind: str  # "bullet" | "clause"


@dataclass
class RuleDocument:
    raw_text: str
    sentences: list[tuple[int, int]]
    bullet_items: list[tuple[int, int]]


def _is_bullet_line(line: str) -> bool:
    return BULLET_RE.match(line) is not None


def _word_spans(text: str) -> list[tuple[int, int]]:
    return [(m.start(), m.end()) for m in re.finditer(r"\S+", text)]


def _bare(word: str) -> str:
    return word.strip(".,;:!?()[]\"'").lower()


def _is_abbreviation(text: str, dot: int) -> bool:
    """True when the period at `dot` terminates a known abbreviation or initial."""
    start = dot
    while start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
        start -= 1
    token = text[start:dot].lower()
    if not token:
        return False
    if token in ABBREVIATIONS or token.rstrip(".") in ABBREVIATIONS:
        return True
    return len(token.rstrip(".")) == 1 and token.rstrip(".").isalpha()


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Split into ordered, non-overlapping sentence spans.

    Bullet lines are spans of their own; other text splits at sentence-final
    punctuation, with guards for abbreviations, initials, and decimals.
    Text without terminal punctuation becomes a single span.
    """
    if not text or not text.strip():
        raise ValueError("cannot split an empty text")
    lines: list[tuple[str, int, int]] = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.rstrip("\n")
        kind = "bullet" if _is_bullet_line(stripped) else "text"
        lines.append((kind, offset, offset + len(stripped)))
        offset += len(line)

    # merge consecutive non-bullet lines into blocks, keep bullet lines atomic
    blocks: list[tuple[str, int, int]] = []
    for kind, start, end in lines:
        if kind == "text" and blocks and blocks[-1][0] == "text":
            blocks[-1] = ("text", blocks[-1][1], end)
        else:
            blocks.append((kind, start, end))

    out: list[tuple[int, int]] = []
    for kind, start, end in blocks:
        segment = text[start:end]
        if not segment.strip():
            continue
        if kind == "bullet":
            out.append(_trimmed_span(text, start, end))
            continue
        out.extend(_split_block(text, start, end))
    return out


def _split_block(text: str, start: int, end: int) -> list[tuple[int, int]]:
    boundaries: list[int] = []
    i = start
    while i < end:
        ch = text[i]
        if ch in ".!?":
            j = i + 1
            while j < end and text[j] in ")\"']":
                j += 1
            next_non_space = j
            while next_non_space < end and text[next_non_space] in " \t":
                next_non_space += 1
            at_block_end = next_non_space >= end
            followed_by_break = next_non_space < end and text[next_non_space] == "\n"
            starts_new = next_non_space < end and (
                text[next_non_space].isupper() or text[next_non_space].isdigit()
                or text[next_non_space] in "\"'(" )
            if ch == "." and i + 1 < end and text[i + 1].isdigit():
                i += 1
                continue  # decimal point
            if ch == "." and _is_abbreviation(text, i):
                i += 1
                continue
            if j < end and text[j] not in " \t\n":
                i += 1
                continue  # punctuation glued to more text
            if at_block_end or followed_by_break or starts_new:
                boundaries.append(j)
        i += 1
    pieces = []
    prev = start
    for b in boundaries:
        pieces.append((prev, b))
        prev = b
    if prev < end:
        pieces.append((prev, end))
    trimmed = [_trimmed_span(text, s, e) for s, e in pieces]
    return [(s, e) for s, e in trimmed if s < e]


def _trimmed_span(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def detect_bullets(text: str) -> list[tuple[int, int]]:
    """Spans of bullet item bodies (marker stripped), in document order."""
    items: list[tuple[int, int]] = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.rstrip("\n")
        m = BULLET_RE.match(stripped)
        if m:
            body_start = offset + m.end()
            body_end = offset + len(stripped)
            while body_end > body_start and text[body_end - 1].isspace():
                body_end -= 1
            if body_end > body_start:
                items.append((body_start, body_end))
        offset += len(line)
    return items


def _prepositional_use(sentence: str, words: list[tuple[int, int]], i: int) -> bool:
    """before/after/since followed by a date or number act as prepositions."""
    word = _bare(sentence[words[i][0]:words[i][1]])
    if word not in ("before", "after", "since"):
        return False
    if i + 1 >= len(words):
        return True  # sentence-final, nothing clausal follows
    nxt = _bare(sentence[words[i + 1][0]:words[i + 1][1]])
    return nxt[:1].isdigit() or nxt in MONTHS


def segment_edus(sentence: str) -> list[tuple[int, int]]:
    """Split one sentence into clause-like spans (offsets into `sentence`).

    Boundaries open before mid-sentence subordinators, before relative
    pronouns preceded by a comma, and after a comma/semicolon followed by a
    coordinating connective that introduces a clause; a fronted subordinate
    clause is closed at the comma that ends it. Units shorter than 2 tokens
    merge into their left neighbour.
    """
    if not sentence.strip():
        raise ValueError("cannot segment an empty sentence")
    words = _word_spans(sentence)
    if not words:
        raise ValueError("cannot segment an empty sentence")

    boundaries: set[int] = set()  # word indices that begin a new unit
    unit_start = 0
    for i in range(1, len(words)):
        prev_bare = _bare(sentence[words[i - 1][0]:words[i - 1][1]])
        prev_raw = sentence[words[i - 1][0]:words[i - 1][1]]
        word = _bare(sentence[words[i][0]:words[i][1]])
        after_comma = prev_raw.endswith(",") or prev_raw.endswith(";")
        boundary_at = -1
        if word in SUBORDINATORS and not _prepositional_use(sentence, words, i):
            # a coordinator directly before the subordinator leads its clause
            boundary_at = i - 1 if (prev_bare in COORDINATORS and i - 1 > 0) else i
        elif after_comma and word in RELATIVE_PRONOUNS:
            boundary_at = i
        elif after_comma and word in COORDINATORS:
            nxt = _bare(sentence[words[i + 1][0]:words[i + 1][1]]) if i + 1 < len(words) else ""
            if nxt in CLAUSE_OPENERS:
                boundary_at = i
        elif after_comma:
            opener = _bare(sentence[words[unit_start][0]:words[unit_start][1]])
            if opener in SUBORDINATORS or opener in RELATIVE_PRONOUNS:
                boundary_at = i  # comma closes the open subordinate/relative clause
        if boundary_at > 0:
            boundaries.add(boundary_at)
            unit_start = boundary_at

    units: list[list[int]] = []
    current = [0]
    for i in range(1, len(words)):
        if i in boundaries:
            units.append(current)
            current = [i]
        else:
            current.append(i)
    units.append(current)

    # merge degenerate units (< 2 tokens) into the left neighbour
    merged: list[list[int]] = []
    for unit in units:
        if len(unit) < 2 and merged:
            merged[-1].extend(unit)
        else:
            merged.append(unit)
    if len(merged) > 1 and len(merged[0]) < 2:
        merged[1] = merged[0] + merged[1]
        merged = merged[1:]

    spans = []
    for unit in merged:
        first, last = unit[0], unit[-1]
        spans.append((words[first][0], words[last][1]))
    return spans


def parse_rule(text: str) -> tuple[RuleDocument, list[Condition]]:
    """Parse a rule text into bullet conditions and clause (EDU) conditions,
    in document order."""
    if not text or not text.strip():
        raise ValueError("cannot parse an empty rule text")
    sentences = split_sentences(text)
    bullets = detect_bullets(text)
    doc = RuleDocument(raw_text=text, sentences=sentences, bullet_items=bullets)

    conditions: list[Condition] = []
    for idx, (s_start, s_end) in enumerate(sentences):
        item = next((b for b in bullets if s_start <= b[0] and b[1] <= s_end), None)
        if item is not None:
            conditions.append(Condition(
                text=text[item[0]:item[1]], char_start=item[0], char_end=item[1],
                sentence_index=idx, kind="bullet",
            ))
            continue
        for e_start, e_end in segment_edus(text[s_start:s_end]):
            conditions.append(Condition(
                text=text[s_start + e_start:s_start + e_end],
                char_start=s_start + e_start, char_end=s_start + e_end,
                sentence_index=idx, kind="clause",
            ))
    return doc, conditions


def sentence_conditions(text: str) -> tuple[RuleDocument, list[Condition]]:
    """Segmentation ablation: whole sentences as conditions (no EDU splitting)."""
    if not text or not text.strip():
        raise ValueError("cannot parse an empty rule text")
    sentences = split_sentences(text)
    bullets = detect_bullets(text)
    doc = RuleDocument(raw_text=text, sentences=sentences, bullet_items=bullets)
    conditions = []
    for idx, (s_start, s_end) in enumerate(sentences):
        item = next((b for b in bullets if s_start <= b[0] and b[1] <= s_end), None)
        start, end = (item if item is not None else (s_start, s_end))
        conditions.append(Condition(
            text=text[start:end], char_start=start, char_end=end,
            sentence_index=idx, kind="bullet" if item is not None else "clause",
        ))
    return doc, conditions
