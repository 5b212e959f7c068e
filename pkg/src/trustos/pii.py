"""PII pattern heuristics applied to trace text inside probe workers.

Only aggregate counts ever leave this module; the scanned text itself is
never returned, logged, or persisted. TFN candidates are validated with the
digit-weighted checksum (weights 1,4,3,7,5,8,6,9,10; sum divisible by 11)
to minimize false positives, and 9-digit runs that pass the checksum are
classified as TFNs rather than phone numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

EMAIL_RE = re.compile(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b")

# Digit runs of 8-12 digits with optional +, single spaces or hyphens between
# digits; anchored so digits embedded in words (or emails) do not match.
DIGIT_RUN_RE = re.compile(r"(?<![\w.+-])\+?\d(?:[ -]?\d){7,11}(?![\w-])")

# Two adjacent capitalized alphabetic tokens, e.g. "Jane Halloway".
NAME_PAIR_RE = re.compile(r"\b[A-Z][a-z]+[ \t]+[A-Z][a-z]+\b")

TFN_WEIGHTS = (1, 4, 3, 7, 5, 8, 6, 9, 10)

_SENTENCE_END = ".!?\n"

_DATE_PIN_RE = re.compile(r"\d{4}-\d{2}-\d{2}|\d{8}")
_VERSION_PIN_RE = re.compile(r"(?:^|[-_:@.])v?\d+(?:\.\d+)*$|[-_:@]\d{4,}")


def tfn_checksum_valid(digits: str) -> bool:
    """Australian Tax File Number validity: exactly 9 digits whose weighted
    sum is divisible by 11."""
    if len(digits) != 9 or not digits.isdigit():
        return False
    total = sum(int(c) * w for c, w in zip(digits, TFN_WEIGHTS))
    return total % 11 == 0


def model_ref_is_unpinned(model_ref: str) -> bool:
    """A model reference is unpinned when it ends in "-latest" or carries no
    version/date pin at all."""
    if model_ref.endswith("-latest"):
        return True
    if _DATE_PIN_RE.search(model_ref):
        return False
    if _VERSION_PIN_RE.search(model_ref):
        return False
    return True


def _at_sentence_start(text: str, start: int) -> bool:
    i = start - 1
    while i >= 0 and text[i] in " \t":
        i -= 1
    if i < 0:
        return True
    return text[i] in _SENTENCE_END


@dataclass
class PiiCounts:
    email_count: int = 0
    tfn_count: int = 0
    phone_count: int = 0
    name_count: int = 0
    unpinned_model_refs: tuple[str, ...] = ()

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.email_count, self.tfn_count, self.phone_count,
                self.name_count)


def scan_text(text: str) -> tuple[int, int, int, int]:
    """(emails, tfns, phones, names) found in one text."""
    emails = len(EMAIL_RE.findall(text))
    tfns = phones = 0
    for m in DIGIT_RUN_RE.finditer(text):
        digits = re.sub(r"\D", "", m.group())
        if len(digits) < 8 or len(digits) > 12:
            continue
        if tfn_checksum_valid(digits):
            tfns += 1
        else:
            phones += 1
    names = 0
    for m in NAME_PAIR_RE.finditer(text):
        if not _at_sentence_start(text, m.start()):
            names += 1
    return emails, tfns, phones, names


def run_pii_heuristics(traces) -> PiiCounts:
    """Aggregate PII pattern counts over trace records drawn from projects
    without log scrubbing. Only counts and offending model refs persist."""
    totals = PiiCounts()
    unpinned: list[str] = []
    for trace in traces:
        e, t, p, n = scan_text(trace.logged_text)
        totals.email_count += e
        totals.tfn_count += t
        totals.phone_count += p
        totals.name_count += n
        ref = trace.model_ref
        if ref and model_ref_is_unpinned(ref) and ref not in unpinned:
            unpinned.append(ref)
    totals.unpinned_model_refs = tuple(unpinned)
    return totals
