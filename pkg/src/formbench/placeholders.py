"""Deterministic placeholder grammar for the seeding pass.

Text (and choice) widgets receive TXT_001, TXT_002, ...; date widgets
receive ISO dates walking forward from 2099-01-01; numeric widgets count
up from 900001. The grammar is chosen so no legitimate generated value
can collide with it: reskinned dates stay far below 2099 and reskinned
numbers never fall inside [900000, 900999].
"""

import datetime
import re

TEXT_PREFIX = "TXT_"
DATE_EPOCH = datetime.date(2099, 1, 1)
NUMERIC_BASE = 900001
NUMERIC_CEILING = 901000  # exclusive; caps numeric widgets at 999 per document

_TEXT_RE = re.compile(r"TXT_\d{3}")
_DATE_RE = re.compile(r"\b2(?:099|10[01])-\d{2}-\d{2}\b")
_NUMERIC_RE = re.compile(r"\b900\d{3}\b")
_RESIDUE_RE = re.compile(
    "|".join(p.pattern for p in (_TEXT_RE, _DATE_RE, _NUMERIC_RE))
)


def text_placeholder(ordinal: int) -> str:
    """ordinal is 1-based: text_placeholder(1) == 'TXT_001'."""
    if not 1 <= ordinal <= 999:
        raise ValueError(f"text placeholder ordinal out of range: {ordinal}")
    return f"{TEXT_PREFIX}{ordinal:03d}"


def date_placeholder(ordinal: int) -> str:
    """ordinal is 1-based: date_placeholder(1) == '2099-01-01'."""
    if ordinal < 1:
        raise ValueError(f"date placeholder ordinal out of range: {ordinal}")
    return (DATE_EPOCH + datetime.timedelta(days=ordinal - 1)).isoformat()

def numeric_placeholder(ordinal: int) -> int:
    """ordinal is 1-based: numeric_placeholder(1) == 900001."""
    value = NUMERIC_BASE + ordinal - 1
    if not NUMERIC_BASE <= value < NUMERIC_CEILING:
        raise ValueError(f"numeric placeholder ordinal out of range: {ordinal}")
    return value


def classify_token(token: str) -> str | None:
    """Map a token back to its placeholder family.

    Returns 'text', 'date' or 'numeric' for exact placeholder tokens and
    None for anything else.
    """
    if _TEXT_RE.fullmatch(token):
        return "text"
    if re.fullmatch(r"2(?:099|10[01])-\d{2}-\d{2}", token):
        try:
            datetime.date.fromisoformat(token)
        except ValueError:
            return None
        return "date"
    if token.isdigit() and NUMERIC_BASE <= int(token) < NUMERIC_CEILING:
        return "numeric"
    return None


def find_residue(text: str) -> list[str]:
    """Return every placeholder-shaped fragment left in text."""
    return _RESIDUE_RE.findall(text)


def has_residue(text: str) -> bool:
    return _RESIDUE_RE.search(text) is not None
