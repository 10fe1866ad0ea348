"""Deterministic persona pools for reskinning seeded documents.

Values come from fixed in-package pools mixed across two locales
(US-weighted by default) and a seeded random.Random, so the same
(seed, doc_id) always reskins identically. Numeric draws deliberately
avoid the 900000-900999 band reserved for numeric placeholders.
"""

import hashlib
import random
import re
from dataclasses import dataclass
from typing import Protocol

CATEGORY_ORDER = (
    "email", "phone", "zip", "state", "city",
    "monetary", "date", "address", "name", "other",
)

# whole-token keyword table, checked in CATEGORY_ORDER priority so
# "city_state_zip" lands on zip and "daytime_phone" on phone
_KEYWORDS: dict[str, frozenset[str]] = {
    "email": frozenset({"email", "mail"}),
    "phone": frozenset({"phone", "telephone", "tel", "fax", "mobile", "cell"}),
    "zip": frozenset({"zip", "zipcode", "postal", "postcode"}),
    "state": frozenset({"state", "province"}),
    "city": frozenset({"city", "town"}),
    "monetary": frozenset({
        "amount", "fee", "salary", "price", "cost", "total",
        "payment", "rent", "wage", "income",
    }),
    "date": frozenset({"date", "dob", "deadline", "expiration", "expiry"}),
    "address": frozenset({"address", "street", "addr", "residence"}),
    "name": frozenset({"name", "applicant", "employer", "signature"}),
}

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def infer_semantic_category(field_name: str) -> str:
    """Classify a field name into a value category by whole-token keywords."""
    lowered = field_name.lower()
    tokens = set(_TOKEN_RE.findall(lowered))
    for category in CATEGORY_ORDER[:-1]:
        if tokens & _KEYWORDS[category]:
            return category
        if category == "monetary" and "$" in field_name:
            return category
    return "other"


class TextGenerator(Protocol):
    """Optional plug-in for free-text values (e.g. an LLM paraphraser)."""

    def generate(self, category: str, max_chars: int | None, rng: random.Random) -> str:
        ...


@dataclass(frozen=True)
class ValueConstraints:
    schema_type: str = "string"          # "string" or "number"
    max_visual_chars: int | None = None  # widget capacity, None = unbounded
    choices: tuple[str, ...] | None = None


_POOLS = {
    "en_US": {
        "first": ["James", "Maria", "Robert", "Linda", "Joseph", "Garima",
                  "Karen", "David", "Sandra", "Miguel", "Anita", "Thomas",
                  "Rachel", "Kevin", "Diane", "Marcus"],
        "last": ["Smith", "Garcia", "Knox", "Parker", "Davis", "Jones",
                 "Miller", "Nguyen", "Brown", "Wilson", "Lopez", "Clark",
                 "Hughes", "Ortega", "Bennett", "Frazier"],
        "street": ["Anita Plaza", "Davis Tunnel", "Maple Avenue", "Oak Street",
                   "Cedar Lane", "Pine Court", "Summit Drive", "Harbor Road",
                   "Willow Way", "Sunset Boulevard", "Ridge Terrace",
                   "Meadow Crossing"],
        "unit": ["Suite", "Apt", "Unit"],
        "city": ["Jasmineberg", "Karenview", "Springfield", "Lakewood",
                 "Fairmont", "Riverton", "Greenville", "Oakdale",
                 "Bristol", "Madison", "Ashford", "Clayton"],
        "state_abbr": ["TX", "NJ", "CA", "CO", "OH", "FL", "WA", "GA",
                       "IL", "PA", "NC", "AZ"],
        "state_full": ["California", "Texas", "Ohio", "Colorado", "Georgia",
                       "Florida", "Washington", "Illinois"],
        "domain": ["example.com", "mailhost.net", "postbox.org"],
    },
    "en_GB": {
        "first": ["Oliver", "Amelia", "Harry", "Isla", "George", "Freya",
                  "Arthur", "Poppy"],
        "last": ["Taylor", "Walsh", "Hargreaves", "Whitfield", "Osborne",
                 "Pemberton", "Sutcliffe", "Ainsworth"],
        "street": ["Victoria Road", "Church Lane", "Station Road",
                   "Mill Close", "Kings Court", "Albert Terrace"],
        "unit": ["Flat", "Unit"],
        "city": ["Ashbourne", "Weymouth", "Kendal", "Harrogate",
                 "Ilfracombe", "Malton"],
        "state_abbr": ["KENT", "ESSEX", "YORK", "DEVON"],
        "state_full": ["Kent", "Essex", "Yorkshire", "Devon"],
        "domain": ["example.co.uk", "postbox.uk"],
    },
}

DEFAULT_LOCALE_WEIGHTS = {"en_US": 0.85, "en_GB": 0.15}

_PHRASES = [
    "No smoking, no pets allowed",
    "Subject to annual review",
    "Approved pending inspection",
    "See attached rider for details",
    "Renewal required every two years",
    "Not valid without official seal",
    "All utilities included",
    "References available on request",
    "Deposit refundable at term end",
    "Service interruption must be reported",
    "Quiet hours after ten",
    "Keys returned to front office",
    "Parking by permit only",
    "Inspection scheduled quarterly",
    "Maintenance requests in writing",
    "Occupancy limited to four",
]


def derive_rng(seed: int, *parts: str) -> random.Random:
    """A random.Random keyed by (seed, *parts) via sha256, stable across runs."""
    digest = hashlib.sha256(
        ("|".join([str(seed), *parts])).encode("utf-8")
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _pick_locale(rng: random.Random, weights: dict[str, float] | None) -> str:
    weights = weights or DEFAULT_LOCALE_WEIGHTS
    names = sorted(weights)
    total = sum(weights[n] for n in names)
    roll = rng.random() * total
    acc = 0.0
    for name in names:
        acc += weights[name]
        if roll < acc:
            return name
    return names[-1]


def format_number(value: int | float) -> str:
    """Canonical textual form: ints plain, floats shortest round-trip."""
    if isinstance(value, int):
        return str(value)
    if value == int(value):
        return str(int(value))
    return repr(value)


def _safe_int(rng: random.Random, lo: int, hi: int) -> int:
    """randint that never lands inside the numeric-placeholder band."""
    value = rng.randint(lo, hi)
    while 900000 <= value <= 900999:
        value = rng.randint(lo, hi)
    return value


def _gen_name(rng: random.Random, pool: dict) -> str:
    first = rng.choice(pool["first"])
    last = rng.choice(pool["last"])
    style = rng.random()
    if style < 0.5:
        return f"{first} {last}"
    middle = chr(ord("A") + rng.randrange(26))
    if style < 0.8:
        return f"{first} {middle}. {last}"
    return f"{last}, {first} {middle}."


def _gen_address(rng: random.Random, pool: dict) -> str:
    number = rng.randint(10, 99999)
    base = f"{number} {rng.choice(pool['street'])}"
    if rng.random() < 0.35:
        base += f" {rng.choice(pool['unit'])} {rng.randint(1, 999)}"
    return base


def _gen_phone(rng: random.Random) -> str:
    return f"({rng.randint(200, 989)}) {rng.randint(100, 989)}-{rng.randint(1000, 9999)}"


def _gen_date(rng: random.Random) -> str:
    year = rng.randint(1995, 2032)
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    return f"{month:02d}/{day:02d}/{year}"


def _gen_monetary_text(rng: random.Random) -> str:
    amount = _safe_int(rng, 100, 899999)
    if rng.random() < 0.5:
        return f"${amount:,}"
    return f"${amount:,}.{rng.randint(0, 99):02d}"


def _gen_string(category: str, rng: random.Random, pool: dict,
                text_client: TextGenerator | None,
                max_chars: int | None) -> str:
    if category == "name":
        return _gen_name(rng, pool)
    if category == "address":
        return _gen_address(rng, pool)
    if category == "city":
        return rng.choice(pool["city"])
    if category == "state":
        # short widgets want the abbreviation; roomy ones mix both forms
        if max_chars is not None and max_chars <= 4:
            return rng.choice(pool["state_abbr"])
        return rng.choice(pool["state_abbr"] + pool["state_full"])
    if category == "zip":
        return f"{rng.randint(10000, 99999)}"
    if category == "phone":
        return _gen_phone(rng)
    if category == "email":
        first = rng.choice(pool["first"]).lower()
        last = rng.choice(pool["last"]).lower()
        return f"{first[0]}{last}@{rng.choice(pool['domain'])}"
    if category == "date":
        return _gen_date(rng)
    if category == "monetary":
        return _gen_monetary_text(rng)
    if text_client is not None:
        return text_client.generate(category, max_chars, rng)
    return rng.choice(_PHRASES)


def _gen_number(category: str, rng: random.Random) -> int | float:
    if category == "monetary":
        value = _safe_int(rng, 100, 899999)
        if rng.random() < 0.3:
            return value + rng.randint(1, 99) / 100
        return value
    if category == "zip":
        return rng.randint(10000, 99999)
    if category == "phone":
        return rng.randint(2000000, 9899999)
    return _safe_int(rng, 1, 89999)


def _truncate_number(value: int | float, limit: int) -> int | float:
    text = format_number(value)[:limit].rstrip(".")
    if text in ("", "-"):
        return 0
    if "." in text:
        return float(text)
    return int(text)


REGENERATION_ATTEMPTS = 8


def generate_value(
    category: str,
    constraints: ValueConstraints,
    rng: random.Random,
    text_client: TextGenerator | None = None,
    locale_weights: dict[str, float] | None = None,
) -> str | int | float:
    """Draw a value for a field.

    Honors choice lists first; otherwise draws per category, re-drawing up
    to 8 times when the rendered text exceeds max_visual_chars and finally
    truncating to the visible prefix (numbers are reparsed so the trimmed
    value keeps its type).
    """
    if constraints.choices is not None:
        if not constraints.choices:
            raise ValueError("choice field with an empty choice list")
        return rng.choice(list(constraints.choices))
    limit = constraints.max_visual_chars
    if limit is not None and limit < 1:
        raise ValueError(f"max_visual_chars must be >= 1, got {limit}")
    pool = _POOLS[_pick_locale(rng, locale_weights)]
    numeric = constraints.schema_type == "number"
    value: str | int | float = 0
    for _ in range(REGENERATION_ATTEMPTS):
        if numeric:
            value = _gen_number(category, rng)
        else:
            value = _gen_string(category, rng, pool, text_client, limit)
        if limit is None or len(_render(value)) <= limit:
            return value
    if numeric:
        return _truncate_number(value, limit)
    return _render(value)[:limit]


def _render(value: str | int | float) -> str:
    if isinstance(value, str):
        return value
    return format_number(value)


def render_value(value: str | int | float) -> str:
    """The exact text painted into a widget for a generated value."""
    return _render(value)
