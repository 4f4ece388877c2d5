"""Phone-prefix → country resolution and flag emoji rendering."""

from __future__ import annotations

# Calling code → ISO 3166-1 alpha-2. Longest-prefix match; covers the
# deployment regions plus common codes. Extend as needed.
CALLING_CODES: dict[str, str] = {
    "1": "US",
    "20": "EG",
    "27": "ZA",
    "33": "FR",
    "34": "ES",
    "39": "IT",
    "44": "GB",
    "49": "DE",
    "52": "MX",
    "55": "BR",
    "61": "AU",
    "62": "ID",
    "63": "PH",
    "64": "NZ",
    "81": "JP",
    "86": "CN",
    "90": "TR",
    "91": "IN",
    "92": "PK",
    "93": "AF",
    "94": "LK",
    "880": "BD",
    "212": "MA",
    "234": "NG",
    "249": "SD",
    "254": "KE",
    "255": "TZ",
    "256": "UG",
    "966": "SA",
    "971": "AE",
    "977": "NP",
}

_MAX_PREFIX_LEN = max(len(p) for p in CALLING_CODES)

UNKNOWN_COUNTRY = "ZZ"


def digits_of(address: str) -> str:
    """Digits of a user address, ignoring '+' and separators."""
    return "".join(ch for ch in address if ch.isdigit())


def country_of(address: str) -> str:
    """ISO country code for a phone-number address, UNKNOWN_COUNTRY if unresolvable."""
    number = digits_of(address)
    if not number:
        return UNKNOWN_COUNTRY
    for width in range(min(_MAX_PREFIX_LEN, len(number)), 0, -1):
        code = CALLING_CODES.get(number[:width])
        if code:
            return code
    return UNKNOWN_COUNTRY


def calling_code_of(address: str) -> str:
    """Country calling code prefix of an address ('' when unknown)."""
    number = digits_of(address)
    for width in range(min(_MAX_PREFIX_LEN, len(number)), 0, -1):
        if CALLING_CODES.get(number[:width]):
            return number[:width]
    return number[:1]


def flag(iso_code: str) -> str:
    """Regional-indicator flag emoji for a two-letter ISO code."""
    if len(iso_code) != 2 or not iso_code.isalpha() or iso_code == UNKNOWN_COUNTRY:
        return "\U0001F3F3️"  # white flag for unknown origins
    return "".join(chr(0x1F1E6 + ord(c) - ord("A")) for c in iso_code.upper())
