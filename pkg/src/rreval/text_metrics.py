"""Transcript folding and normalized edit distance."""
from __future__ import annotations

_FULLWIDTH_FIRST = 0xFF01
_FULLWIDTH_LAST = 0xFF5E
_WIDTH_OFFSET = 0xFEE0
_IDEOGRAPHIC_SPACE = 0x3000

_FOLD_TABLE = {cp: cp - _WIDTH_OFFSET for cp in range(_FULLWIDTH_FIRST, _FULLWIDTH_LAST + 1)}
_FOLD_TABLE[_IDEOGRAPHIC_SPACE] = 0x20
# case folding applies after width folding, so fold Ａ straight to a
for _cp, _half in list(_FOLD_TABLE.items()):
    if 0x41 <= _half <= 0x5A:
        _FOLD_TABLE[_cp] = _half + 0x20
for _cp in range(0x41, 0x5B):
    _FOLD_TABLE[_cp] = _cp + 0x20
del _cp, _half


def normalize(text: str) -> str:
    """Fold full-width ASCII variants to half width and ASCII letters to lower case.

    U+FF01..U+FF5E map to U+0021..U+007E, U+3000 maps to a plain space, and
    A-Z map to a-z. Everything else, including non-ASCII letters, is left as
    is. Whitespace is not stripped.

    >>> normalize("ABC１２３")
    'abc123'
    """
    return text.translate(_FOLD_TABLE)


def levenshtein(a: str, b: str) -> int:
    """Edit distance over code points (insert, delete, substitute, all cost 1)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def norm_edit_distance(pred: str, gt: str) -> float:
    """Levenshtein distance of the folded strings divided by the longer length.

    Two empty strings are at distance 0.
    """
    p = normalize(pred)
    g = normalize(gt)
    longest = max(len(p), len(g))
    if longest == 0:
        return 0.0
    return levenshtein(p, g) / longest
