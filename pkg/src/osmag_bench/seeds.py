"""Deterministic seed derivation for independent generator streams."""

import hashlib


def derive_seed(master: int, *parts: object) -> int:
    """Stable 63-bit sub-seed for (master, parts).

    Uses sha256 rather than hash() so results never depend on interpreter
    version or PYTHONHASHSEED; parallel and serial generation then draw
    from identical per-instance streams.
    """
    text = ":".join([str(master), *(str(p) for p in parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
