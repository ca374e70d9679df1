"""Canonical JSON encoding shared by the CLI and the HTTP service.

Both surfaces must emit byte-identical payloads for identical logical
requests, so every externally visible document is serialized here: sorted
keys, minimal separators, no NaN/Infinity, UTF-8, trailing newline.
"""

from __future__ import annotations

import json

#: Version stamp carried by every exported document.
FORMAT_VERSION = 1


def canonical(doc) -> str:
    body = dict(doc)
    body.setdefault("v", FORMAT_VERSION)
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def canonical_bytes(doc) -> bytes:
    return canonical(doc).encode("utf-8")
