"""Small shared helpers: sortable ids and canonical JSON."""

from __future__ import annotations

import json
import secrets
import threading
import time

# Crockford base32, as used by ULID
_B32 = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"

_last = {"ts": 0, "seq": 0}
_lock = threading.Lock()


def new_ulid(ts_ms: int | None = None) -> str:
    """26-char time-prefixed lexicographically sortable unique id."""
    if ts_ms is None:
        ts_ms = int(time.time() * 1000)
    with _lock:
        # keep ids generated within one process strictly increasing
        if ts_ms <= _last["ts"]:
            ts_ms = _last["ts"]
            _last["seq"] += 1
        else:
            _last["ts"] = ts_ms
            _last["seq"] = 0
        seq = _last["seq"]
    chars = []
    t = ts_ms
    for _ in range(10):
        chars.append(_B32[t & 31])
        t >>= 5
    head = "".join(reversed(chars))
    mid = "".join(_B32[(seq >> (5 * i)) & 31] for i in reversed(range(4)))
    tail = "".join(_B32[secrets.randbelow(32)] for _ in range(12))
    return head + mid + tail


def dump_json(doc) -> str:
    """Compact JSON used by both the API and the CLI's --format json so the
    two surfaces stay byte-identical."""
    return json.dumps(doc, ensure_ascii=False, allow_nan=False,
                      separators=(",", ":"))
