"""Single-file, content-addressed result cache backed by sqlite.

Keys are SHA-256 digests of the object kind, the package version and the
canonical JSON of the arguments, so a new release never reads stale entries.
Only the process that owns the cache writes to it; worker processes hand their
results back to that process.
"""

from __future__ import annotations

import hashlib
import json
import os
import sqlite3
from pathlib import Path
from typing import Any, Optional

from gamma4 import __version__

CACHE_FILE = "gamma4-cache.sqlite3"


def default_cache_dir() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "gamma4"


def cache_key(kind: str, args: Any) -> str:
    payload = json.dumps([kind, __version__, args], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


class ResultCache:
    def __init__(self, directory: Path):
        directory.mkdir(parents=True, exist_ok=True)
        self.path = directory / CACHE_FILE
        self._db = sqlite3.connect(self.path)
        self._db.execute("PRAGMA journal_mode=WAL")
        self._db.execute("CREATE TABLE IF NOT EXISTS entries (key TEXT PRIMARY KEY, kind TEXT, value TEXT)")
        self._db.commit()

    def get(self, kind: str, args: Any) -> Optional[Any]:
        row = self._db.execute("SELECT value FROM entries WHERE key = ?", (cache_key(kind, args),)).fetchone()
        return None if row is None else json.loads(row[0])

    def put(self, kind: str, args: Any, value: Any):
        self._db.execute(
            "INSERT OR REPLACE INTO entries (key, kind, value) VALUES (?, ?, ?)",
            (cache_key(kind, args), kind, json.dumps(value, sort_keys=True)),
        )
        self._db.commit()

    def __len__(self):
        return self._db.execute("SELECT COUNT(*) FROM entries").fetchone()[0]

    def close(self):
        self._db.close()


class NullCache:
    """Stand-in used with --no-cache."""

    def get(self, kind: str, args: Any) -> None:
        return None

    def put(self, kind: str, args: Any, value: Any):
        pass

    def __len__(self):
        return 0

    def close(self):
        pass
