"""On-disk cache of Bessel zeros.

The cache is a JSON document::

    {"format_version": 1,
     "tables": {"J:0": {"limit": 300.0, "zeros": [...]}, "Jp:4": {...}}}

Each table holds every positive zero of J_n (kind ``J``) or J_n' (kind
``Jp``) below ``limit``, in ascending order, so ``zeros[k-1]`` is the k-th
zero. Readers never see a partial file: writes go to a temporary file in the
same directory followed by an atomic rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import CacheCorrupt

FORMAT_VERSION = 1
FILENAME = "bessel_zeros.json"


def default_cache_dir() -> Path:
    env = os.environ.get("BFKLAB_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "bfklab"


class BesselZeroCache:
    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.directory / FILENAME
        self._tables: dict[str, dict] = {}
        self._dirty = False
        self._load()

    @staticmethod
    def key(kind: str, n: int) -> str:
        if kind not in ("J", "Jp"):
            raise ValueError(f"unknown zero kind {kind!r}")
        return f"{kind}:{int(n)}"

    def _load(self):
        if not self.path.exists():
            return
        try:
            data = json.loads(self.path.read_text())
        except (OSError, ValueError) as exc:
            raise CacheCorrupt(f"cannot parse {self.path}: {exc}") from exc
        if not isinstance(data, dict) or data.get("format_version") != FORMAT_VERSION:
            raise CacheCorrupt(f"{self.path} has missing or unsupported format_version")
        tables = data.get("tables")
        if not isinstance(tables, dict):
            raise CacheCorrupt(f"{self.path} has no zero tables")
        for key, table in tables.items():
            if not isinstance(table, dict) or "limit" not in table or "zeros" not in table:
                raise CacheCorrupt(f"malformed table {key!r} in {self.path}")
        self._tables = tables

    def get(self, kind: str, n: int, limit: float):
        """Zeros below ``limit`` if the stored table covers it, else None."""
        table = self._tables.get(self.key(kind, n))
        if table is None or table["limit"] < limit:
            return None
        return [z for z in table["zeros"] if z < limit]

    def put(self, kind: str, n: int, limit: float, zeros):
        key = self.key(kind, n)
        old = self._tables.get(key)
        if old is not None and old["limit"] >= limit:
            return
        self._tables[key] = {"limit": float(limit), "zeros": [float(z) for z in zeros]}
        self._dirty = True

    def tables(self):
        """Yield (kind, n, limit, zeros) for every stored table, ordered by kind and n."""
        keys = sorted(self._tables, key=lambda k: (k.split(":")[0], int(k.split(":")[1])))
        for key in keys:
            kind, n = key.split(":")
            table = self._tables[key]
            yield kind, int(n), table["limit"], table["zeros"]

    def entries(self) -> int:
        return sum(len(t["zeros"]) for t in self._tables.values())

    def info(self) -> dict:
        return {
            "path": str(self.path),
            "format_version": FORMAT_VERSION,
            "tables": len(self._tables),
            "zeros": self.entries(),
        }

    def save(self):
        if not self._dirty:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".bessel_zeros.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump({"format_version": FORMAT_VERSION, "tables": self._tables}, fh)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self._dirty = False

    def clear(self):
        self._tables = {}
        self._dirty = False
        if self.path.exists():
            self.path.unlink()
