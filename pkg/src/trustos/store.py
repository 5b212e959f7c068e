"""Append-only, workspace-partitioned persistence.

One JSONL file per entity kind; every row carries a workspace_id and a
monotone per-file sequence number. Rows are never rewritten: entity updates
(AI system review, action-item close) append a new row version and the
latest row for an entity id wins. The store replays the files on startup,
so state survives process restart and preserves append order.

There is deliberately no delete or in-place update API, and no read path
that skips the workspace predicate.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import UnknownWorkspace
from .model import ActivityEvent, Workspace, new_id, utc_now

#: Entity kinds with a JSONL file each. "scenarios" holds attached fixture
#: documents so CLI subcommands in later processes can rebuild the fleet.
ENTITY_KINDS = (
    "workspaces",
    "users",
    "connections",
    "credentials",
    "probe_runs",
    "assertions",
    "events",
    "systems",
    "incidents",
    "data_flows",
    "agreements",
    "attestations",
    "documents",
    "action_items",
    "drift_events",
    "coverage_observations",
    "scenarios",
)


class Store:
    """Partitioned JSONL store. Pass root=None for a memory-only store."""

    def __init__(self, root: Optional[str] = None):
        self._root = Path(root) if root else None
        self._lock = threading.RLock()
        self._rows: dict[str, list[dict]] = {k: [] for k in ENTITY_KINDS}
        self._workspace_ids: set[str] = set()
        self._event_seq: dict[str, int] = {}
        self._ws_locks: dict[str, threading.RLock] = {}
        if self._root is not None:
            self._root.mkdir(parents=True, exist_ok=True)
            self._replay()

    # -- persistence ------------------------------------------------------

    def _path(self, kind: str) -> Path:
        return self._root / f"{kind}.jsonl"

    def _replay(self):
        for kind in ENTITY_KINDS:
            p = self._path(kind)
            if not p.exists():
                continue
            with p.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._rows[kind].append(json.loads(line))
        for row in self._rows["workspaces"]:
            self._workspace_ids.add(row["workspace_id"])
        for row in self._rows["events"]:
            ws = row["workspace_id"]
            self._event_seq[ws] = max(self._event_seq.get(ws, 0), row.get("seq", 0))

    def _write(self, kind: str, record: dict):
        if self._root is None:
            return
        with self._path(kind).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    # -- partitioning -----------------------------------------------------

    def workspace_lock(self, workspace_id: str) -> threading.RLock:
        """Per-workspace lock serializing ledger appends and item creation."""
        with self._lock:
            return self._ws_locks.setdefault(workspace_id, threading.RLock())

    def has_workspace(self, workspace_id: str) -> bool:
        with self._lock:
            return workspace_id in self._workspace_ids

    def require_workspace(self, workspace_id: str):
        if not self.has_workspace(workspace_id):
            raise UnknownWorkspace(workspace_id)

    def add_workspace(self, ws: Workspace):
        with self._lock:
            if ws.workspace_id in self._workspace_ids:
                raise ValueError(f"workspace {ws.workspace_id} already exists")
            if not ws.workspace_id:
                raise ValueError("workspace_id must be non-empty")
            record = ws.to_record()
            self._rows["workspaces"].append(record)
            self._workspace_ids.add(ws.workspace_id)
            self._write("workspaces", record)

    def append(self, kind: str, record: dict):
        """Append one entity row. Every row must carry its partition key."""
        if kind not in ENTITY_KINDS:
            raise KeyError(f"unknown entity kind {kind!r}")
        ws = record.get("workspace_id")
        if not ws:
            raise ValueError("record without workspace_id cannot be persisted")
        self.require_workspace(ws)
        with self._lock:
            self._rows[kind].append(record)
            self._write(kind, record)

    def scoped_query(self, workspace_id: str, entity_kind: str,
                     predicate: Optional[Callable[[dict], bool]] = None) -> list[dict]:
        """All rows of one kind for one workspace; the partition predicate
        is applied here, never by callers."""
        if entity_kind not in ENTITY_KINDS:
            raise KeyError(f"unknown entity kind {entity_kind!r}")
        self.require_workspace(workspace_id)
        with self._lock:
            rows = [r for r in self._rows[entity_kind]
                    if r.get("workspace_id") == workspace_id]
        if predicate is not None:
            rows = [r for r in rows if predicate(r)]
        return rows

    def latest_by(self, workspace_id: str, entity_kind: str, key: str) -> dict[str, dict]:
        """Latest row version per entity id (append order wins)."""
        out: dict[str, dict] = {}
        for row in self.scoped_query(workspace_id, entity_kind):
            out[row[key]] = row
        return out

    def workspaces(self) -> list[Workspace]:
        with self._lock:
            return [Workspace.from_record(r) for r in self._rows["workspaces"]]

    # -- activity events --------------------------------------------------

    def record_event(self, workspace_id: str, actor: str, verb: str, subject: str,
                     at=None) -> str:
        """Append an immutable activity event; totally ordered per workspace."""
        self.require_workspace(workspace_id)
        with self._lock:
            seq = self._event_seq.get(workspace_id, 0) + 1
            self._event_seq[workspace_id] = seq
            ev = ActivityEvent(new_id("ev"), workspace_id, actor, verb, subject,
                               at or utc_now(), seq=seq)
            record = ev.to_record()
            self._rows["events"].append(record)
            self._write("events", record)
            return ev.event_id

    def events(self, workspace_id: str) -> list[ActivityEvent]:
        rows = self.scoped_query(workspace_id, "events")
        return [ActivityEvent.from_record(r) for r in rows]

    # -- sentinel scans (test support) -------------------------------------

    def persisted_text(self) -> str:
        """Everything the store has persisted, as one scannable string."""
        with self._lock:
            chunks = []
            for kind in ENTITY_KINDS:
                for row in self._rows[kind]:
                    chunks.append(json.dumps(row, sort_keys=True))
            return "\n".join(chunks)


def iter_rows(rows: Iterable[dict], **field_filters) -> list[dict]:
    out = []
    for row in rows:
        if all(row.get(k) == v for k, v in field_filters.items()):
            out.append(row)
    return out
