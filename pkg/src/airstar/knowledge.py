"""Knowledge base: landmark descriptions, historical plans, static web info.

Retrieval is TF-IDF cosine over lowercase alphanumeric tokens; the store
persists to an append-only NDJSON journal.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, asdict
from enum import Enum
from pathlib import Path
from typing import Optional

from .geonav import tokenize


class EntryKind(str, Enum):
    historical_plan = "historical_plan"
    navigation_record = "navigation_record"
    landmark_description = "landmark_description"
    web_info = "web_info"


@dataclass
class KnowledgeEntry:
    id: str
    kind: EntryKind
    text: str
    tags: list[str] = field(default_factory=list)
    created_at: float = 0.0

    def __post_init__(self):
        if not self.text:
            raise ValueError("entry text must be nonempty")
        if isinstance(self.kind, str):
            self.kind = EntryKind(self.kind)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KnowledgeEntry":
        return cls(id=d["id"], kind=EntryKind(d["kind"]), text=d["text"],
                   tags=list(d.get("tags", [])), created_at=float(d.get("created_at", 0.0)))


class KnowledgeBase:
    def __init__(self, journal_path: Optional[str | Path] = None):
        self.entries: dict[str, KnowledgeEntry] = {}
        self.journal_path = Path(journal_path) if journal_path else None
        if self.journal_path and self.journal_path.exists():
            self._replay_journal()

    def _replay_journal(self):
        for line in self.journal_path.read_text().splitlines():
            if line.strip():
                entry = KnowledgeEntry.from_dict(json.loads(line))
                self.entries[entry.id] = entry

    def _journal(self, entry: KnowledgeEntry):
        if self.journal_path:
            with self.journal_path.open("a") as f:
                f.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")

    def __len__(self) -> int:
        return len(self.entries)

    def ingest(self, entries) -> "KnowledgeBase":
        """Idempotent on id: re-ingesting replaces the previous entry."""
        if isinstance(entries, KnowledgeEntry):
            entries = [entries]
        for entry in entries:
            self.entries[entry.id] = entry
            self._journal(entry)
        return self

    # -- retrieval ---------------------------------------------------------

    def _doc_tokens(self, entry: KnowledgeEntry) -> list[str]:
        return tokenize(entry.text + " " + " ".join(entry.tags))

    def retrieve(self, instruction: str, perception: str = "", k: int = 3
                 ) -> list[tuple[KnowledgeEntry, float]]:
        """Top-k entries by TF-IDF cosine against instruction + perception."""
        if k < 1:
            raise ValueError("k must be >= 1")
        query = tokenize(instruction + " " + perception)
        if not query or not self.entries:
            return []
        docs = {eid: self._doc_tokens(e) for eid, e in self.entries.items()}
        n = len(docs)
        df = Counter()
        for toks in docs.values():
            df.update(set(toks))
        # smoothed idf keeps every present token positive
        idf = {t: math.log((1 + n) / (1 + d)) + 1.0 for t, d in df.items()}

        def vec(tokens):
            tf = Counter(tokens)
            return {t: c * idf[t] for t, c in tf.items() if t in idf}

        qv = vec(query)
        qn = math.sqrt(sum(w * w for w in qv.values()))
        scored = []
        for eid in sorted(docs):
            dv = vec(docs[eid])
            dn = math.sqrt(sum(w * w for w in dv.values()))
            if qn == 0 or dn == 0:
                continue
            dot = sum(w * dv.get(t, 0.0) for t, w in qv.items())
            score = dot / (qn * dn)
            if score > 0:
                scored.append((self.entries[eid], score))
        scored.sort(key=lambda p: (-p[1], p[0].id))
        return scored[:k]

    def record_outcome(self, instruction: str, plan_doc: dict, outcome: str,
                       sim_time: float) -> KnowledgeEntry:
        """Append a historical plan record retrievable by future queries."""
        eid = f"hist-{sim_time:.1f}-{len(self.entries)}"
        steps = " ".join(s["tool"] for s in plan_doc.get("steps", []))
        text = f"instruction: {instruction} plan: {steps} outcome: {outcome}"
        entry = KnowledgeEntry(id=eid, kind=EntryKind.historical_plan, text=text,
                               tags=["history"], created_at=sim_time)
        self.ingest(entry)
        return entry
