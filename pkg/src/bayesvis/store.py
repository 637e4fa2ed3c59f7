"""Persistence for studies, participants, responses and sample blobs.

A single embedded SQLite database per deployment holds study templates,
participant task orders and scored responses.  Sample blobs live in a
directory next to the database, one binary file plus one schema sidecar
per blob.  Writes are committed before the call returns.
"""

from __future__ import annotations

import json
import secrets
import sqlite3
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import samples as se
from . import scoring, tasks
from .errors import (
    AlreadyAnswered,
    InvalidResponse,
    NotFound,
    SequenceViolation,
)


class BlobStore:
    """Directory-backed registry of immutable sample blobs."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._cache = {}
        self._lock = threading.Lock()

    def _paths(self, blob_id):
        if not blob_id or "/" in blob_id or blob_id.startswith("."):
            raise NotFound(f"bad blob id {blob_id!r}")
        return (self.directory / f"{blob_id}.blob",
                self.directory / f"{blob_id}.schema.json",
                self.directory / f"{blob_id}.meta.json")

    def register(self, blob_id: str, js: se.JointSamples):
        blob_path, schema_path, meta_path = self._paths(blob_id)
        blob_path.write_bytes(se.serialize(js))
        schema_path.write_text(se.schema_to_json(js.schema))
        meta_path.write_text(json.dumps(
            {"provenance": js.provenance, "seed": js.seed}))
        with self._lock:
            self._cache[blob_id] = js
        return blob_id

    def raw(self, blob_id: str) -> bytes:
        blob_path, _, _ = self._paths(blob_id)
        if not blob_path.exists():
            raise NotFound(f"unknown blob {blob_id!r}")
        return blob_path.read_bytes()

    def schema_json(self, blob_id: str) -> str:
        _, schema_path, _ = self._paths(blob_id)
        if not schema_path.exists():
            raise NotFound(f"unknown blob {blob_id!r}")
        return schema_path.read_text()

    def load(self, blob_id: str) -> se.JointSamples:
        with self._lock:
            if blob_id in self._cache:
                return self._cache[blob_id]
        blob_path, schema_path, meta_path = self._paths(blob_id)
        if not blob_path.exists():
            raise NotFound(f"unknown blob {blob_id!r}")
        schema = se.schema_from_json(schema_path.read_text())
        meta = {}
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
        js = se.load_samples(blob_path.read_bytes(), schema,
                             provenance=meta.get("provenance", "posterior"),
                             seed=int(meta.get("seed", 0)))
        with self._lock:
            self._cache[blob_id] = js
        return js


@dataclass(frozen=True)
class ParticipantRecord:
    user_id: str
    study_id: str
    seed: int
    task_order: tuple
    cursor: int
    created_at: float


@dataclass(frozen=True)
class ResponseRecord:
    user_id: str
    task_id: str
    payload: dict
    score: scoring.ScoreRecord
    action_log: tuple
    submitted_at: float


_SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS studies (
    study_id TEXT PRIMARY KEY,
    template TEXT NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS participants (
    user_id TEXT PRIMARY KEY,
    study_id TEXT NOT NULL REFERENCES studies(study_id),
    seed INTEGER NOT NULL,
    task_order TEXT NOT NULL,
    cursor INTEGER NOT NULL DEFAULT 0,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS responses (
    user_id TEXT NOT NULL REFERENCES participants(user_id),
    task_id TEXT NOT NULL,
    payload TEXT NOT NULL,
    score TEXT NOT NULL,
    reward REAL NOT NULL,
    action_log TEXT NOT NULL,
    submitted_at REAL NOT NULL,
    PRIMARY KEY (user_id, task_id)
);
"""


class StudyStore:
    """Study lifecycle persistence over a single SQLite database."""

    def __init__(self, db_path, blob_dir=None):
        self.db_path = str(db_path)
        if blob_dir is None:
            blob_dir = Path(db_path).parent / "blobs"
        self.blobs = BlobStore(blob_dir)
        self._template_cache = {}
        self._expansion_cache = {}
        self._user_locks = {}
        self._lock = threading.Lock()
        with self._connect() as conn:
            conn.executescript(_SCHEMA_SQL)

    def _connect(self):
        conn = sqlite3.connect(self.db_path, timeout=30.0)
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA synchronous=FULL")
        return conn

    def _user_lock(self, user_id):
        with self._lock:
            return self._user_locks.setdefault(user_id, threading.Lock())

    # -- studies ------------------------------------------------------------

    def register_study(self, template, study_id=None) -> str:
        """Validate and persist a study template; returns its id."""
        if not isinstance(template, tasks.StudyTemplate):
            template = tasks.parse_template(template)
        if study_id is None:
            study_id = f"study-{secrets.token_hex(4)}"
        if not template.document:
            raise ValueError("template must carry its source document")
        doc = json.dumps(template.document)
        with self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO studies VALUES (?, ?, ?)",
                (study_id, doc, time.time()))
        with self._lock:
            self._template_cache[study_id] = template
        return study_id

    def get_template(self, study_id) -> tasks.StudyTemplate:
        with self._lock:
            cached = self._template_cache.get(study_id)
        if cached is not None:
            return cached
        with self._connect() as conn:
            row = conn.execute(
                "SELECT template FROM studies WHERE study_id = ?",
                (study_id,)).fetchone()
        if row is None:
            raise NotFound(f"unknown study {study_id!r}")
        template = tasks.parse_template(json.loads(row[0]))
        with self._lock:
            self._template_cache[study_id] = template
        return template

    def list_studies(self):
        with self._connect() as conn:
            return [r[0] for r in conn.execute(
                "SELECT study_id FROM studies ORDER BY created_at")]

    # -- participants -------------------------------------------------------

    def _expansion(self, study_id, user_id, seed):
        key = (study_id, user_id)
        with self._lock:
            cached = self._expansion_cache.get(key)
        if cached is not None:
            return cached
        expansion = tasks.expand_for_user(self.get_template(study_id), seed)
        with self._lock:
            self._expansion_cache[key] = expansion
        return expansion

    def subscribe(self, study_id, seed=None) -> ParticipantRecord:
        """Create a participant with a fresh id and randomized task order."""
        template = self.get_template(study_id)
        user_id = secrets.token_hex(16)
        if seed is None:
            seed = int(user_id[:8], 16)
        expansion = tasks.expand_for_user(template, seed)
        order = tuple(t.id for t in expansion)
        created = time.time()
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO participants VALUES (?, ?, ?, ?, 0, ?)",
                (user_id, study_id, seed, json.dumps(list(order)), created))
        with self._lock:
            self._expansion_cache[(study_id, user_id)] = expansion
        return ParticipantRecord(user_id=user_id, study_id=study_id, seed=seed,
                                 task_order=order, cursor=0, created_at=created)

    def get_participant(self, study_id, user_id) -> ParticipantRecord:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT seed, task_order, cursor, created_at "
                "FROM participants WHERE user_id = ? AND study_id = ?",
                (user_id, study_id)).fetchone()
        if row is None:
            raise NotFound(f"unknown participant {user_id!r}")
        return ParticipantRecord(
            user_id=user_id, study_id=study_id, seed=int(row[0]),
            task_order=tuple(json.loads(row[1])), cursor=int(row[2]),
            created_at=row[3])

    def next_task(self, study_id, user_id):
        """Current task spec, or None once the study is complete."""
        p = self.get_participant(study_id, user_id)
        if p.cursor >= len(p.task_order):
            return None
        expansion = self._expansion(study_id, user_id, p.seed)
        spec = expansion[p.cursor]
        if spec.id != p.task_order[p.cursor]:
            raise RuntimeError("expansion no longer matches stored task order")
        return spec

    # -- responses ----------------------------------------------------------

    @staticmethod
    def _validate_action_log(action_log):
        log = []
        last = -1
        for entry in action_log or ():
            if "action" not in entry or "t_ms" not in entry:
                raise InvalidResponse("log entries need 'action' and 't_ms'")
            t = float(entry["t_ms"])
            if t < last:
                raise InvalidResponse("action log timestamps must not decrease")
            last = t
            log.append({"action": str(entry["action"]),
                        "digest": str(entry.get("digest", "")),
                        "t_ms": t})
        return tuple(log)

    def record_response(self, study_id, user_id, task_id, payload,
                        action_log=()) -> ResponseRecord:
        """Score and persist a response, advancing the participant cursor.

        The response is only accepted for the participant's current
        task; the score, log and cursor advance commit atomically.
        """
        with self._user_lock(user_id):
            p = self.get_participant(study_id, user_id)
            if p.cursor >= len(p.task_order):
                raise SequenceViolation("study already complete")
            current = p.task_order[p.cursor]
            if task_id != current:
                if task_id in p.task_order[:p.cursor]:
                    raise AlreadyAnswered(f"task {task_id!r} already answered")
                raise SequenceViolation(
                    f"expected response to {current!r}, got {task_id!r}")
            log = self._validate_action_log(action_log)
            task = self._expansion(study_id, user_id, p.seed)[p.cursor]
            js = self.blobs.load(task.model_ref)
            score = scoring.evaluate_response(task, payload, js)
            submitted = time.time()
            with self._connect() as conn:
                conn.execute("BEGIN IMMEDIATE")
                conn.execute(
                    "INSERT INTO responses VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (user_id, task_id, json.dumps(payload),
                     json.dumps(score.to_dict()), score.reward,
                     json.dumps(list(log)), submitted))
                conn.execute(
                    "UPDATE participants SET cursor = cursor + 1 "
                    "WHERE user_id = ?", (user_id,))
            return ResponseRecord(user_id=user_id, task_id=task_id,
                                  payload=payload, score=score,
                                  action_log=log, submitted_at=submitted)

    def cumulative_reward(self, user_id) -> float:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT COALESCE(SUM(reward), 0) FROM responses "
                "WHERE user_id = ?", (user_id,)).fetchone()
        return float(row[0])

    def response_count(self, user_id) -> int:
        with self._connect() as conn:
            return int(conn.execute(
                "SELECT COUNT(*) FROM responses WHERE user_id = ?",
                (user_id,)).fetchone()[0])

    def export_responses(self, study_id):
        """Flat response table rows for the analysis tooling."""
        template = self.get_template(study_id)
        by_id = {t.id: t for t in template.leaves()}
        rows = []
        with self._connect() as conn:
            cur = conn.execute(
                "SELECT r.user_id, r.task_id, r.reward, r.action_log, r.score "
                "FROM responses r JOIN participants p ON r.user_id = p.user_id "
                "WHERE p.study_id = ? ORDER BY r.submitted_at", (study_id,))
            for user_id, task_id, reward, log_json, score_json in cur:
                task = by_id.get(task_id)
                if task is None:
                    continue
                log = json.loads(log_json)
                rt = (log[-1]["t_ms"] / 1000.0) if log else 0.0
                score = json.loads(score_json)
                rows.append({
                    "user_id": user_id,
                    "task_id": task_id,
                    "query_id": task.query_id or task_id,
                    "visualisation": task.visualisation,
                    "observability": task.query_meta.observability,
                    "quantity": task.query_meta.quantity,
                    "conditioning": task.query_meta.conditioning,
                    "objective": score["objective"],
                    "objective_value": score["objective_value"],
                    "reward": float(reward),
                    "response_time_s": rt,
                })
        return rows
