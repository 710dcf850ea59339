"""On-disk persistence of sessions, images, annotations, and the ranking.

Directory layout::

    <root>/
      ranking.json
      <session_id>/
        manifest.json
        images/000001.png ...
        annotations.json      (written on export)

Manifest updates are atomic (write-temp-then-rename), so a crash mid-frame
leaves the manifest at the previous consistent state. Floats are serialized
with ``repr`` precision and round-trip exactly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import IntegrityError, SchemaVersionError, SessionStateError, StorageError

SCHEMA_VERSION = 1

MANIFEST_NAME = "manifest.json"
IMAGES_DIR = "images"
ANNOTATIONS_NAME = "annotations.json"
RANKING_NAME = "ranking.json"


def image_relpath(image_id: int) -> str:
    return f"{IMAGES_DIR}/{image_id:06d}.png"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"failed to write {path}: {exc}") from exc


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def _load_json(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"failed to read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StorageError(f"failed to parse {path}: {exc}") from exc


def write_manifest(session_dir: Path, manifest: dict) -> None:
    _atomic_write(Path(session_dir) / MANIFEST_NAME, _dump_json(manifest))


def load_session(session_dir) -> dict:
    """Load and version-check one session manifest."""
    manifest = _load_json(Path(session_dir) / MANIFEST_NAME)
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unknown schema_version {version!r} in {session_dir} (expected {SCHEMA_VERSION})"
        )
    return manifest


def list_finished(root) -> list:
    """Manifests of all finished sessions under root, ordered by session id."""
    root = Path(root)
    if not root.is_dir():
        return []
    manifests = []
    for entry in sorted(root.iterdir()):
        if entry.is_dir() and (entry / MANIFEST_NAME).exists():
            manifest = load_session(entry)
            if manifest.get("finished"):
                manifests.append(manifest)
    return manifests


def persist_frame(session_dir, image_bytes: bytes, frame) -> Path:
    """Store one frame's image and append its record to the manifest.

    ``frame`` must expose ``image_id`` and ``to_dict()``. The image is written
    before the manifest so an interrupted call never leaves a dangling record.
    Duplicate image ids raise IntegrityError.
    """
    session_dir = Path(session_dir)
    manifest = load_session(session_dir)
    if any(f["image_id"] == frame.image_id for f in manifest["frames"]):
        raise IntegrityError(f"image_id {frame.image_id} already persisted")

    image_path = session_dir / image_relpath(frame.image_id)
    image_path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(image_path, bytes(image_bytes))

    manifest["frames"].append(frame.to_dict())
    write_manifest(session_dir, manifest)
    return image_path


def export_annotations(session_dir) -> bytes:
    """Export a finished session as a COCO-style JSON document.

    The document is also written to ``annotations.json`` in the session
    directory. Export is deterministic: the same session yields byte-identical
    output. Unfinished or empty sessions raise SessionStateError.
    """
    session_dir = Path(session_dir)
    manifest = load_session(session_dir)
    if not manifest.get("finished"):
        raise SessionStateError(f"session {manifest.get('session_id')} is not finished")
    frames = manifest["frames"]
    if not frames:
        raise SessionStateError("session has no frames to export")

    intr = manifest["config"]["intrinsics"]
    model = manifest["config"]["object_model"]
    images = []
    annotations = []
    for i, frame in enumerate(frames, start=1):
        xmin, ymin, xmax, ymax = frame["annotation"]["bbox"]
        images.append(
            {
                "id": frame["image_id"],
                "file_name": frame["image_ref"],
                "width": intr["width"],
                "height": intr["height"],
            }
        )
        annotations.append(
            {
                "id": i,
                "image_id": frame["image_id"],
                "category_id": frame["annotation"]["class_id"],
                "bbox": [xmin, ymin, xmax - xmin, ymax - ymin],
            }
        )
    doc = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": model["class_id"], "name": model["class_name"]}],
    }
    data = _dump_json(doc)
    _atomic_write(session_dir / ANNOTATIONS_NAME, data)
    return data


class SessionStore:
    """A store root plus helpers for session lifecycle and the ranking file."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def new_session_id(self) -> str:
        existing = [p.name for p in self.root.iterdir() if p.is_dir()]
        seq = len(existing) + 1
        while f"session-{seq:06d}" in existing:
            seq += 1
        return f"session-{seq:06d}"

    def init_session(self, session_id: str, manifest: dict) -> Path:
        session_dir = self.session_dir(session_id)
        if session_dir.exists():
            raise IntegrityError(f"session directory {session_dir} already exists")
        (session_dir / IMAGES_DIR).mkdir(parents=True)
        write_manifest(session_dir, manifest)
        return session_dir

    def persist_frame(self, session_id: str, image_bytes: bytes, frame) -> Path:
        return persist_frame(self.session_dir(session_id), image_bytes, frame)

    def finalize_session(self, session_id: str, capture_time_s: float) -> None:
        session_dir = self.session_dir(session_id)
        manifest = load_session(session_dir)
        manifest["capture_time_s"] = capture_time_s
        manifest["finished"] = True
        write_manifest(session_dir, manifest)

    def load_manifest(self, session_id: str) -> dict:
        return load_session(self.session_dir(session_id))

    def list_finished(self) -> list:
        return list_finished(self.root)

    def export_annotations(self, session_id: str) -> bytes:
        return export_annotations(self.session_dir(session_id))

    def append_ranking_entry(self, entry: dict) -> None:
        entries = self.load_ranking_entries()
        entries.append(entry)
        _atomic_write(self.root / RANKING_NAME, _dump_json(entries))

    def load_ranking_entries(self) -> list:
        path = self.root / RANKING_NAME
        if not path.exists():
            return []
        return _load_json(path)
