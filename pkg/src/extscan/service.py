"""Report persistence plus the REST lookup service.

Storage is a directory of canonical JSON documents (one per extension
version) with an in-memory index that can always be rebuilt by rescanning
the directory; no database required. Stored documents are served back
byte-for-byte, so a client sees exactly what the scanner wrote.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from urllib.parse import quote, unquote

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import __version__
from .analyzer import AnalyzerOptions, analyze_package
from .corpus import aggregate_stats
from .errors import ExtScanError, MissingId, NotFound, StorageFailure
from .package import open_package
from .report import ExtensionReport, deserialize_report, serialize_report

DEFAULT_UPLOAD_LIMIT = 50 * 1024 * 1024  # bytes

_TMP_PREFIX = ".tmp-"


def version_key(version: str) -> list[tuple[int, int, str]]:
    """Ordering key: dot-split, numeric segments numeric, text lexicographic,
    trailing zero segments ignored (so 1.0 == 1)."""
    key = []
    for seg in version.split("."):
        if seg.isdigit():
            key.append((0, int(seg), ""))
        else:
            key.append((1, 0, seg))
    while key and key[-1] == (0, 0, ""):
        key.pop()
    return key


class ReportStore:
    """Directory-backed store of canonical report documents."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.index: dict[tuple[str, str], Path] = {}
        self.latest: dict[str, str] = {}
        self._rescan()

    def _rescan(self) -> None:
        self.index.clear()
        self.latest.clear()
        for ext_dir in sorted(self.root.iterdir()):
            if not ext_dir.is_dir():
                continue
            for doc in sorted(ext_dir.glob("*.json")):
                if doc.name.startswith(_TMP_PREFIX):
                    continue
                version = unquote(doc.stem)
                self.index[(ext_dir.name, version)] = doc
                self._bump_latest(ext_dir.name, version)

    def _bump_latest(self, ext_id: str, version: str) -> None:
        current = self.latest.get(ext_id)
        if current is None or (version_key(version), version) > (version_key(current), current):
            self.latest[ext_id] = version

    def _doc_path(self, ext_id: str, version: str) -> Path:
        return self.root / ext_id / (quote(version, safe="._-") + ".json")

    def put_report(self, report: ExtensionReport) -> None:
        """Atomic write (temp then rename); identical re-put is a no-op."""
        if not report.extension_id or not report.version:
            raise MissingId("report lacks extension_id or version")
        document = serialize_report(report).encode()
        path = self._doc_path(report.extension_id, report.version)
        if path.exists() and path.read_bytes() == document:
            return
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(
                prefix=_TMP_PREFIX, suffix=".json", dir=path.parent
            )
            with os.fdopen(fd, "wb") as fh:
                fh.write(document)
            os.replace(tmp_name, path)
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc
        self.index[(report.extension_id, report.version)] = path
        self._bump_latest(report.extension_id, report.version)

    def get_document(self, ext_id: str, version_or_latest: str) -> str:
        """The stored canonical document text, byte-exact."""
        version = version_or_latest
        if version == "latest":
            version = self.latest.get(ext_id, "")
            if not version:
                raise NotFound(f"no reports stored for {ext_id}")
        path = self.index.get((ext_id, version))
        if path is None:
            raise NotFound(f"no report for {ext_id} version {version}")
        return path.read_text()

    def get_report(self, ext_id: str, version_or_latest: str) -> ExtensionReport:
        return deserialize_report(self.get_document(ext_id, version_or_latest))

    def versions(self, ext_id: str) -> list[str]:
        found = [v for (eid, v) in self.index if eid == ext_id]
        return sorted(found, key=lambda v: (version_key(v), v))

    def latest_reports(self) -> list[ExtensionReport]:
        return [self.get_report(eid, "latest") for eid in sorted(self.latest)]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"code": code, "message": message}, status_code=status)


def create_app(
    store: ReportStore,
    options: AnalyzerOptions | None = None,
    upload_limit: int = DEFAULT_UPLOAD_LIMIT,
) -> FastAPI:
    """The Extension Checker backend: look up or submit per-extension reports."""
    options = options or AnalyzerOptions()
    app = FastAPI(title="extscan report service", version=__version__)
    # the checker page may be hosted anywhere; reports are public documents
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"]
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "scanner_version": __version__}

    @app.get("/api/v1/stats")
    def stats():
        return aggregate_stats(store.latest_reports()).to_dict()

    @app.get("/api/v1/reports/{ext_id}/latest")
    def get_latest(ext_id: str):
        try:
            document = store.get_document(ext_id, "latest")
        except NotFound as exc:
            return _error(404, exc.code, exc.message)
        return Response(content=document, media_type="application/json")

    @app.get("/api/v1/reports/{ext_id}/{version}")
    def get_version(ext_id: str, version: str):
        try:
            document = store.get_document(ext_id, version)
        except NotFound as exc:
            return _error(404, exc.code, exc.message)
        return Response(content=document, media_type="application/json")

    @app.get("/api/v1/reports/{ext_id}")
    def list_versions(ext_id: str):
        return store.versions(ext_id)

    @app.post("/api/v1/scan")
    async def scan(request: Request):
        body = await request.body()
        if len(body) > upload_limit:
            return _error(413, "TooLarge", f"upload exceeds {upload_limit} bytes")
        if not body:
            return _error(422, "EmptyUpload", "request body is empty")
        with tempfile.TemporaryDirectory() as tmp:
            pkg_path = Path(tmp) / "upload.pkg"
            pkg_path.write_bytes(body)
            try:
                report = analyze_package(open_package(pkg_path), options)
            except ExtScanError as exc:
                return _error(422, exc.code, exc.message)
        if report.extension_id:
            try:
                store.put_report(report)
            except StorageFailure as exc:
                return _error(503, exc.code, exc.message)
        return Response(content=serialize_report(report), media_type="application/json")

    return app
