"""Install-store tamper tooling, fixture-scale only.

Browsers keep install records in profile files (Chrome: the JSON
``Preferences`` document; Firefox: an sqlite add-on registry). Writing an
entry there directly fakes an installation without any user prompt. This
module provides both sides: injectors that reproduce the trick against
*fixture* files, and auditors that flag exactly what the injectors fake.

Writers refuse paths that look like a live browser profile unless forced;
this is a research reproduction, not an attack tool.
"""

from __future__ import annotations

import json
import os
import sqlite3
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateEntry,
    LiveProfileRefused,
    NotJson,
    NotSqlite,
    SchemaMismatch,
)

SQLITE_MAGIC = b"SQLite format 3\x00"

# Fixture add-on registry schema; the real historical schema varies by
# browser version, so inject/audit are defined against this declared one.
ADDON_TABLE_COLUMNS = ("id", "location", "version", "active", "descriptor")
ADDON_TABLE_SQL = (
    "CREATE TABLE addon ("
    "id TEXT PRIMARY KEY, location TEXT, version TEXT, "
    "active INTEGER, descriptor TEXT)"
)

_LIVE_PROFILE_MARKERS = (
    "google/chrome",
    "google-chrome",
    ".config/chromium",
    "chrome/user data",
    "user data/default",
    ".mozilla",
    "mozilla/firefox",
    "firefox/profiles",
    "appdata/roaming/mozilla",
    "application support/google",
    "application support/firefox",
)


@dataclass
class ChromeStoreEntry:
    id: str
    path: str
    location: int = 1
    state: int = 1
    from_webstore: bool = True
    name: str = ""
    version: str = ""

    def payload(self) -> dict:
        return {
            "path": self.path,
            "location": self.location,
            "state": self.state,
            "from_webstore": self.from_webstore,
            "manifest": {"name": self.name, "version": self.version},
        }


@dataclass
class FirefoxStoreEntry:
    id: str
    location: str = "app-profile"
    version: str = "1.0"
    active: int = 1
    descriptor: str = ""


@dataclass(frozen=True)
class AuditFinding:
    entry_id: str
    store: str  # chrome | firefox
    reason: str  # not_in_baseline | sideload_location | webstore_flag_false | inconsistent_state
    details: str


def looks_like_live_profile(path: str | Path) -> bool:
    normalized = str(path).replace("\\", "/").lower()
    return any(marker in normalized for marker in _LIVE_PROFILE_MARKERS)


def _check_not_live(path: str | Path, force: bool) -> None:
    if not force and looks_like_live_profile(path):
        raise LiveProfileRefused(
            f"{path} looks like a live browser profile; pass force to override"
        )


# --- Chrome: Preferences JSON -------------------------------------------------

def canonicalize_chrome_prefs(text: str) -> str:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from exc
    if not isinstance(doc, dict):
        raise NotJson("Preferences top level is not a JSON object")
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _settings_map(doc: dict) -> dict:
    extensions = doc.setdefault("extensions", {})
    if not isinstance(extensions, dict):
        raise NotJson("'extensions' is not an object")
    settings = extensions.setdefault("settings", {})
    if not isinstance(settings, dict):
        raise NotJson("'extensions.settings' is not an object")
    return settings


def inject_chrome_entry(prefs_text: str, entry: ChromeStoreEntry) -> str:
    """Add an install record under extensions.settings.<id>.

    Unrelated content survives up to JSON re-serialization; injecting the
    same entry twice is a no-op.
    """
    try:
        doc = json.loads(prefs_text)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from exc
    if not isinstance(doc, dict):
        raise NotJson("Preferences top level is not a JSON object")
    settings = _settings_map(doc)
    payload = entry.payload()
    existing = settings.get(entry.id)
    if existing is not None and existing != payload:
        raise DuplicateEntry(f"{entry.id} already present with different content")
    settings[entry.id] = payload
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def remove_chrome_entry(prefs_text: str, entry_id: str) -> str:
    try:
        doc = json.loads(prefs_text)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from exc
    settings = doc.get("extensions", {}).get("settings", {})
    settings.pop(entry_id, None)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def audit_chrome_prefs(
    prefs_text: str, baseline: set[str] | None = None
) -> list[AuditFinding]:
    """Flag entries absent from the baseline, sideloaded, or non-webstore."""
    try:
        doc = json.loads(prefs_text)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from exc
    if not isinstance(doc, dict):
        raise NotJson("Preferences top level is not a JSON object")
    settings = doc.get("extensions", {})
    settings = settings.get("settings", {}) if isinstance(settings, dict) else {}
    findings: list[AuditFinding] = []
    for entry_id, record in settings.items():
        record = record if isinstance(record, dict) else {}
        if baseline is not None and entry_id not in baseline:
            findings.append(
                AuditFinding(
                    entry_id=entry_id,
                    store="chrome",
                    reason="not_in_baseline",
                    details=f"id {entry_id} not in the {len(baseline)}-entry baseline",
                )
            )
        location = record.get("location")
        if isinstance(location, int) and location >= 2:
            findings.append(
                AuditFinding(
                    entry_id=entry_id,
                    store="chrome",
                    reason="sideload_location",
                    details=f"location={location} indicates a sideload install",
                )
            )
        if record.get("from_webstore") is False:
            findings.append(
                AuditFinding(
                    entry_id=entry_id,
                    store="chrome",
                    reason="webstore_flag_false",
                    details="from_webstore=false",
                )
            )
    findings.sort(key=lambda f: (f.entry_id, f.reason))
    return findings


def chrome_prefs_ids(prefs_text: str) -> set[str]:
    try:
        doc = json.loads(prefs_text)
    except json.JSONDecodeError as exc:
        raise NotJson(str(exc)) from exc
    settings = doc.get("extensions", {})
    settings = settings.get("settings", {}) if isinstance(settings, dict) else {}
    return set(settings)


def inject_chrome_prefs_file(
    path: str | Path, entry: ChromeStoreEntry, force: bool = False
) -> None:
    """Path-level wrapper: live-profile refusal plus atomic rewrite."""
    path = Path(path)
    _check_not_live(path, force)
    updated = inject_chrome_entry(path.read_text(), entry)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(updated)
    os.replace(tmp, path)


# --- Firefox: sqlite add-on registry ------------------------------------------

def create_firefox_fixture_db(
    path: str | Path, entries: list[FirefoxStoreEntry] | None = None
) -> None:
    """Create an empty fixture registry (test/demo helper)."""
    conn = sqlite3.connect(path)
    try:
        conn.execute(ADDON_TABLE_SQL)
        for e in entries or []:
            conn.execute(
                "INSERT INTO addon VALUES (?,?,?,?,?)",
                (e.id, e.location, e.version, e.active, e.descriptor),
            )
        conn.commit()
    finally:
        conn.close()


def _open_addon_db(path: str | Path) -> sqlite3.Connection:
    path = Path(path)
    if not path.is_file():
        raise NotSqlite(f"{path} does not exist")
    with open(path, "rb") as fh:
        if fh.read(16) != SQLITE_MAGIC:
            raise NotSqlite(f"{path} lacks the sqlite magic header")
    conn = sqlite3.connect(path)
    columns = tuple(row[1] for row in conn.execute("PRAGMA table_info(addon)"))
    if columns != ADDON_TABLE_COLUMNS:
        conn.close()
        raise SchemaMismatch(
            f"addon table columns {columns!r} != expected {ADDON_TABLE_COLUMNS!r}"
        )
    return conn


def inject_firefox_entry(
    db_path: str | Path, entry: FirefoxStoreEntry, force: bool = False
) -> None:
    """Insert one add-on row, faking the installation procedure."""
    _check_not_live(db_path, force)
    conn = _open_addon_db(db_path)
    try:
        existing = conn.execute(
            "SELECT COUNT(*) FROM addon WHERE id = ?", (entry.id,)
        ).fetchone()[0]
        if existing:
            raise DuplicateEntry(f"addon id {entry.id} already present")
        conn.execute(
            "INSERT INTO addon VALUES (?,?,?,?,?)",
            (entry.id, entry.location, entry.version, entry.active, entry.descriptor),
        )
        conn.commit()
    finally:
        conn.close()


def remove_firefox_entry(db_path: str | Path, entry_id: str) -> None:
    conn = _open_addon_db(db_path)
    try:
        conn.execute("DELETE FROM addon WHERE id = ?", (entry_id,))
        conn.commit()
    finally:
        conn.close()


def audit_firefox_db(
    db_path: str | Path, baseline: set[str] | None = None
) -> list[AuditFinding]:
    """Flag rows absent from the baseline or active with a dangling descriptor."""
    conn = _open_addon_db(db_path)
    try:
        rows = conn.execute(
            "SELECT id, location, version, active, descriptor FROM addon ORDER BY id"
        ).fetchall()
    finally:
        conn.close()
    findings: list[AuditFinding] = []
    for entry_id, location, version, active, descriptor in rows:
        if baseline is not None and entry_id not in baseline:
            findings.append(
                AuditFinding(
                    entry_id=entry_id,
                    store="firefox",
                    reason="not_in_baseline",
                    details=f"id {entry_id} not in the {len(baseline)}-entry baseline "
                    f"(location={location})",
                )
            )
        if active == 1 and descriptor and not Path(descriptor).exists():
            findings.append(
                AuditFinding(
                    entry_id=entry_id,
                    store="firefox",
                    reason="inconsistent_state",
                    details=f"active=1 but descriptor {descriptor!r} does not exist",
                )
            )
    findings.sort(key=lambda f: (f.entry_id, f.reason))
    return findings


def firefox_db_ids(db_path: str | Path) -> set[str]:
    conn = _open_addon_db(db_path)
    try:
        return {row[0] for row in conn.execute("SELECT id FROM addon")}
    finally:
        conn.close()
