"""Deterministic fixture-extension generator.

The real 2012 store corpus is gone, so corpus-level behaviour is checked
against generated extensions with *planted* declared/used permission sets:
the generator's ledger is the ground truth the scan histogram must
reproduce exactly. Decoy API mentions are planted inside comments and
strings so any sanitizer regression shows up as a histogram mismatch.
"""

from __future__ import annotations

import json
import random
import struct
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

# permission name -> API prefix the generator writes into live code
_USABLE = {
    "bookmarks": "chrome.bookmarks",
    "contextMenus": "chrome.contextMenus",
    "cookies": "chrome.cookies",
    "downloads": "chrome.downloads",
    "history": "chrome.history",
    "idle": "chrome.idle",
    "management": "chrome.management",
    "proxy": "chrome.proxy",
    "storage": "chrome.storage",
    "tabs": "chrome.tabs",
    "webNavigation": "chrome.webNavigation",
    "webRequest": "chrome.webRequest",
    "geolocation": "navigator.geolocation",
}

# declared-but-never-used pool (kept disjoint from notifications, which the
# generator plants separately to exercise the exemption)
_EXTRA_POOL = sorted(_USABLE) + [
    "activeTab", "alarms", "background", "browsingData", "clipboardRead",
    "clipboardWrite", "contentSettings", "debugger", "declarativeContent",
    "desktopCapture", "fontSettings", "identity", "pageCapture", "power",
    "privacy", "sessions", "topSites", "tts", "unlimitedStorage",
]


@dataclass
class PlantedExtension:
    name: str
    extra_count: int
    used: list[str]
    extras: list[str]
    unused_notifications: bool
    manifest_version: int
    http_scripts: int
    kind: str  # directory | zip | crx2


@dataclass
class CorpusLedger:
    extras: dict[str, int] = field(default_factory=dict)
    csp_enforced: int = 0
    http_script_extensions: int = 0
    exempt_only_skipped: int = 0
    planted: list[PlantedExtension] = field(default_factory=list)

    def histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for count in self.extras.values():
            if count >= 1:
                hist[count] = hist.get(count, 0) + 1
        return hist


def _background_js(rng: random.Random, used: list[str], extras: list[str]) -> str:
    lines = ["// generated fixture background script"]
    for perm in used:
        prefix = _USABLE[perm]
        lines.append(f"{prefix}.probe({rng.randint(0, 99)});")
    # decoys: API mentions that must NOT count as usage
    for perm in extras:
        prefix = _USABLE.get(perm)
        if prefix is None:
            continue
        style = rng.randrange(4)
        if style == 0:
            lines.append(f"// decoy {prefix}.get()")
        elif style == 1:
            lines.append(f'var s{rng.randint(0, 999)} = "{prefix}.query";')
        elif style == 2:
            lines.append(f"/* {prefix}.remove({{}}) */")
        else:
            lines.append(f"var t{rng.randint(0, 999)} = `tpl {prefix}.set`;")
    lines.append("console.log('ready');")
    return "\n".join(lines) + "\n"


def _files_for(plant: PlantedExtension, rng: random.Random) -> dict[str, bytes]:
    declared = sorted(plant.extras + plant.used)
    if plant.unused_notifications:
        declared.append("notifications")
    if rng.random() < 0.3:
        declared.append("http://*/*")
    manifest = {
        "manifest_version": plant.manifest_version,
        "name": plant.name,
        "version": f"1.{rng.randint(0, 9)}",
        "permissions": declared,
        "background": {"scripts": ["background.js"]},
    }
    if plant.manifest_version == 1:
        del manifest["manifest_version"]
        manifest["background_page"] = "bg.html"
        manifest.pop("background")
    files = {"manifest.json": json.dumps(manifest, indent=1).encode()}
    bg = _background_js(rng, plant.used, plant.extras).encode()
    if plant.manifest_version == 1:
        files["bg.html"] = b'<html><script src="background.js"></script></html>'
    files["background.js"] = bg
    for i in range(plant.http_scripts):
        files[f"page{i}.html"] = (
            f'<html><script src="http://cdn{i}.fixture.test/lib.js"></script></html>'
        ).encode()
    return files


def _zip_bytes(files: dict[str, bytes]) -> bytes:
    import io

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for name in sorted(files):
            zf.writestr(name, files[name])
    return buf.getvalue()


def _write(root: Path, plant: PlantedExtension, files: dict[str, bytes], rng: random.Random):
    if plant.kind == "directory":
        target = root / plant.name
        for rel, data in files.items():
            path = target / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
    elif plant.kind == "zip":
        (root / f"{plant.name}.zip").write_bytes(_zip_bytes(files))
    else:  # crx2
        key = rng.randbytes(64)
        sig = rng.randbytes(32)
        payload = _zip_bytes(files)
        blob = b"Cr24" + struct.pack("<III", 2, len(key), len(sig)) + key + sig + payload
        (root / f"{plant.name}.crx").write_bytes(blob)


def generate_fixture_corpus(
    root: str | Path, count: int = 60, seed: int = 1202
) -> CorpusLedger:
    """Write ``count`` planted extensions under ``root`` and return the ledger.

    Extra-permission counts cover 0..16; some fixtures declare an unused
    ``notifications`` permission so the exemption path is exercised.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    ledger = CorpusLedger()

    # guarantee coverage of every extra count 0..16, then fill randomly
    planted_counts = list(range(17))
    planted_counts += [rng.randint(0, 16) for _ in range(max(0, count - 17))]
    planted_counts = planted_counts[:count]

    for i, extra_count in enumerate(planted_counts):
        rng_local = random.Random(seed * 100003 + i)
        name = f"ext{i:03d}"
        used = rng_local.sample(sorted(_USABLE), k=rng_local.randint(0, 3))
        extra_choices = [p for p in _EXTRA_POOL if p not in used]
        extras = rng_local.sample(extra_choices, k=extra_count)
        unused_notifications = rng_local.random() < 0.35
        plant = PlantedExtension(
            name=name,
            extra_count=extra_count,
            used=used,
            extras=extras,
            unused_notifications=unused_notifications,
            manifest_version=2 if rng_local.random() < 0.6 else 1,
            http_scripts=rng_local.choice([0, 0, 0, 1, 2]),
            kind=rng_local.choice(["directory", "directory", "zip", "crx2"]),
        )
        _write(root, plant, _files_for(plant, rng_local), rng_local)
        ledger.planted.append(plant)
        ledger.extras[name] = extra_count
        if plant.manifest_version == 2:
            ledger.csp_enforced += 1
        if plant.http_scripts:
            ledger.http_script_extensions += 1
        if extra_count == 0 and unused_notifications:
            ledger.exempt_only_skipped += 1
    return ledger
