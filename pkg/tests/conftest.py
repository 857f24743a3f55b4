"""Shared fixture builders: in-memory CRX/ZIP containers and unpacked dirs."""

import io
import json
import struct
import zipfile
from pathlib import Path

import pytest


def make_zip_bytes(files: dict[str, bytes]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, data in files.items():
            zf.writestr(name, data)
    return buf.getvalue()


def make_crx2(files: dict[str, bytes], key: bytes, sig: bytes = b"\x01" * 128) -> bytes:
    payload = make_zip_bytes(files)
    return b"Cr24" + struct.pack("<III", 2, len(key), len(sig)) + key + sig + payload


def make_crx3(files: dict[str, bytes], header: bytes = b"\x00" * 593) -> bytes:
    payload = make_zip_bytes(files)
    return b"Cr24" + struct.pack("<II", 3, len(header)) + header + payload


def minimal_manifest(**overrides) -> dict:
    doc = {"manifest_version": 2, "name": "fixture", "version": "1.0"}
    doc.update(overrides)
    return doc


def manifest_bytes(**overrides) -> bytes:
    return json.dumps(minimal_manifest(**overrides)).encode()


def write_extension_dir(root: Path, manifest: dict, files: dict[str, bytes] | None = None) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "manifest.json").write_bytes(json.dumps(manifest).encode())
    for rel, data in (files or {}).items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return root


@pytest.fixture
def ext_dir(tmp_path):
    def build(manifest: dict, files: dict[str, bytes] | None = None, name: str = "ext") -> Path:
        return write_extension_dir(tmp_path / name, manifest, files)

    return build
