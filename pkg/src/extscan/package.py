"""Read extension containers (CRX2/CRX3/ZIP/directory) into a uniform file map.

Byte formats, all integers little-endian:
  CRX2: ``Cr24`` | u32 version=2 | u32 key_len | u32 sig_len | key | sig | ZIP
  CRX3: ``Cr24`` | u32 version=3 | u32 header_len | header | ZIP
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import io
import json
import struct
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    BadVersion,
    EmptyKey,
    MalformedZip,
    MissingManifest,
    TruncatedHeader,
    UnknownContainer,
)

CRX_MAGIC = b"Cr24"
ZIP_MAGIC = b"PK\x03\x04"

_ALLOWED_COMPRESSION = (zipfile.ZIP_STORED, zipfile.ZIP_DEFLATED)


class ContainerKind(str, Enum):
    CRX2 = "crx2"
    CRX3 = "crx3"
    ZIP = "zip"
    DIRECTORY = "directory"


@dataclass(frozen=True)
class CrxHeader:
    version: int
    zip_offset: int
    public_key: bytes = b""
    signature: bytes = b""


@dataclass
class ExtensionPackage:
    """An opened extension: normalized path -> bytes, plus the derived ID."""

    files: dict[str, bytes]
    kind: ContainerKind
    id: str | None = None
    warnings: list[str] = field(default_factory=list)

    def manifest_text(self) -> str:
        return self.files["manifest.json"].decode("utf-8", errors="replace")


def detect_container(leading_bytes: bytes, is_directory: bool = False) -> ContainerKind:
    """Classify a container from its leading bytes (or path type)."""
    if is_directory:
        return ContainerKind.DIRECTORY
    if len(leading_bytes) >= 8 and leading_bytes[:4] == CRX_MAGIC:
        version = struct.unpack_from("<I", leading_bytes, 4)[0]
        if version == 2:
            return ContainerKind.CRX2
        if version == 3:
            return ContainerKind.CRX3
        raise BadVersion(f"CRX version {version} is not supported")
    if leading_bytes[:4] == ZIP_MAGIC:
        return ContainerKind.ZIP
    raise UnknownContainer("no container signature matched")


def parse_crx_header(data: bytes) -> CrxHeader:
    """Parse the CRX header and locate the embedded ZIP payload."""
    if len(data) < 12 or data[:4] != CRX_MAGIC:
        raise TruncatedHeader("CRX header shorter than 12 bytes")
    version = struct.unpack_from("<I", data, 4)[0]
    if version == 2:
        if len(data) < 16:
            raise TruncatedHeader("CRX2 header shorter than 16 bytes")
        key_len, sig_len = struct.unpack_from("<II", data, 8)
        zip_offset = 16 + key_len + sig_len
        if zip_offset > len(data):
            raise TruncatedHeader(
                f"declared key+signature lengths ({key_len}+{sig_len}) exceed file size"
            )
        return CrxHeader(
            version=2,
            zip_offset=zip_offset,
            public_key=data[16 : 16 + key_len],
            signature=data[16 + key_len : zip_offset],
        )
    if version == 3:
        header_len = struct.unpack_from("<I", data, 8)[0]
        zip_offset = 12 + header_len
        if zip_offset > len(data):
            raise TruncatedHeader(f"declared header length {header_len} exceeds file size")
        # CRX3 protobuf header is length-skipped, never interpreted.
        return CrxHeader(version=3, zip_offset=zip_offset)
    raise BadVersion(f"CRX version {version} is not supported")


def derive_extension_id(public_key: bytes) -> str:
    """Derive the 32-char a-p extension ID from a packer public key.

    SHA-256 the key bytes, keep the first 16 bytes, write them as lowercase
    hex, then map each hex digit 0-f onto the letters a-p.
    """
    if not public_key:
        raise EmptyKey("cannot derive an extension ID from an empty key")
    digest = hashlib.sha256(public_key).hexdigest()[:32]
    return "".join(chr(ord("a") + int(c, 16)) for c in digest)


def normalize_path(raw: str) -> str:
    """Normalize an archive member path: forward slashes, no ``..``, no leading slash.

    ``..`` segments pop a previous segment when one exists and are dropped
    otherwise, so no normalized path can escape the package root.
    """
    parts: list[str] = []
    for seg in raw.replace("\\", "/").split("/"):
        if seg in ("", "."):
            continue
        if seg == "..":
            if parts:
                parts.pop()
            continue
        parts.append(seg)
    return "/".join(parts)


def _files_from_zip_bytes(payload: bytes) -> tuple[dict[str, bytes], list[str]]:
    try:
        zf = zipfile.ZipFile(io.BytesIO(payload))
    except zipfile.BadZipFile as exc:
        raise MalformedZip(str(exc)) from exc
    files: dict[str, bytes] = {}
    warnings: list[str] = []
    for info in zf.infolist():
        if info.is_dir():
            continue
        if info.compress_type not in _ALLOWED_COMPRESSION:
            raise MalformedZip(
                f"unsupported compression method {info.compress_type} for {info.filename!r}"
            )
        path = normalize_path(info.filename)
        if not path:
            warnings.append(f"skipped empty path entry {info.filename!r}")
            continue
        if path in files:
            warnings.append(f"duplicate path {path!r}: last entry wins")
        try:
            files[path] = zf.read(info)
        except zipfile.BadZipFile as exc:
            raise MalformedZip(f"{info.filename!r}: {exc}") from exc
    return files, warnings


def _files_from_directory(root: Path) -> dict[str, bytes]:
    files: dict[str, bytes] = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = normalize_path(str(path.relative_to(root)))
        files[rel] = path.read_bytes()
    return files


def _id_from_manifest_key(files: dict[str, bytes], warnings: list[str]) -> str | None:
    # An unpacked extension may pin its ID via a base64 "key" field.
    try:
        manifest = json.loads(files["manifest.json"].decode("utf-8", errors="replace"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    key_b64 = manifest.get("key") if isinstance(manifest, dict) else None
    if not isinstance(key_b64, str):
        return None
    try:
        key = base64.b64decode(key_b64, validate=True)
    except (ValueError, binascii.Error):
        warnings.append("manifest 'key' is not valid base64; no ID derived")
        return None
    if not key:
        return None
    return derive_extension_id(key)


def open_package(path: str | Path) -> ExtensionPackage:
    """Open a CRX/ZIP file or an unpacked directory as an ExtensionPackage."""
    path = Path(path)
    if path.is_dir():
        kind = ContainerKind.DIRECTORY
        files = _files_from_directory(path)
        warnings: list[str] = []
        crx_id = None
    else:
        data = path.read_bytes()
        kind = detect_container(data[:12], is_directory=False)
        if kind in (ContainerKind.CRX2, ContainerKind.CRX3):
            header = parse_crx_header(data)
            files, warnings = _files_from_zip_bytes(data[header.zip_offset :])
            crx_id = derive_extension_id(header.public_key) if header.public_key else None
        else:
            files, warnings = _files_from_zip_bytes(data)
            crx_id = None
    if "manifest.json" not in files:
        raise MissingManifest(f"{path}: no manifest.json at package root")
    if crx_id is None:
        crx_id = _id_from_manifest_key(files, warnings)
    return ExtensionPackage(files=files, kind=kind, id=crx_id, warnings=warnings)
