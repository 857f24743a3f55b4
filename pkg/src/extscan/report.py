"""The canonical per-extension report document: severity scoring,
serialization, and validation.

Documents are canonical JSON (fixed key order, sorted sets, compact
separators) so identical scans produce byte-identical files that can be
hashed, deduped, and diffed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from .analyzer import NetworkFinding, OverprivilegeResult
from .errors import SchemaViolation, SeverityMismatch
from .manifest import CspStatus, Manifest, classify_csp
from .package import ExtensionPackage

# Unused sensitive permissions that make an extension an attractive target.
DEFAULT_SENSITIVE = frozenset({"cookies", "history", "management", "webRequest", "proxy"})

# Extensions asking for this many unused permissions represent serious issues.
HIGH_EXTRA_THRESHOLD = 4

SEVERITY_LEVELS = ("none", "low", "medium", "high")


@dataclass
class Severity:
    level: str = "none"
    reasons: list[str] = field(default_factory=list)


@dataclass
class ExtensionReport:
    extension_id: str | None
    name: str
    version: str
    manifest_version: int
    csp: CspStatus
    overprivilege: OverprivilegeResult
    network: list[NetworkFinding]
    host_patterns: list[str]
    optional_permissions: list[str]
    warnings: list[str]
    partial: bool
    severity: Severity
    scanner_version: str
    scanned_at: str


def score_severity(
    report: ExtensionReport,
    sensitive: frozenset[str] | set[str] = DEFAULT_SENSITIVE,
) -> Severity:
    """Derive the severity verdict; reasons enumerate every trigger."""
    over = report.overprivilege
    reasons: list[str] = []
    level = 0

    def bump(new_level: int, reason: str) -> None:
        nonlocal level
        level = max(level, new_level)
        reasons.append(reason)

    if over.extra_count >= HIGH_EXTRA_THRESHOLD:
        bump(3, f"{over.extra_count} extra permissions declared but never used")
    for name in sorted(over.extra & set(sensitive)):
        bump(3, f"unused sensitive permission: {name}")
    for finding in report.network:
        if finding.kind == "html_script_src" and finding.scheme == "http":
            bump(3, f"script loaded over HTTP (MitM risk): {finding.url} in {finding.source_file}")
    if over.extra_count in (2, 3):
        bump(2, f"{over.extra_count} extra permissions declared but never used")
    if over.extra_count == 1:
        bump(1, f"1 extra permission declared but never used: {min(over.extra)}")
    heuristic = sum(1 for f in report.network if f.kind == "js_string_url")
    if heuristic:
        bump(1, f"{heuristic} http:// string literal(s) (heuristic)")

    return Severity(level=SEVERITY_LEVELS[level], reasons=reasons)


def build_report(
    pkg: ExtensionPackage,
    manifest: Manifest,
    overprivilege: OverprivilegeResult,
    network: list[NetworkFinding],
    warnings: list[str],
    partial: bool,
    sensitive: frozenset[str] | set[str] = DEFAULT_SENSITIVE,
) -> ExtensionReport:
    report = ExtensionReport(
        extension_id=pkg.id,
        name=manifest.name,
        version=manifest.version,
        manifest_version=manifest.manifest_version,
        csp=classify_csp(manifest),
        overprivilege=overprivilege,
        network=list(network),
        host_patterns=sorted(p.unparse() for p in manifest.host_patterns),
        optional_permissions=sorted(manifest.optional_permissions),
        warnings=list(warnings),
        partial=partial,
        severity=Severity(),
        scanner_version=__version__,
        scanned_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    report.severity = score_severity(report, sensitive)
    return report


def _report_dict(r: ExtensionReport) -> dict:
    """Fields in the documented canonical order, sets sorted."""
    return {
        "extension_id": r.extension_id,
        "name": r.name,
        "version": r.version,
        "manifest_version": r.manifest_version,
        "csp": {"enforced": r.csp.enforced, "effective_policy": r.csp.effective_policy},
        "overprivilege": {
            "declared": sorted(r.overprivilege.declared),
            "used": sorted(r.overprivilege.used),
            "exempt_ignored": sorted(r.overprivilege.exempt_ignored),
            "extra": sorted(r.overprivilege.extra),
            "extra_count": r.overprivilege.extra_count,
            "undeclared_used": sorted(r.overprivilege.undeclared_used),
            "indeterminate": r.overprivilege.indeterminate,
        },
        "network": [
            {"source_file": f.source_file, "url": f.url, "scheme": f.scheme, "kind": f.kind}
            for f in r.network
        ],
        "host_patterns": list(r.host_patterns),
        "optional_permissions": list(r.optional_permissions),
        "warnings": list(r.warnings),
        "partial": r.partial,
        "severity": {"level": r.severity.level, "reasons": list(r.severity.reasons)},
        "scanner_version": r.scanner_version,
        "scanned_at": r.scanned_at,
    }


def serialize_report(r: ExtensionReport) -> str:
    return json.dumps(_report_dict(r), separators=(",", ":"), ensure_ascii=True)


def _expect(doc: dict, key: str, types) -> object:
    if key not in doc:
        raise SchemaViolation(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types):
        raise SchemaViolation(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _str_set(doc: dict, key: str) -> set[str]:
    value = _expect(doc, key, list)
    if not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"field {key!r} must contain only text")
    return set(value)


def _str_list(doc: dict, key: str) -> list[str]:
    value = _expect(doc, key, list)
    if not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"field {key!r} must contain only text")
    return list(value)


def deserialize_report(
    text: str,
    sensitive: frozenset[str] | set[str] = DEFAULT_SENSITIVE,
) -> ExtensionReport:
    """Parse and validate a canonical report document.

    The stored severity is compared against a fresh derivation; a mismatch
    means the document was tampered with or scored by different rules.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("document is not a JSON object")

    ext_id = doc.get("extension_id")
    if ext_id is not None and not isinstance(ext_id, str):
        raise SchemaViolation("extension_id must be text or null")

    csp_doc = _expect(doc, "csp", dict)
    over_doc = _expect(doc, "overprivilege", dict)
    sev_doc = _expect(doc, "severity", dict)

    over = OverprivilegeResult(
        declared=_str_set(over_doc, "declared"),
        used=_str_set(over_doc, "used"),
        exempt_ignored=_str_set(over_doc, "exempt_ignored"),
        extra=_str_set(over_doc, "extra"),
        extra_count=int(_expect(over_doc, "extra_count", int)),
        undeclared_used=_str_set(over_doc, "undeclared_used"),
        indeterminate=bool(_expect(over_doc, "indeterminate", bool)),
    )
    if over.extra_count != len(over.extra):
        raise SchemaViolation("extra_count does not match the extra set")

    network = []
    for item in _expect(doc, "network", list):
        if not isinstance(item, dict):
            raise SchemaViolation("network entries must be objects")
        network.append(
            NetworkFinding(
                source_file=str(_expect(item, "source_file", str)),
                url=str(_expect(item, "url", str)),
                scheme=str(_expect(item, "scheme", str)),
                kind=str(_expect(item, "kind", str)),
            )
        )

    report = ExtensionReport(
        extension_id=ext_id,
        name=str(_expect(doc, "name", str)),
        version=str(_expect(doc, "version", str)),
        manifest_version=int(_expect(doc, "manifest_version", int)),
        csp=CspStatus(
            enforced=bool(_expect(csp_doc, "enforced", bool)),
            effective_policy=str(_expect(csp_doc, "effective_policy", str)),
        ),
        overprivilege=over,
        network=network,
        host_patterns=_str_list(doc, "host_patterns"),
        optional_permissions=_str_list(doc, "optional_permissions"),
        warnings=_str_list(doc, "warnings"),
        partial=bool(_expect(doc, "partial", bool)),
        severity=Severity(
            level=str(_expect(sev_doc, "level", str)),
            reasons=_str_list(sev_doc, "reasons"),
        ),
        scanner_version=str(_expect(doc, "scanner_version", str)),
        scanned_at=str(_expect(doc, "scanned_at", str)),
    )
    if report.severity.level not in SEVERITY_LEVELS:
        raise SchemaViolation(f"unknown severity level {report.severity.level!r}")

    rederived = score_severity(report, sensitive)
    if rederived != report.severity:
        raise SeverityMismatch(
            f"stored severity {report.severity.level!r} does not re-derive "
            f"(expected {rederived.level!r}); document is stale or tampered"
        )
    return report
