"""Infer which declared API permissions an extension's privileged code
actually uses, compute the declared-minus-used delta, and flag insecure
HTTP references.

Usage detection is token-path matching over sanitized source (comments and
string literals masked out), not data-flow analysis. Dynamic access
patterns (``eval``, ``new Function``, computed ``chrome[...]`` members) set
an ``indeterminate`` flag instead of guessing.
"""

from __future__ import annotations

import json
import posixpath
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit

from .jsmask import sanitize_source
from .manifest import Manifest, parse_manifest
from .package import ExtensionPackage, normalize_path

DEFAULT_EXEMPT = frozenset({"notifications"})
DEFAULT_MAP_RESOURCE = "api_permissions_v1.json"

MODE_FULL = "full"
MODE_PAPER_COMPAT = "paper_compat"

_HTML_SUFFIXES = (".html", ".htm")

_SCRIPT_TAG = re.compile(r"<script\b([^>]*)>", re.IGNORECASE)
_SRC_ATTR = re.compile(
    r"""\bsrc\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>"']+))""", re.IGNORECASE
)
_DYNAMIC_CODE = re.compile(r"(?<![\w$.])(eval\s*\(|new\s+Function\s*\(|chrome\s*\[)")


class ApiPermissionMap:
    """Maps API namespace prefixes (``chrome.cookies``) to permission names.

    No prefix may be a component-wise prefix of another, so longest-match
    is unambiguous.
    """

    def __init__(self, entries: dict[str, str]):
        keys = sorted(entries)
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                if b == a or b.startswith(a + "."):
                    raise ValueError(f"map entry {a!r} is a prefix of {b!r}")
        self.entries = dict(entries)
        self._regex = re.compile(
            r"(?<![\w$.])("
            + "|".join(re.escape(k) for k in sorted(entries, key=len, reverse=True))
            + r")(?![\w$])"
        )

    @classmethod
    def load_default(cls) -> "ApiPermissionMap":
        text = resources.files("extscan.data").joinpath(DEFAULT_MAP_RESOURCE).read_text()
        return cls(json.loads(text))

    @classmethod
    def from_file(cls, path: str | Path) -> "ApiPermissionMap":
        entries = json.loads(Path(path).read_text())
        if not isinstance(entries, dict):
            raise ValueError(f"{path}: permission map must be a JSON object")
        return cls(entries)


@dataclass(frozen=True)
class UsageEvidence:
    permission: str
    file: str
    line: int
    api_path: str


@dataclass
class UsageScan:
    evidence: list[UsageEvidence] = field(default_factory=list)
    indeterminate: bool = False
    indeterminate_reasons: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class OverprivilegeResult:
    declared: set[str] = field(default_factory=set)
    used: set[str] = field(default_factory=set)
    exempt_ignored: set[str] = field(default_factory=set)
    extra: set[str] = field(default_factory=set)
    extra_count: int = 0
    undeclared_used: set[str] = field(default_factory=set)
    indeterminate: bool = False


@dataclass(frozen=True)
class NetworkFinding:
    source_file: str
    url: str
    scheme: str  # http | https | other
    kind: str  # html_script_src | js_string_url (heuristic)


@dataclass
class AnalyzerOptions:
    mode: str = MODE_FULL
    exempt: frozenset[str] = DEFAULT_EXEMPT
    flag_string_urls: bool = False
    api_map: ApiPermissionMap | None = None


def compute_overprivilege(
    declared: set[str],
    used: set[str],
    exempt: set[str] | frozenset[str] = DEFAULT_EXEMPT,
    indeterminate: bool = False,
) -> OverprivilegeResult:
    """Set algebra of the over-privilege comparison.

    Declared-but-unused permissions that cannot be abused (the exempt set)
    are set aside rather than counted as violations.
    """
    declared = set(declared)
    used = set(used)
    exempt_ignored = (declared & set(exempt)) - used
    extra = declared - used - exempt_ignored
    return OverprivilegeResult(
        declared=declared,
        used=used,
        exempt_ignored=exempt_ignored,
        extra=extra,
        extra_count=len(extra),
        undeclared_used=used - declared,
        indeterminate=indeterminate,
    )


def _page_scripts(
    pkg: ExtensionPackage, page: str, warnings: list[str]
) -> list[str]:
    """Local scripts referenced by an extension HTML page, in document order."""
    page_path = normalize_path(page)
    data = pkg.files.get(page_path)
    if data is None:
        warnings.append(f"MissingFile: page {page_path!r} not in package")
        return []
    html = data.decode("utf-8", errors="replace")
    base = posixpath.dirname(page_path)
    scripts: list[str] = []
    for tag in _SCRIPT_TAG.finditer(html):
        m = _SRC_ATTR.search(tag.group(1))
        if not m:
            continue
        src = next(g for g in m.groups() if g is not None)
        src = src.split("#", 1)[0].split("?", 1)[0]
        if not src or urlsplit(src).scheme:
            continue  # remote reference; the network scan covers it
        if src.startswith("/"):
            scripts.append(normalize_path(src))
        else:
            scripts.append(normalize_path(posixpath.join(base, src)))
    return scripts


def core_context_files(
    pkg: ExtensionPackage, manifest: Manifest, mode: str = MODE_FULL
) -> tuple[list[str], list[str]]:
    """Scripts that run with core-extension privileges, in scan order.

    paper_compat keeps only the background scripts (and scripts of the
    background page); full mode adds popup and options-page scripts.
    Content scripts are never included.
    """
    if mode not in (MODE_FULL, MODE_PAPER_COMPAT):
        raise ValueError(f"unknown mode {mode!r}")
    warnings: list[str] = []
    candidates = [normalize_path(p) for p in manifest.background_scripts]
    if manifest.background_page:
        candidates.extend(_page_scripts(pkg, manifest.background_page, warnings))
    if mode == MODE_FULL:
        for page in (manifest.action_popup, manifest.options_page):
            if page:
                candidates.extend(_page_scripts(pkg, page, warnings))
    ordered: list[str] = []
    for path in candidates:
        if path in ordered:
            continue
        if path not in pkg.files:
            warnings.append(f"MissingFile: script {path!r} not in package")
            continue
        ordered.append(path)
    return ordered, warnings


def scan_api_usage(
    files: list[tuple[str, str]], api_map: ApiPermissionMap
) -> UsageScan:
    """Find API-namespace uses in sanitized source, longest prefix wins."""
    scan = UsageScan()
    for path, text in files:
        sanitized = sanitize_source(text)
        scan.warnings.extend(f"{path}: {w}" for w in sanitized.warnings)
        masked = sanitized.masked_text
        for m in api_map._regex.finditer(masked):
            api_path = m.group(1)
            scan.evidence.append(
                UsageEvidence(
                    permission=api_map.entries[api_path],
                    file=path,
                    line=masked.count("\n", 0, m.start()) + 1,
                    api_path=api_path,
                )
            )
        for m in _DYNAMIC_CODE.finditer(masked):
            line = masked.count("\n", 0, m.start()) + 1
            scan.indeterminate = True
            scan.indeterminate_reasons.append(
                f"{path}:{line}: dynamic code ({m.group(1).strip()})"
            )
    scan.evidence.sort(key=lambda e: (e.file, e.line, e.api_path))
    return scan


def scan_html_scripts(html: str, source_path: str) -> list[NetworkFinding]:
    """Script elements with absolute-URL sources; relative sources ignored."""
    findings: list[NetworkFinding] = []
    for tag in _SCRIPT_TAG.finditer(html):
        m = _SRC_ATTR.search(tag.group(1))
        if not m:
            continue
        src = next(g for g in m.groups() if g is not None)
        scheme = urlsplit(src).scheme
        if not scheme:
            continue
        findings.append(
            NetworkFinding(
                source_file=source_path,
                url=src,
                scheme=scheme if scheme in ("http", "https") else "other",
                kind="html_script_src",
            )
        )
    return findings


def scan_string_urls(
    files: list[tuple[str, str]], enabled: bool = False
) -> list[NetworkFinding]:
    """Heuristic: string literals starting with http:// (off by default:
    plain URL strings are not necessarily requested, so this over-reports)."""
    if not enabled:
        return []
    findings: list[NetworkFinding] = []
    for path, text in files:
        for start, end in sanitize_source(text).string_spans:
            literal = text[start:end]
            if len(literal) < 2 or literal[0] not in "'\"`":
                continue
            content = literal[1:]
            if content and content[-1] == literal[0]:
                content = content[:-1]
            if content.startswith("http://"):
                findings.append(
                    NetworkFinding(
                        source_file=path,
                        url=content,
                        scheme="http",
                        kind="js_string_url",
                    )
                )
    return findings


def analyze_package(pkg: ExtensionPackage, options: AnalyzerOptions | None = None):
    """Run the full static analysis over one opened package.

    Returns an ExtensionReport. Manifest errors propagate; per-file
    problems degrade the report (partial=True) instead of failing it.
    """
    from .report import build_report  # report depends on our types

    options = options or AnalyzerOptions()
    api_map = options.api_map or ApiPermissionMap.load_default()
    manifest = parse_manifest(pkg.manifest_text())

    warnings: list[str] = list(pkg.warnings) + list(manifest.warnings)
    warnings.extend(
        f"unknown permission token: {p}" for p in sorted(manifest.unknown_permissions)
    )
    partial = False

    core_paths, core_warnings = core_context_files(pkg, manifest, options.mode)
    warnings.extend(core_warnings)
    if any(w.startswith("MissingFile") for w in core_warnings):
        partial = True

    core_files = [
        (p, pkg.files[p].decode("utf-8", errors="replace")) for p in core_paths
    ]
    usage = scan_api_usage(core_files, api_map)
    warnings.extend(usage.warnings)
    warnings.extend(usage.indeterminate_reasons)

    over = compute_overprivilege(
        declared=manifest.api_permissions,
        used={e.permission for e in usage.evidence},
        exempt=options.exempt,
        indeterminate=usage.indeterminate,
    )

    network: list[NetworkFinding] = []
    for path in sorted(pkg.files):
        if path.lower().endswith(_HTML_SUFFIXES):
            html = pkg.files[path].decode("utf-8", errors="replace")
            network.extend(scan_html_scripts(html, path))
    if options.flag_string_urls:
        js_files = [
            (p, pkg.files[p].decode("utf-8", errors="replace"))
            for p in sorted(pkg.files)
            if p.lower().endswith(".js")
        ]
        network.extend(scan_string_urls(js_files, enabled=True))

    return build_report(
        pkg=pkg,
        manifest=manifest,
        overprivilege=over,
        network=network,
        warnings=warnings,
        partial=partial,
    )
