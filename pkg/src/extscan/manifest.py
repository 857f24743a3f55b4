"""Parse and model manifest.json (v1 and v2).

The ``permissions`` array is partitioned into API permissions and host match
patterns; every entry lands in exactly one bucket. Tokens that are neither a
known API name nor a valid pattern stay in the API bucket but are recorded in
``unknown_permissions`` (the permission vocabulary grew over time, rejecting
them would bias corpus statistics).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from urllib.parse import urlsplit

from .errors import (
    MalformedUrl,
    MissingRequiredField,
    NotAPattern,
    NotJson,
    PermissionEntryNotText,
    UnsupportedManifestVersion,
)

VALID_SCHEMES = ("*", "http", "https", "file", "ftp")
ALL_URLS = "<all_urls>"
ALL_URLS_SCHEMES = ("http", "https", "file", "ftp")

# Default policy the platform applies to manifest v2 extensions that do not
# declare their own.
DEFAULT_V2_CSP = "script-src 'self'; object-src 'self'"

# Permission vocabulary of the manifest v1/v2 era, used only to flag unknown
# tokens; unknown tokens still count as declared API permissions.
KNOWN_API_PERMISSIONS = frozenset({
    "activeTab", "alarms", "background", "bookmarks", "browsingData",
    "clipboardRead", "clipboardWrite", "contentSettings", "contextMenus",
    "cookies", "debugger", "declarativeContent", "declarativeWebRequest",
    "desktopCapture", "downloads", "experimental", "fileBrowserHandler",
    "fontSettings", "geolocation", "history", "identity", "idle",
    "management", "nativeMessaging", "notifications", "pageCapture",
    "power", "privacy", "proxy", "pushMessaging", "sessions", "storage",
    "system.cpu", "system.display", "system.memory", "system.storage",
    "tabCapture", "tabs", "topSites", "tts", "ttsEngine", "unlimitedStorage",
    "webNavigation", "webRequest", "webRequestBlocking", "webstore",
})

_KNOWN_TOP_LEVEL_KEYS = frozenset({
    "name", "version", "manifest_version", "description", "permissions",
    "optional_permissions", "background", "background_page",
    "background_scripts", "browser_action", "page_action", "content_scripts",
    "content_security_policy", "options_page", "options_ui",
    "web_accessible_resources", "icons", "key", "update_url",
    "default_locale", "homepage_url", "minimum_chrome_version",
    "chrome_url_overrides", "commands", "incognito", "offline_enabled",
    "omnibox", "plugins", "requirements", "sandbox", "short_name",
})


@dataclass(frozen=True)
class MatchPattern:
    """A ``scheme://host/path`` host permission, or the ``<all_urls>`` marker."""

    scheme: str = ""
    host: str = ""
    path_glob: str = ""
    all_urls: bool = False

    def unparse(self) -> str:
        if self.all_urls:
            return ALL_URLS
        return f"{self.scheme}://{self.host}{self.path_glob}"

    def __str__(self) -> str:
        return self.unparse()


@dataclass(frozen=True)
class CspStatus:
    enforced: bool
    effective_policy: str


@dataclass
class ContentScript:
    js: list[str] = field(default_factory=list)
    matches: list[MatchPattern] = field(default_factory=list)


@dataclass
class Manifest:
    name: str
    version: str
    manifest_version: int
    api_permissions: set[str] = field(default_factory=set)
    host_patterns: set[MatchPattern] = field(default_factory=set)
    unknown_permissions: set[str] = field(default_factory=set)
    optional_permissions: list[str] = field(default_factory=list)
    background_scripts: list[str] = field(default_factory=list)
    background_page: str | None = None
    action_popup: str | None = None
    options_page: str | None = None
    content_scripts: list[ContentScript] = field(default_factory=list)
    csp_text: str | None = None
    web_accessible: bool | list[str] = False
    unknown_keys: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def parse_match_pattern(text: str) -> MatchPattern:
    """Parse a host match pattern; raises NotAPattern for API-permission tokens."""
    if text == ALL_URLS:
        return MatchPattern(all_urls=True)
    scheme, sep, rest = text.partition("://")
    if not sep:
        raise NotAPattern(f"{text!r} has no scheme separator")
    if scheme not in VALID_SCHEMES:
        raise NotAPattern(f"{text!r} has unsupported scheme {scheme!r}")
    slash = rest.find("/")
    if slash < 0:
        raise NotAPattern(f"{text!r} has no path component")
    host, path = rest[:slash], rest[slash:]
    if not host and scheme != "file":
        raise NotAPattern(f"{text!r} has an empty host")
    if "*" in host and host != "*":
        if not host.startswith("*.") or "*" in host[2:] or len(host) == 2:
            raise NotAPattern(f"{text!r} has a malformed host wildcard")
    return MatchPattern(scheme=scheme, host=host, path_glob=path)


def _glob_to_regex(glob: str) -> re.Pattern[str]:
    return re.compile("".join(".*" if ch == "*" else re.escape(ch) for ch in glob) + r"\Z")


def match_url(pattern: MatchPattern, url: str) -> bool:
    """Decide whether an absolute URL falls under a host match pattern."""
    parts = urlsplit(url)
    scheme = parts.scheme.lower()
    netloc = parts.netloc.rpartition("@")[2].lower()
    if not scheme:
        raise MalformedUrl(f"{url!r} has no scheme")
    if not netloc and scheme != "file":
        raise MalformedUrl(f"{url!r} has no host")
    if pattern.all_urls:
        return scheme in ALL_URLS_SCHEMES
    pat_scheme = pattern.scheme.lower()
    if pat_scheme == "*":
        if scheme not in ("http", "https"):
            return False
    elif scheme != pat_scheme:
        return False
    pat_host = pattern.host.lower()
    # Ports are folded into the host literal; strip the URL's port unless the
    # pattern spells one out.
    host = netloc if ":" in pat_host else re.sub(r":\d+\Z", "", netloc)
    if pat_host == "*":
        pass
    elif pat_host.startswith("*."):
        suffix = pat_host[2:]
        if host != suffix and not host.endswith("." + suffix):
            return False
    elif host != pat_host:
        return False
    path = parts.path or "/"
    return _glob_to_regex(pattern.path_glob).match(path) is not None


def classify_csp(manifest: Manifest) -> CspStatus:
    """CSP is enforced exactly when the manifest has upgraded to version 2."""
    if manifest.manifest_version == 2:
        return CspStatus(enforced=True, effective_policy=manifest.csp_text or DEFAULT_V2_CSP)
    return CspStatus(enforced=False, effective_policy="")


def _require_str(obj: dict, key: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise MissingRequiredField(key)
    return value


def _str_list(value, warnings: list[str], what: str) -> list[str]:
    if not isinstance(value, list):
        warnings.append(f"{what} is not a list; ignored")
        return []
    out = []
    for item in value:
        if isinstance(item, str):
            out.append(item)
        else:
            warnings.append(f"{what} entry {item!r} is not text; ignored")
    return out


def parse_manifest(text: str) -> Manifest:
    """Parse manifest.json text into a Manifest model."""
    try:
        raw = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NotJson(str(exc)) from exc
    if not isinstance(raw, dict):
        raise NotJson("manifest top level is not a JSON object")

    name = _require_str(raw, "name")
    version = _require_str(raw, "version")

    mv = raw.get("manifest_version", 1)
    if isinstance(mv, bool) or not isinstance(mv, int) or mv not in (1, 2):
        raise UnsupportedManifestVersion(f"manifest_version {mv!r} not in {{1, 2}}")

    m = Manifest(name=name, version=version, manifest_version=mv)
    m.unknown_keys = sorted(k for k in raw if k not in _KNOWN_TOP_LEVEL_KEYS)

    for entry in raw.get("permissions", []) or []:
        if not isinstance(entry, str):
            raise PermissionEntryNotText(f"permissions entry {entry!r} is not text")
        try:
            m.host_patterns.add(parse_match_pattern(entry))
        except NotAPattern:
            m.api_permissions.add(entry)
            if entry not in KNOWN_API_PERMISSIONS:
                m.unknown_permissions.add(entry)

    opt = raw.get("optional_permissions")
    if opt is not None:
        m.optional_permissions = _str_list(opt, m.warnings, "optional_permissions")

    background = raw.get("background")
    if isinstance(background, dict):
        m.background_scripts = _str_list(
            background.get("scripts", []), m.warnings, "background.scripts"
        )
        page = background.get("page")
        if isinstance(page, str):
            m.background_page = page
    if isinstance(raw.get("background_page"), str):
        m.background_page = raw["background_page"]
    if "background_scripts" in raw and not m.background_scripts:
        m.background_scripts = _str_list(
            raw["background_scripts"], m.warnings, "background_scripts"
        )

    for action_key in ("browser_action", "page_action"):
        action = raw.get(action_key)
        if isinstance(action, dict):
            popup = action.get("default_popup") or action.get("popup")
            if isinstance(popup, str) and popup:
                m.action_popup = popup
                break

    if isinstance(raw.get("options_page"), str):
        m.options_page = raw["options_page"]
    elif isinstance(raw.get("options_ui"), dict):
        page = raw["options_ui"].get("page")
        if isinstance(page, str):
            m.options_page = page

    for script in raw.get("content_scripts", []) or []:
        if not isinstance(script, dict):
            m.warnings.append(f"content_scripts entry {script!r} is not an object; ignored")
            continue
        cs = ContentScript(js=_str_list(script.get("js", []), m.warnings, "content_scripts.js"))
        for pat in _str_list(script.get("matches", []), m.warnings, "content_scripts.matches"):
            try:
                cs.matches.append(parse_match_pattern(pat))
            except NotAPattern:
                m.warnings.append(f"content_scripts match {pat!r} is not a pattern; ignored")
        m.content_scripts.append(cs)

    csp = raw.get("content_security_policy")
    if isinstance(csp, str):
        m.csp_text = csp

    war = raw.get("web_accessible_resources")
    if isinstance(war, bool):
        m.web_accessible = war
    elif isinstance(war, list):
        m.web_accessible = _str_list(war, m.warnings, "web_accessible_resources")

    return m
