"""Batch-scan a directory of extension packages and aggregate violation
statistics: the violating-extensions histogram, CSP adoption, and
HTTP-script counts. Also renders the table/plot forms and fetches single
packages from a store endpoint.
"""

from __future__ import annotations

import math
import re
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .analyzer import AnalyzerOptions, analyze_package
from .errors import EmptyCorpus, ExtScanError, NetworkError, NotACrx, NotFound
from .package import CRX_MAGIC, open_package
from .report import ExtensionReport

TABLE_HEADER = "Number of extra privileges sought\tNumber of violating extensions"

# Update-service URL template; {id} is replaced with the extension ID.
DEFAULT_FETCH_ENDPOINT = (
    "https://clients2.google.com/service/update2/crx"
    "?response=redirect&prodversion=49.0&acceptformat=crx2,crx3&x=id%3D{id}%26uc"
)

_EXTENSION_ID_RE = re.compile(r"[a-p]{32}\Z")


@dataclass
class CorpusStats:
    scanned: int = 0
    failed: int = 0
    failure_reasons: dict[str, int] = field(default_factory=dict)
    csp_enforced: int = 0
    histogram: dict[int, int] = field(default_factory=dict)
    http_script_extensions: int = 0
    exempt_only_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "scanned": self.scanned,
            "failed": self.failed,
            "failure_reasons": dict(sorted(self.failure_reasons.items())),
            "csp_enforced": self.csp_enforced,
            "histogram": {str(k): self.histogram[k] for k in sorted(self.histogram)},
            "http_script_extensions": self.http_script_extensions,
            "exempt_only_skipped": self.exempt_only_skipped,
        }


def aggregate_stats(reports: list[ExtensionReport]) -> CorpusStats:
    """Fold per-extension reports into corpus statistics.

    Extensions with no violations stay out of the histogram (the table
    starts at one extra privilege); an extension counts toward the HTTP
    figure once, however many insecure script tags it has.
    """
    stats = CorpusStats(scanned=len(reports))
    for report in reports:
        over = report.overprivilege
        if report.csp.enforced:
            stats.csp_enforced += 1
        if over.extra_count >= 1:
            stats.histogram[over.extra_count] = stats.histogram.get(over.extra_count, 0) + 1
        elif over.exempt_ignored:
            stats.exempt_only_skipped += 1
        if any(f.kind == "html_script_src" and f.scheme == "http" for f in report.network):
            stats.http_script_extensions += 1
    return stats


def _scan_one(path: Path, options: AnalyzerOptions):
    try:
        return analyze_package(open_package(path), options)
    except ExtScanError as exc:
        return exc


def run_corpus(
    root: str | Path,
    options: AnalyzerOptions | None = None,
    jobs: int = 1,
) -> tuple[CorpusStats, list[ExtensionReport]]:
    """Scan every immediate child of ``root`` as one extension package.

    Reports come back in lexicographic path order whatever the parallelism
    degree, so corpus outputs are reproducible byte-for-byte.
    """
    root = Path(root)
    children = sorted(root.iterdir(), key=lambda p: p.name)
    if not children:
        raise EmptyCorpus(f"{root} has no packages")
    options = options or AnalyzerOptions()

    if jobs <= 1:
        outcomes = [_scan_one(child, options) for child in children]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda p: _scan_one(p, options), children))

    reports = [o for o in outcomes if isinstance(o, ExtensionReport)]
    stats = aggregate_stats(reports)
    for outcome in outcomes:
        if isinstance(outcome, ExtScanError):
            stats.failed += 1
            code = outcome.code
            stats.failure_reasons[code] = stats.failure_reasons.get(code, 0) + 1
    return stats, reports


def render_table(histogram: dict[int, int]) -> str:
    """The violating-extensions table: header row, tab-separated, ascending."""
    lines = [TABLE_HEADER]
    lines.extend(f"{count}\t{histogram[count]}" for count in sorted(histogram))
    return "\n".join(lines) + "\n"


def stats_csv(stats: CorpusStats) -> str:
    """key,value rows: scalar counters, then failure reasons, then histogram."""
    rows = [
        ("scanned", stats.scanned),
        ("failed", stats.failed),
        ("csp_enforced", stats.csp_enforced),
        ("http_script_extensions", stats.http_script_extensions),
        ("exempt_only_skipped", stats.exempt_only_skipped),
    ]
    rows.extend((f"failure_reason.{k}", v) for k, v in sorted(stats.failure_reasons.items()))
    rows.extend((f"histogram.{k}", stats.histogram[k]) for k in sorted(stats.histogram))
    return "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)


def render_histogram_svg(histogram: dict[int, int], log_scale: bool = True) -> str:
    """Bar plot of violating extensions per extra-privilege count.

    With log_scale, bar heights are proportional to log10(count+1) so the
    long tail stays visible. Output bytes are deterministic.
    """
    width, height = 640, 360
    margin_left, margin_bottom, margin_top = 48, 36, 18
    plot_w = width - margin_left - 16
    plot_h = height - margin_bottom - margin_top
    baseline = height - margin_bottom

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{margin_left}" y1="{baseline}" x2="{width - 8}" y2="{baseline}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{margin_left}" y1="{margin_top}" x2="{margin_left}" y2="{baseline}" '
        'stroke="black" stroke-width="1"/>',
    ]
    keys = sorted(histogram)
    if keys:
        values = [
            math.log10(histogram[k] + 1) if log_scale else float(histogram[k]) for k in keys
        ]
        vmax = max(values) or 1.0
        slot = plot_w / len(keys)
        bar_w = round(slot * 0.7, 3)
        for i, (key, value) in enumerate(zip(keys, values)):
            bar_h = round(plot_h * value / vmax, 3)
            x = round(margin_left + slot * i + slot * 0.15, 3)
            y = round(baseline - bar_h, 3)
            parts.append(
                f'<rect class="bar" data-count="{key}" data-value="{histogram[key]}" '
                f'x="{x}" y="{y}" width="{bar_w}" height="{bar_h}" fill="#4477aa"/>'
            )
            parts.append(
                f'<text x="{round(x + bar_w / 2, 3)}" y="{baseline + 14}" '
                f'font-size="10" text-anchor="middle">{key}</text>'
            )
        axis_label = "log10(violating extensions + 1)" if log_scale else "violating extensions"
        parts.append(
            f'<text x="12" y="{margin_top - 4}" font-size="10">{axis_label}</text>'
        )
    parts.append(
        f'<text x="{margin_left + plot_w // 2}" y="{height - 6}" font-size="11" '
        'text-anchor="middle">extra privileges sought</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def fetch_package(ext_id: str, endpoint: str = DEFAULT_FETCH_ENDPOINT) -> bytes:
    """Download one CRX from the store's update URL and sanity-check it."""
    if not _EXTENSION_ID_RE.fullmatch(ext_id):
        raise ValueError(f"{ext_id!r} is not a 32-char a-p extension ID")
    url = endpoint.format(id=ext_id)
    try:
        with urllib.request.urlopen(url) as response:
            data = response.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise NotFound(f"store has no package for {ext_id}") from exc
        raise NetworkError(f"HTTP {exc.code} fetching {ext_id}") from exc
    except urllib.error.URLError as exc:
        raise NetworkError(str(exc.reason)) from exc
    if not data.startswith(CRX_MAGIC):
        raise NotACrx("response does not start with the Cr24 magic")
    return data
