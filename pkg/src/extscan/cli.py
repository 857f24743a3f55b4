"""Command-line entry point: scan, corpus, audit, simulate-install, fetch, serve.

Exit codes are stable: 0 = clean (severity none/low, audit clean), 2 =
findings (severity medium/high, audit findings), 1 = any error. JSON modes
keep stdout machine-readable; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import __version__
from .analyzer import (
    AnalyzerOptions,
    ApiPermissionMap,
    MODE_FULL,
    MODE_PAPER_COMPAT,
    analyze_package,
)
from .corpus import (
    DEFAULT_FETCH_ENDPOINT,
    fetch_package,
    render_histogram_svg,
    render_table,
    run_corpus,
    stats_csv,
)
from .errors import ExtScanError
from .package import open_package
from .report import serialize_report
from .service import DEFAULT_UPLOAD_LIMIT, ReportStore, create_app
from .storeaudit import (
    ChromeStoreEntry,
    FirefoxStoreEntry,
    audit_chrome_prefs,
    audit_firefox_db,
    inject_chrome_prefs_file,
    inject_firefox_entry,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 2

ENDPOINT_ENV = "EXTSCAN_FETCH_ENDPOINT"


def _fail(exc: ExtScanError | ValueError) -> int:
    code = getattr(exc, "code", "Error")
    message = getattr(exc, "message", str(exc))
    print(json.dumps({"code": code, "message": message}), file=sys.stderr)
    return EXIT_ERROR


def _analyzer_options(args) -> AnalyzerOptions:
    api_map = ApiPermissionMap.from_file(args.map) if args.map else None
    exempt = frozenset(
        token.strip() for token in args.exempt.split(",") if token.strip()
    ) if args.exempt is not None else AnalyzerOptions().exempt
    return AnalyzerOptions(
        mode=MODE_PAPER_COMPAT if args.paper_compat else MODE_FULL,
        exempt=exempt,
        flag_string_urls=args.flag_string_urls,
        api_map=api_map,
    )


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _severity_text(level: str) -> str:
    if not _use_color():
        return level
    colors = {"none": "32", "low": "32", "medium": "33", "high": "31"}
    return f"\x1b[{colors.get(level, '0')}m{level}\x1b[0m"


def _print_text_report(report) -> None:
    over = report.overprivilege
    ident = report.extension_id or "(no id)"
    print(f"{report.name} {report.version}  [{ident}]")
    print(f"manifest v{report.manifest_version}; CSP {'enforced' if report.csp.enforced else 'not enforced'}")
    print(f"severity: {_severity_text(report.severity.level)}")
    for reason in report.severity.reasons:
        print(f"  - {reason}")
    print(f"declared: {', '.join(sorted(over.declared)) or '-'}")
    print(f"used: {', '.join(sorted(over.used)) or '-'}")
    print(f"extra ({over.extra_count}): {', '.join(sorted(over.extra)) or '-'}")
    if over.exempt_ignored:
        print(f"exempt ignored: {', '.join(sorted(over.exempt_ignored))}")
    if over.indeterminate:
        print("note: dynamic code present; usage inference is a lower bound")
    http_count = sum(1 for f in report.network if f.scheme == "http")
    print(f"network findings: {len(report.network)} ({http_count} over http)")
    if report.host_patterns:
        print(f"host patterns: {', '.join(report.host_patterns)}")
    if report.warnings:
        print(f"warnings: {len(report.warnings)}", file=sys.stderr)


def cmd_scan(args) -> int:
    try:
        report = analyze_package(open_package(args.path), _analyzer_options(args))
    except (ExtScanError, ValueError, OSError) as exc:
        return _fail(exc)
    if args.format == "json":
        print(serialize_report(report))
    else:
        _print_text_report(report)
    return EXIT_OK if report.severity.level in ("none", "low") else EXIT_FINDINGS


def cmd_corpus(args) -> int:
    try:
        stats, _reports = run_corpus(args.root, _analyzer_options(args), jobs=args.jobs)
    except (ExtScanError, ValueError, OSError) as exc:
        return _fail(exc)
    sys.stdout.write(render_table(stats.histogram))
    if args.csv:
        Path(args.csv).write_text(stats_csv(stats))
        print(f"wrote {args.csv}", file=sys.stderr)
    if args.svg:
        Path(args.svg).write_text(
            render_histogram_svg(stats.histogram, log_scale=not args.linear_scale)
        )
        print(f"wrote {args.svg}", file=sys.stderr)
    return EXIT_OK


def _read_baseline(path: str | None) -> set[str] | None:
    if path is None:
        return None
    return {
        line.strip() for line in Path(path).read_text().splitlines() if line.strip()
    }


def cmd_audit(args) -> int:
    baseline = _read_baseline(args.baseline)
    try:
        if args.store_kind == "chrome":
            findings = audit_chrome_prefs(Path(args.path).read_text(), baseline=baseline)
        else:
            findings = audit_firefox_db(args.path, baseline=baseline)
    except (ExtScanError, OSError) as exc:
        return _fail(exc)
    print(json.dumps([f.__dict__ for f in findings], indent=1))
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_simulate_install(args) -> int:
    try:
        if args.store_kind == "chrome":
            entry = ChromeStoreEntry(
                id=args.id,
                path=args.install_path or f"extensions/{args.id}",
                location=args.location,
                state=args.state,
                from_webstore=not args.not_from_webstore,
                name=args.name,
                version=args.entry_version,
            )
            inject_chrome_prefs_file(args.path, entry, force=args.force)
            print(json.dumps({"id": entry.id, **entry.payload()}, indent=1))
        else:
            entry = FirefoxStoreEntry(
                id=args.id,
                location=args.ff_location,
                version=args.entry_version,
                active=args.active,
                descriptor=args.descriptor,
            )
            inject_firefox_entry(args.path, entry, force=args.force)
            print(json.dumps(entry.__dict__, indent=1))
    except (ExtScanError, OSError) as exc:
        return _fail(exc)
    return EXIT_OK


def cmd_fetch(args) -> int:
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV) or DEFAULT_FETCH_ENDPOINT
    out = args.out or f"{args.id}.crx"
    try:
        data = fetch_package(args.id, endpoint=endpoint)
        Path(out).write_bytes(data)
    except (ExtScanError, ValueError, OSError) as exc:
        return _fail(exc)
    print(f"wrote {out} ({len(data)} bytes)", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    api_map = ApiPermissionMap.from_file(args.map) if args.map else None
    store = ReportStore(args.store)
    app = create_app(
        store,
        options=AnalyzerOptions(api_map=api_map),
        upload_limit=args.upload_limit,
    )
    # Bind up front so an occupied port is an immediate, clean failure.
    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((args.host, args.port))
    except OSError as exc:
        print(json.dumps({"code": "BindError", "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    config = uvicorn.Config(app, host=args.host, port=args.port, log_level="info")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])
    return EXIT_OK


def _add_analyzer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--paper-compat",
        action="store_true",
        help="scan background scripts only (methodology-reproduction mode)",
    )
    parser.add_argument(
        "--exempt",
        default=None,
        metavar="A,B",
        help="comma-separated exempt permissions (default: notifications)",
    )
    parser.add_argument(
        "--flag-string-urls",
        action="store_true",
        help="also flag http:// string literals (heuristic, off by default)",
    )
    parser.add_argument("--map", default=None, help="path to a permission-map JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extscan",
        description="Static security analysis for browser extensions",
    )
    parser.add_argument("--version", action="version", version=f"extscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="scan one extension package")
    p_scan.add_argument("path", help=".crx / .zip file or unpacked directory")
    p_scan.add_argument("--format", choices=("json", "text"), default="json")
    _add_analyzer_flags(p_scan)
    p_scan.set_defaults(func=cmd_scan)

    p_corpus = sub.add_parser("corpus", help="scan a directory of packages")
    p_corpus.add_argument("root")
    p_corpus.add_argument("--jobs", type=int, default=1, metavar="N")
    p_corpus.add_argument("--csv", default=None, help="write stats CSV here")
    p_corpus.add_argument("--svg", default=None, help="write histogram SVG here")
    p_corpus.add_argument(
        "--linear-scale", action="store_true", help="linear instead of log10 bars"
    )
    _add_analyzer_flags(p_corpus)
    p_corpus.set_defaults(func=cmd_corpus)

    p_audit = sub.add_parser("audit", help="audit an install-store file")
    p_audit.add_argument("store_kind", choices=("chrome", "firefox"))
    p_audit.add_argument("path", help="Preferences JSON / extensions sqlite db")
    p_audit.add_argument("--baseline", default=None, help="file with one known id per line")
    p_audit.set_defaults(func=cmd_audit)

    p_sim = sub.add_parser(
        "simulate-install", help="write a fake install entry into a store fixture"
    )
    p_sim.add_argument("store_kind", choices=("chrome", "firefox"))
    p_sim.add_argument("path")
    p_sim.add_argument("--id", required=True)
    p_sim.add_argument("--name", default="injected")
    p_sim.add_argument("--entry-version", default="1.0", metavar="VER")
    p_sim.add_argument("--force", action="store_true", help="write even into live-profile paths")
    p_sim.add_argument("--install-path", default=None, help="chrome: recorded install path")
    p_sim.add_argument("--location", type=int, default=1, help="chrome: 1=webstore, >=2=sideload")
    p_sim.add_argument("--state", type=int, default=1)
    p_sim.add_argument("--not-from-webstore", action="store_true")
    p_sim.add_argument("--ff-location", default="app-profile", help="firefox: location tag")
    p_sim.add_argument("--active", type=int, default=1, choices=(0, 1))
    p_sim.add_argument("--descriptor", default="")
    p_sim.set_defaults(func=cmd_simulate_install)

    p_fetch = sub.add_parser("fetch", help="download one package from the store")
    p_fetch.add_argument("id")
    p_fetch.add_argument("--out", default=None)
    p_fetch.add_argument(
        "--endpoint",
        default=None,
        help=f"URL template with {{id}} (or set ${ENDPOINT_ENV})",
    )
    p_fetch.set_defaults(func=cmd_fetch)

    p_serve = sub.add_parser("serve", help="run the report REST service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--store", default="./report-store")
    p_serve.add_argument("--upload-limit", type=int, default=DEFAULT_UPLOAD_LIMIT)
    p_serve.add_argument("--map", default=None)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
