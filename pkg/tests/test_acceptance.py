"""Acceptance suite: one test per release criterion, strictest tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion.
"""

import hashlib
import io
import json
import math
import random
import re
import time
import zipfile

import pytest
from fastapi.testclient import TestClient

from extscan.analyzer import (
    AnalyzerOptions,
    ApiPermissionMap,
    MODE_FULL,
    MODE_PAPER_COMPAT,
    analyze_package,
    scan_api_usage,
)
from extscan.corpus import render_histogram_svg, render_table, run_corpus, stats_csv
from extscan.fixtures import generate_fixture_corpus
from extscan.package import derive_extension_id, open_package, parse_crx_header
from extscan.service import ReportStore, create_app
from extscan.storeaudit import (
    ChromeStoreEntry,
    FirefoxStoreEntry,
    audit_chrome_prefs,
    audit_firefox_db,
    chrome_prefs_ids,
    create_firefox_fixture_db,
    firefox_db_ids,
    inject_chrome_entry,
    inject_firefox_entry,
)

from conftest import make_crx2, manifest_bytes, minimal_manifest, write_extension_dir

PAPER_HISTOGRAM = {
    1: 3237, 2: 923, 3: 250, 4: 92, 5: 52, 6: 19, 7: 5, 8: 6,
    9: 9, 10: 0, 11: 0, 12: 1, 13: 2, 14: 3, 15: 1, 16: 2,
}

_BAR = re.compile(
    r'<rect class="bar" data-count="(\d+)" data-value="(\d+)" '
    r'x="[\d.]+" y="[\d.]+" width="[\d.]+" height="([\d.]+)"'
)


def _ok(label: str) -> None:
    print(f"ACCEPTANCE PASS: {label}")


def test_planted_corpus_exactness(tmp_path):
    """60 planted fixtures covering extras 0..16; histogram == ledger, <10s."""
    root = tmp_path / "corpus"
    ledger = generate_fixture_corpus(root, count=60, seed=1202)
    planted_counts = sorted(set(ledger.extras.values()))
    assert planted_counts == list(range(17)), "coverage of 0..16 required"
    assert any(p.unused_notifications for p in ledger.planted)

    started = time.perf_counter()
    stats, reports = run_corpus(root, jobs=1)
    elapsed = time.perf_counter() - started

    assert stats.scanned == 60 and stats.failed == 0
    assert stats.histogram == ledger.histogram(), "histogram must equal ledger exactly"
    assert elapsed < 10.0, f"single-threaded scan took {elapsed:.2f}s"
    _ok(f"planted-corpus exactness (60 fixtures, {elapsed:.2f}s single-threaded)")


def test_paper_table_reproduction():
    """The published table reproduces verbatim; SVG bars follow log10(count+1)."""
    table = render_table(PAPER_HISTOGRAM)
    lines = table.strip().split("\n")
    assert lines[0] == "Number of extra privileges sought\tNumber of violating extensions"
    pairs = [tuple(int(x) for x in line.split("\t")) for line in lines[1:]]
    assert pairs == sorted(PAPER_HISTOGRAM.items()), "every (count, violators) pair verbatim"

    svg = render_histogram_svg(PAPER_HISTOGRAM, log_scale=True)
    bars = {int(m.group(1)): float(m.group(3)) for m in _BAR.finditer(svg)}
    assert len(bars) == 16
    height_1 = bars[1]
    for count, violators in PAPER_HISTOGRAM.items():
        expected = height_1 * math.log10(violators + 1) / math.log10(3237 + 1)
        if expected == 0:
            assert bars[count] == 0.0
        else:
            assert abs(bars[count] - expected) / expected <= 0.005, count
    _ok("paper-table and log-histogram format reproduction (<=0.5% height error)")


def test_methodology_mode_check(tmp_path):
    """Popup-only chrome.cookies use: extra=1 under paper-compat, 0 under full."""
    root = write_extension_dir(
        tmp_path / "ext",
        minimal_manifest(
            permissions=["cookies"],
            browser_action={"default_popup": "popup.html"},
        ),
        {
            "popup.html": b'<html><script src="popup.js"></script></html>',
            "popup.js": b"chrome.cookies.getAll({}, render);",
        },
    )
    compat = analyze_package(open_package(root), AnalyzerOptions(mode=MODE_PAPER_COMPAT))
    full = analyze_package(open_package(root), AnalyzerOptions(mode=MODE_FULL))
    assert compat.overprivilege.extra_count == 1
    assert full.overprivilege.extra_count == 0
    _ok("methodology mode: background-scripts-only counting reproduced")


def _adversarial_files() -> list[tuple[str, str]]:
    prefixes = [
        "chrome.cookies", "chrome.tabs", "chrome.history", "chrome.bookmarks",
        "chrome.management", "chrome.webRequest", "chrome.contextMenus",
        "chrome.downloads", "chrome.notifications", "webkitNotifications",
        "navigator.geolocation", "chrome.proxy", "chrome.idle",
        "chrome.webNavigation", "chrome.storage",
    ]
    shapes = [
        "// call {p}.get() later\nvar ok = 1;\n",
        "/* {p}.query({{}}) */\nfunction f() {{ return 2; }}\n",
        'var s = "{p}.remove";\n',
        "var t = '{p}.onChanged';\n",
        "var u = `literal {p}.set`;\n",
        "var v = `before ${{1 + 1}} {p}.getAll after`;\n",
        "/* first line\n   {p}.create()\n   last line */\nvar w = 3;\n",
        'var esc = "quote \\" then {p}.open";\n',
        "// {p}\n// {p}.twice()\n",
        "var x = 9; /* tail comment {p}.probe() ",  # unterminated on purpose
    ]
    files = []
    for i in range(25):
        p = prefixes[i % len(prefixes)]
        q = prefixes[(i + 7) % len(prefixes)]
        body = shapes[i % len(shapes)].format(p=p) + shapes[(i + 3) % len(shapes)].format(p=q)
        files.append((f"adv{i:02d}.js", body))
    return files


def test_sanitization_soundness():
    """25 adversarial files: API names only inside masked regions -> 0 evidence."""
    api_map = ApiPermissionMap.load_default()
    files = _adversarial_files()
    assert len(files) == 25
    scan = scan_api_usage(files, api_map)
    assert scan.evidence == [], [
        (e.file, e.line, e.api_path) for e in scan.evidence
    ]
    # control: the scanner does see unmasked uses
    control = scan_api_usage([("control.js", "chrome.cookies.getAll({});")], api_map)
    assert [e.permission for e in control.evidence] == ["cookies"]
    _ok("sanitization soundness: 0 false positives across 25 adversarial files")


def test_notifications_exemption(tmp_path):
    """Unused notifications-only manifest: extra=0, exempt_ignored={notifications}."""
    root = write_extension_dir(
        tmp_path / "ext",
        minimal_manifest(
            permissions=["notifications"],
            background={"scripts": ["bg.js"]},
        ),
        {"bg.js": b"console.log('no api use');"},
    )
    report = analyze_package(open_package(root))
    assert report.overprivilege.extra_count == 0
    assert report.overprivilege.exempt_ignored == {"notifications"}
    _ok("notifications exemption excluded from violation counts")


def test_crx_parsing_against_independent_oracles(tmp_path):
    """zip_offset formula, payload-vs-independent-unzip, and the ID digit map."""
    key = bytes((i * 7 + 3) % 256 for i in range(162))
    sig = bytes(range(128))
    files = {
        "manifest.json": manifest_bytes(),
        "background.js": b"chrome.tabs.query({});",
        "assets/logo.txt": b"logo bytes",
    }
    blob = make_crx2(files, key=key, sig=sig)
    header = parse_crx_header(blob)
    assert header.zip_offset == 16 + len(key) + len(sig) == 306

    # independent unzip of the embedded archive
    with zipfile.ZipFile(io.BytesIO(blob[header.zip_offset:])) as zf:
        independent = {name: zf.read(name) for name in zf.namelist()}
    crx_path = tmp_path / "fixture.crx"
    crx_path.write_bytes(blob)
    pkg = open_package(crx_path)
    assert pkg.files == independent

    # independent SHA-256 + digit-map oracle
    expected_id = hashlib.sha256(key).hexdigest()[:32].translate(
        str.maketrans("0123456789abcdef", "abcdefghijklmnop")
    )
    assert pkg.id == expected_id
    assert derive_extension_id(b"\x00") == "godealjmppldhkjijmkfeeogllhiakcm"
    _ok("CRX2 parsing: offset formula, payload equality, ID derivation")


def test_inject_audit_soundness(tmp_path):
    """>=20 randomized inject/audit rounds on both stores: 0 FP, 0 FN."""
    rng = random.Random(20120925)
    rounds = 0

    for case in range(12):  # chrome
        prefs = json.dumps({"profile": {"n": case}})
        known: list[str] = []
        for k in range(rng.randint(0, 4)):
            eid = "".join(rng.choice("abcdefghijklmnop") for _ in range(32))
            prefs = inject_chrome_entry(
                prefs, ChromeStoreEntry(id=eid, path=f"p{k}", name=f"n{k}", version="1.0")
            )
            known.append(eid)
        baseline = chrome_prefs_ids(prefs)
        assert audit_chrome_prefs(prefs, baseline=baseline) == [], "false positive"
        new_id = "".join(rng.choice("abcdefghijklmnop") for _ in range(32))
        injected = inject_chrome_entry(
            prefs,
            ChromeStoreEntry(
                id=new_id,
                path="evil",
                location=rng.choice([1, 2]),
                from_webstore=rng.choice([True, False]),
                name="evil",
                version="6.6.6",
            ),
        )
        flagged = {f.entry_id for f in audit_chrome_prefs(injected, baseline=baseline)}
        assert flagged == {new_id}, f"chrome case {case}: flagged {flagged}"
        rounds += 1

    for case in range(12):  # firefox
        db = tmp_path / f"ff{case}.sqlite"
        create_firefox_fixture_db(
            db,
            [
                FirefoxStoreEntry(id=f"known{k}@fixture.test", active=0)
                for k in range(rng.randint(0, 4))
            ],
        )
        baseline = firefox_db_ids(db)
        assert audit_firefox_db(db, baseline=baseline) == [], "false positive"
        entry = FirefoxStoreEntry(id=f"evil{case}@fixture.test", active=rng.choice([0, 1]))
        inject_firefox_entry(db, entry)
        flagged = {f.entry_id for f in audit_firefox_db(db, baseline=baseline)}
        assert flagged == {entry.id}, f"firefox case {case}: flagged {flagged}"
        rounds += 1

    assert rounds >= 20
    _ok(f"inject/audit soundness: {rounds} randomized rounds, 0 FP / 0 FN")


def test_service_round_trip(tmp_path):
    """POST a CRX, GET it back byte-identical; GET before POST is 404."""
    key = b"acceptance-service-key"
    crx = make_crx2(
        {
            "manifest.json": manifest_bytes(
                permissions=["tabs", "cookies"], background={"scripts": ["bg.js"]}
            ),
            "bg.js": b"chrome.tabs.get(1);",
        },
        key=key,
    )
    ext_id = derive_extension_id(key)
    client = TestClient(create_app(ReportStore(tmp_path / "store")))

    before = client.get(f"/api/v1/reports/{ext_id}/latest")
    assert before.status_code == 404

    posted = client.post(
        "/api/v1/scan", content=crx, headers={"content-type": "application/octet-stream"}
    )
    assert posted.status_code == 200
    fetched = client.get(f"/api/v1/reports/{ext_id}/latest")
    assert fetched.status_code == 200
    assert fetched.content == posted.content, "stored and returned documents byte-identical"
    _ok("service round-trip: 404 before POST, byte-identical after")


def test_corpus_output_determinism(tmp_path):
    """CSV, table and SVG bytes identical for --jobs 1 and --jobs 8."""
    root = tmp_path / "corpus"
    generate_fixture_corpus(root, count=30, seed=77)
    stats1, _ = run_corpus(root, jobs=1)
    stats8, _ = run_corpus(root, jobs=8)
    assert stats_csv(stats1).encode() == stats_csv(stats8).encode()
    assert render_table(stats1.histogram).encode() == render_table(stats8.histogram).encode()
    assert (
        render_histogram_svg(stats1.histogram).encode()
        == render_histogram_svg(stats8.histogram).encode()
    )
    _ok("corpus outputs byte-identical across parallelism degrees")
