#!/usr/bin/env python3
"""Generate a planted fixture corpus plus its ground-truth ledger.

Usage:
    python scripts/make_fixture_corpus.py OUT_DIR [--count N] [--seed S]

Writes OUT_DIR/<fixtures> and OUT_DIR.ledger.json; scanning OUT_DIR with
`extscan corpus` must reproduce the ledger histogram exactly.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from extscan.fixtures import generate_fixture_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--count", type=int, default=60)
    parser.add_argument("--seed", type=int, default=1202)
    args = parser.parse_args()

    out = Path(args.out_dir)
    ledger = generate_fixture_corpus(out, count=args.count, seed=args.seed)
    ledger_path = out.with_suffix(".ledger.json")
    ledger_path.write_text(
        json.dumps(
            {
                "extras": ledger.extras,
                "histogram": {str(k): v for k, v in sorted(ledger.histogram().items())},
                "csp_enforced": ledger.csp_enforced,
                "http_script_extensions": ledger.http_script_extensions,
                "exempt_only_skipped": ledger.exempt_only_skipped,
            },
            indent=1,
        )
    )
    print(f"wrote {args.count} fixtures under {out}")
    print(f"wrote ground truth to {ledger_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
