#!/usr/bin/env python3
"""Render the published violating-extensions histogram as table + SVG.

The 2012 study reported, for extensions asking N extra privileges, how
many extensions did so. This reproduces that output at format level:

    python scripts/render_published_stats.py [--svg out.svg]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from extscan.corpus import render_histogram_svg, render_table

PUBLISHED_HISTOGRAM = {
    1: 3237, 2: 923, 3: 250, 4: 92, 5: 52, 6: 19, 7: 5, 8: 6,
    9: 9, 10: 0, 11: 0, 12: 1, 13: 2, 14: 3, 15: 1, 16: 2,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--svg", default=None, help="write the log-scale bar plot here")
    args = parser.parse_args()

    sys.stdout.write(render_table(PUBLISHED_HISTOGRAM))
    if args.svg:
        Path(args.svg).write_text(render_histogram_svg(PUBLISHED_HISTOGRAM, log_scale=True))
        print(f"wrote {args.svg}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
