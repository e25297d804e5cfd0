#!/usr/bin/env python3
"""Extract one relation's (head, tail) pairs from a CSV into a normalized TSV.

See contrib/README.md for the target file layout. Kept dependency-free on
purpose; raw dataset releases differ in column naming, so the mapping is
given on the command line instead of hard-coded.
"""

import argparse
import csv
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="source CSV with a header row")
    parser.add_argument("output", help="destination TSV (head<TAB>tail lines)")
    parser.add_argument("--head-column", required=True)
    parser.add_argument("--tail-column", required=True)
    parser.add_argument("--delimiter", default=",", help="CSV delimiter (default ',')")
    parser.add_argument(
        "--explode-tail",
        default=None,
        metavar="SEP",
        help="treat the tail cell as a SEP-separated list, one edge per element",
    )
    args = parser.parse_args(argv)

    written = 0
    with open(args.input, encoding="utf-8", newline="") as src, open(
        args.output, "w", encoding="utf-8", newline="\n"
    ) as dst:
        reader = csv.DictReader(src, delimiter=args.delimiter)
        for column in (args.head_column, args.tail_column):
            if reader.fieldnames is None or column not in reader.fieldnames:
                print(f"error: column {column!r} not in {reader.fieldnames}", file=sys.stderr)
                return 2
        for row in reader:
            head = (row[args.head_column] or "").strip()
            raw_tail = (row[args.tail_column] or "").strip()
            if not head or not raw_tail:
                continue
            tails = raw_tail.split(args.explode_tail) if args.explode_tail else [raw_tail]
            for tail in (t.strip() for t in tails):
                if tail:
                    dst.write(f"{head}\t{tail}\n")
                    written += 1
    print(f"wrote {written} edges to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
