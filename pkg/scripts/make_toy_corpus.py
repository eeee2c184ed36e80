#!/usr/bin/env python3
"""Generate the bundled toy corpus as raw JSONL records.

Records are markdown-flavored Hindi and English documents with an
optional gibberish tail for exercising the perplexity filter. The
output feeds `synthcorpus parse` / `synthcorpus run-all`.
"""

import argparse
import json
from pathlib import Path

from synthcorpus.toygen import make_raw_records


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="src/synthcorpus/data/toy_corpus.jsonl")
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hindi-fraction", type=float, default=0.5)
    parser.add_argument("--noise-fraction", type=float, default=0.05)
    args = parser.parse_args()

    records = make_raw_records(
        args.n,
        args.seed,
        hindi_fraction=args.hindi_fraction,
        noise_fraction=args.noise_fraction,
        source="toy",
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    print(f"wrote {len(records)} records to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
