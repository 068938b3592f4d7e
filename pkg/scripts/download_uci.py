"""Fetch a raw UCI data file for use with ``--input``.

The data files are not shipped with the package.  Pass the archive URL of
the file you want; ``.gz`` payloads are decompressed on the way to disk.

    python3 scripts/download_uci.py URL data/census.csv
    lowrank-perturb rank-select --input data/census.csv
"""

import argparse
import gzip
import shutil
import sys
import urllib.request
from pathlib import Path


def fetch(url, dest):
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    with urllib.request.urlopen(url) as resp:
        src = gzip.GzipFile(fileobj=resp) if url.endswith(".gz") else resp
        with open(dest, "wb") as fh:
            shutil.copyfileobj(src, fh)
    return dest


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("url")
    ap.add_argument("dest")
    args = ap.parse_args(argv)
    try:
        path = fetch(args.url, args.dest)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path} ({path.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
