#!/usr/bin/env python3
"""Download the Fashion MNIST IDX archives into a local data directory.

The library itself never touches the network; run this once on a
machine with internet access, then point the CLI / tests at the
directory (QTNN_DATA_DIR or ./data).
"""

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

FILES = (
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
)

MIRRORS = (
    "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/",
    "https://github.com/zalandoresearch/fashion-mnist/raw/master/data/fashion/",
)


def fetch(name: str, out_dir: Path) -> Path:
    target = out_dir / name
    if target.exists():
        print(f"{name}: already present")
        return target
    last_error = None
    for mirror in MIRRORS:
        url = mirror + name
        try:
            print(f"{name}: downloading from {url}")
            with urllib.request.urlopen(url, timeout=60) as response:
                payload = response.read()
            target.write_bytes(payload)
            print(f"{name}: {len(payload)} bytes, sha256 {hashlib.sha256(payload).hexdigest()[:16]}...")
            return target
        except Exception as exc:  # noqa: BLE001
            last_error = exc
            print(f"{name}: {exc}", file=sys.stderr)
    raise SystemExit(f"could not download {name}: {last_error}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", default="data", help="target directory (default: ./data)")
    args = parser.parse_args()
    out_dir = Path(args.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in FILES:
        fetch(name, out_dir)
    print(f"done; point QTNN_DATA_DIR at {out_dir.resolve()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
