#!/usr/bin/env python3
"""Download the four MNIST IDX files into a data directory.

Usage:
    python scripts/fetch_mnist.py [--dest data] [--base-url URL]

The default mirror serves the canonical gzipped IDX files. After download
the files are parsed to verify magic numbers and record counts.
"""
import argparse
import sys
import urllib.request
from pathlib import Path

FILES = (
    ("train-images-idx3-ubyte.gz", 60000),
    ("train-labels-idx1-ubyte.gz", 60000),
    ("t10k-images-idx3-ubyte.gz", 10000),
    ("t10k-labels-idx1-ubyte.gz", 10000),
)
DEFAULT_BASE = "https://ossci-datasets.s3.amazonaws.com/mnist/"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data")
    parser.add_argument("--base-url", default=DEFAULT_BASE)
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    base = args.base_url.rstrip("/") + "/"
    for name, _ in FILES:
        target = dest / name
        if target.exists():
            print(f"{name}: already present")
            continue
        print(f"fetching {base}{name}")
        with urllib.request.urlopen(base + name) as response:
            target.write_bytes(response.read())

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from sqnn.dataset import load_idx

    for (images_name, expected), (labels_name, _) in zip(FILES[::2], FILES[1::2]):
        images, labels = load_idx(dest / images_name, dest / labels_name)
        if images.shape[0] != expected:
            print(f"unexpected count in {images_name}: {images.shape[0]}", file=sys.stderr)
            return 1
        print(f"{images_name}: {images.shape[0]} images of {images.shape[1]}x{images.shape[2]} ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
