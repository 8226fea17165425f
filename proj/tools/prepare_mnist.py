#!/usr/bin/env python3
"""Convert the digits bundled with the npm `mnist` package into IDX files.

The package stores 10,000 MNIST digits as pixel/255 rounded to three
decimals, one JSON file per class. Every stored value maps back to a unique
byte, so the conversion is lossless.

    npm pack mnist            # fetches mnist-<version>.tgz
    python3 tools/prepare_mnist.py mnist-1.1.0.tgz data/
"""

import argparse
import json
import struct
import sys
import tarfile
from pathlib import Path

PIXELS = 28 * 28


def read_digit_files(source: Path):
    """Yields (label, flat float list) per class from a .tgz or unpacked dir."""
    if source.is_dir():
        for label in range(10):
            path = source / "src" / "digits" / f"{label}.json"
            yield label, json.loads(path.read_text())["data"]
        return
    with tarfile.open(source) as tar:
        for label in range(10):
            member = tar.extractfile(f"package/src/digits/{label}.json")
            yield label, json.load(member)["data"]


def to_byte(value: float) -> int:
    byte = round(value * 255)
    if not 0 <= byte <= 255 or abs(byte / 255 - value) > 6e-4:
        raise ValueError(f"pixel value {value} does not map to a byte")
    return byte


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", type=Path, help="mnist-*.tgz or its unpacked package/ dir")
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--prefix", default="mnist10k")
    args = parser.parse_args()

    images = bytearray()
    labels = bytearray()
    for label, flat in read_digit_files(args.source):
        if len(flat) % PIXELS:
            raise ValueError(f"class {label}: {len(flat)} values is not a multiple of 784")
        images.extend(to_byte(v) for v in flat)
        labels.extend([label] * (len(flat) // PIXELS))

    count = len(labels)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    image_path = args.out_dir / f"{args.prefix}-images-idx3-ubyte"
    label_path = args.out_dir / f"{args.prefix}-labels-idx1-ubyte"
    image_path.write_bytes(struct.pack(">IIII", 0x803, count, 28, 28) + bytes(images))
    label_path.write_bytes(struct.pack(">II", 0x801, count) + bytes(labels))
    print(f"wrote {count} images to {image_path} and {label_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
