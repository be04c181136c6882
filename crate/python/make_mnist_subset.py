"""Build the bundled 3000-image MNIST subset in IDX format.

Source: the 5000-image MNIST sample shipped inside the `mlxtend` wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns then the label).
Images are shuffled with a fixed seed and the first 3000 are written as
big-endian IDX files (magic 0x00000803 / 0x00000801).

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 python/make_mnist_subset.py /tmp/mlx/mlxtend-*.whl data/mnist-3k
"""
import gzip
import random
import struct
import sys
import zipfile
from pathlib import Path


def main(wheel: str, out_dir: str, count: int = 3000, seed: int = 20200101) -> None:
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    rows = [list(map(int, line.split(","))) for line in raw.strip().splitlines()]
    random.Random(seed).shuffle(rows)
    rows = rows[:count]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for r in rows:
            f.write(bytes(r[:784]))
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(bytes(r[784] for r in rows))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
