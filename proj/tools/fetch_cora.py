#!/usr/bin/env python3
"""Rebuild data/cora from the copy of Cora bundled in the pgl 2.2.6 wheel on PyPI.

    python3 tools/fetch_cora.py [--sag build/sag] [--out data/cora] [--seed 1]
"""

import argparse
import hashlib
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

WHEEL = "pgl==2.2.6"
SHA256 = {
    "cora.cites": "316d45e0e48387392c70cc3e3915e43f6f5c147ea45c973971e2c9140aaadacf",
    "cora.content": "0955f03baddbea9911f53814d7781129b71b066e5b442d0a5bd51f439c442082",
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sag", default="build/sag")
    ap.add_argument("--out", default="data/cora")
    ap.add_argument("--seed", default="1")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "--only-binary=:all:",
             "--platform", "manylinux1_x86_64", "--python-version", "310", "-d", str(tmp), WHEEL],
            check=True,
        )
        wheel = next(tmp.glob("pgl-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            for name, digest in SHA256.items():
                data = z.read(f"pgl/data/cora/{name}")
                if hashlib.sha256(data).hexdigest() != digest:
                    sys.exit(f"checksum mismatch for {name}")
                (tmp / name).write_bytes(data)
        subprocess.run(
            [args.sag, "convert", "--edges", str(tmp / "cora.cites"), "--features", str(tmp / "cora.content"),
             "--out", args.out, "--seed", args.seed],
            check=True,
        )


if __name__ == "__main__":
    main()
