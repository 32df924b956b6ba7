#!/usr/bin/env python3
"""Render the two flow topologies (parallel flow and vortex flow) as SVGs.

Writes portrait_parallel.svg and portrait_vortex.svg plus per-level CSVs,
using the same defaults as the CLI figures.
"""

import argparse
import pathlib
import sys

from abflow.cli import main as cli_main


def run(outdir: pathlib.Path) -> int:
    jobs = [
        ("portrait_parallel", ["portrait", "--delta", "0", "--no-separatrix"]),
        ("portrait_vortex", ["portrait", "--delta", "0.5", "--separatrix"]),
    ]
    for name, argv in jobs:
        target = outdir / name
        code = cli_main(argv + ["--out", str(target), "--format", "all"])
        if code != 0:
            return code
        print(f"wrote {target}/portrait.svg", file=sys.stderr)
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="portraits", help="output directory")
    args = ap.parse_args()
    sys.exit(run(pathlib.Path(args.out)))
