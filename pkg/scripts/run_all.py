"""Run every shipped config through the CLI with --check and summarise."""

import argparse
import sys
import time
from pathlib import Path

from hdosc import cli

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", type=Path, default=ROOT / "configs")
    parser.add_argument("--out", type=Path, default=ROOT / "results")
    args = parser.parse_args()

    codes = {}
    for path in sorted(args.configs.glob("*.json")):
        experiment = "op-error" if path.stem.startswith("op_error") else path.stem
        start = time.perf_counter()
        print(f"== {path.name}")
        codes[path.name] = cli.main([experiment, "--config", str(path), "--out", str(args.out / f"{path.stem}.csv"), "--check"])
        print(f"   exit {codes[path.name]} in {time.perf_counter() - start:.1f}s")
    failed = [name for name, code in codes.items() if code]
    print(f"\n{len(codes) - len(failed)}/{len(codes)} configs passed their checks")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
