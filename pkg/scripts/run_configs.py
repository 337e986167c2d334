"""Run every experiment config in a directory and print one summary line per run.

    python3 scripts/run_configs.py [configs/] [--out runs/]
"""

import argparse
import json
from pathlib import Path

from fiolab.cli import main


def run_all(config_dir: Path, out: Path) -> int:
    failures = 0
    for cfg in sorted(config_dir.glob("*.txt")):
        target = out / cfg.stem
        status = main(["run", "--config", str(cfg), "--out", str(target)])
        if status:
            failures += 1
            print(f"{cfg.stem}: exit {status}")
            continue
        results = json.loads((target / "summary.json").read_text())["results"]
        print(f"{cfg.stem}: {json.dumps(results, sort_keys=True)}")
    return failures


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config_dir", nargs="?", type=Path, default=Path(__file__).resolve().parent.parent / "configs")
    ap.add_argument("--out", type=Path, default=Path("runs"))
    args = ap.parse_args()
    raise SystemExit(1 if run_all(args.config_dir, args.out) else 0)
