#!/usr/bin/env python3
"""Regenerate the repo-level ``library/`` directory from the builtin poses."""

from __future__ import annotations

from pathlib import Path

from menagerie.library import load_library, write_library_dir

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    target = ROOT / "library"
    target.mkdir(exist_ok=True)
    for old in target.glob("*.json"):
        old.unlink()
    for path in write_library_dir(load_library(), target):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
