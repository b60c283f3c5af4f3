"""Animal pose library: named skeleton entries served to the agents and editor.

The shipped library holds 16 animal/pose combinations. It can be loaded
from the compiled-in table (``load_library("builtin")``) or from a
directory of ``<animal>__<pose>.json`` files in the skeleton schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ._poses import builtin_skeletons
from .skeleton import SchemaError, Skeleton, serialize, deserialize, validate_skeleton

BUILTIN = "builtin"


class LibraryError(Exception):
    pass


class NotFoundError(LibraryError):
    pass


class EmptyLibraryError(LibraryError):
    pass


@dataclass(frozen=True)
class LibraryEntry:
    animal_name: str
    pose_label: str
    skeleton: Skeleton

    def slug(self) -> str:
        return f"{_slug(self.animal_name)}__{_slug(self.pose_label)}"


@dataclass(frozen=True)
class PoseLibrary:
    entries: tuple[LibraryEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def animals(self) -> list[str]:
        seen: list[str] = []
        for e in self.entries:
            if e.animal_name not in seen:
                seen.append(e.animal_name)
        return seen


@dataclass(frozen=True)
class LookupResult:
    entry: LibraryEntry
    ambiguous: bool


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def load_library(path: str | Path = BUILTIN) -> PoseLibrary:
    """Load all entries; fails atomically if any file is malformed."""
    if path == BUILTIN:
        entries = tuple(
            LibraryEntry(s.name, s.pose_description, s) for s in builtin_skeletons()
        )
        return PoseLibrary(entries)

    root = Path(path)
    if not root.is_dir():
        raise OSError(f"library directory not found: {root}")
    entries = []
    for file in sorted(root.glob("*.json")):
        try:
            skeleton = deserialize(file.read_text(encoding="utf-8"))
        except SchemaError as exc:
            raise SchemaError(f"in {file.name}: {exc}", path=file.name) from exc
        report = validate_skeleton(skeleton)
        if not report.ok:
            raise SchemaError(
                f"in {file.name}: invalid skeleton: {'; '.join(report.violations)}",
                path=file.name,
            )
        entries.append(LibraryEntry(skeleton.name, skeleton.pose_description, skeleton))
    return PoseLibrary(tuple(entries))


def write_library_dir(lib: PoseLibrary, path: str | Path) -> list[Path]:
    """Write one JSON file per entry using the ``<animal>__<pose>`` layout."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in lib.entries:
        file = root / f"{entry.slug()}.json"
        file.write_text(serialize(entry.skeleton), encoding="utf-8")
        written.append(file)
    return written


def lookup(lib: PoseLibrary, animal_name: str, pose_label: str | None = None) -> LookupResult:
    """Case-insensitive exact match; first entry in library order wins.

    ``ambiguous`` is set when the pose label was omitted and the animal has
    more than one pose in the library.
    """
    name = animal_name.strip().lower()
    matches = [e for e in lib.entries if e.animal_name.lower() == name]
    if pose_label is not None:
        pose = pose_label.strip().lower()
        matches = [e for e in matches if e.pose_label.lower() == pose]
        if not matches:
            raise NotFoundError(f"no entry for animal={animal_name!r} pose={pose_label!r}")
        return LookupResult(matches[0], ambiguous=False)
    if not matches:
        raise NotFoundError(f"no entry for animal={animal_name!r}")
    return LookupResult(matches[0], ambiguous=len(matches) > 1)
