"""Finder/Observer/Modifier pipeline adapting library poses to new animals.

The Finder picks the anatomically closest library entry, the Observer plans
keypoint adjustments as strict-JSON instructions, and the Modifier applies
them deterministically in local code. Chat calls go through a pluggable
``ChatBackend``; the scripted mock replays canned responses keyed by a hash
of the exact prompts, so the whole pipeline is reproducible offline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from string import Template
from typing import Protocol

import requests

from .library import EmptyLibraryError, LibraryEntry, NotFoundError, PoseLibrary, lookup
from .skeleton import Skeleton, Vec3, serialize, validate_skeleton

MAX_TOKENS = 4096
TEMPERATURE = 0.9
FINDER_RETRIES = 3

_INSTRUCTION_OPS = ("translate", "set_position", "scale_segment")


class AgentError(Exception):
    pass


class UnparseableResponseError(AgentError):
    def __init__(self, message: str, offending: tuple[str, ...] = ()):
        super().__init__(message)
        self.offending = offending


class UnknownTargetError(AgentError):
    pass


class NonFiniteResultError(AgentError):
    pass


class MissingTranscriptError(AgentError):
    pass


# --- chat backends ----------------------------------------------------------


class ChatBackend(Protocol):
    def complete(
        self,
        system: str,
        user: str,
        *,
        max_tokens: int = MAX_TOKENS,
        temperature: float = TEMPERATURE,
    ) -> str: ...


def prompt_key(system: str, user: str) -> str:
    """Stable key for one (system, user) prompt pair."""
    return hashlib.sha256(system.encode("utf-8") + b"\x00" + user.encode("utf-8")).hexdigest()


class MockChatBackend:
    """Replays canned responses keyed by prompt hash.

    A key may map to a single response or a list consumed in order
    (sticking on the last), which lets tests script retry behavior.
    """

    def __init__(self, responses: dict[str, str | list[str]] | None = None):
        self._responses: dict[str, list[str]] = {}
        self._cursor: dict[str, int] = {}
        for key, value in (responses or {}).items():
            self.add(key, value)

    def add(self, key: str, value: str | list[str]) -> None:
        self._responses[key] = [value] if isinstance(value, str) else list(value)
        self._cursor[key] = 0

    @classmethod
    def from_fixture_dir(cls, path: str | Path) -> "MockChatBackend":
        backend = cls()
        root = Path(path)
        if not root.is_dir():
            raise OSError(f"transcript fixture directory not found: {root}")
        for file in sorted(root.glob("*.json")):
            doc = json.loads(file.read_text(encoding="utf-8"))
            for entry in doc.get("entries", []):
                value = entry.get("responses", entry.get("response"))
                backend.add(entry["key"], value)
        return backend

    @classmethod
    def bundled(cls) -> "MockChatBackend":
        """Mock preloaded with the transcripts shipped in the package."""
        backend = cls()
        base = resources.files("menagerie.data").joinpath("transcripts")
        for file in sorted(base.iterdir(), key=lambda f: f.name):
            if file.name.endswith(".json"):
                doc = json.loads(file.read_text(encoding="utf-8"))
                for entry in doc.get("entries", []):
                    value = entry.get("responses", entry.get("response"))
                    backend.add(entry["key"], value)
        return backend

    def complete(
        self,
        system: str,
        user: str,
        *,
        max_tokens: int = MAX_TOKENS,
        temperature: float = TEMPERATURE,
    ) -> str:
        key = prompt_key(system, user)
        if key not in self._responses:
            raise MissingTranscriptError(
                f"no canned response for prompt key {key[:12]}… "
                f"(user prompt starts: {user[:80]!r})"
            )
        responses = self._responses[key]
        i = self._cursor[key]
        self._cursor[key] = min(i + 1, len(responses) - 1)
        return responses[i]


class HttpChatBackend:
    """Chat-completions client: POST {model, messages, temperature, max_tokens}."""

    def __init__(self, url: str, api_key: str | None = None, model: str = "default",
                 timeout: float = 60.0):
        self.url = url
        self.api_key = api_key
        self.model = model
        self.timeout = timeout

    def complete(
        self,
        system: str,
        user: str,
        *,
        max_tokens: int = MAX_TOKENS,
        temperature: float = TEMPERATURE,
    ) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


# --- prompt templates -------------------------------------------------------


def _load_template(name: str) -> tuple[str, Template]:
    text = resources.files("menagerie.data").joinpath(f"prompts/{name}.txt").read_text("utf-8")
    head, _, body = text.partition("<<<USER>>>")
    system = head.replace("<<<SYSTEM>>>", "").strip()
    return system, Template(body.strip() + "\n")


def _format_positions(s: Skeleton) -> str:
    return "\n".join(
        f"{k.name}: {k.position[0]!r} {k.position[1]!r} {k.position[2]!r}" for k in s.keypoints
    )


def render_finder_prompt(lib: PoseLibrary, animal: str, keypoint_names: tuple[str, ...]) -> tuple[str, str]:
    system, template = _load_template("finder")
    user = template.substitute(
        library="\n".join(f"{e.animal_name} | {e.pose_label}" for e in lib.entries),
        keypoints=", ".join(keypoint_names),
        animal=animal,
    )
    return system, user


def render_observer_prompt(source: LibraryEntry, animal: str, pose: str) -> tuple[str, str]:
    system, template = _load_template("observer")
    s = source.skeleton
    user = template.substitute(
        source_animal=source.animal_name,
        source_pose=source.pose_label,
        animal=animal,
        pose=pose,
        keypoints=", ".join(k.name for k in s.keypoints),
        bones="\n".join(f"{b.parent} -> {b.child}" for b in s.bones),
        positions=_format_positions(s),
    )
    return system, user


def render_modifier_prompt(s: Skeleton, plan_text: str) -> tuple[str, str]:
    system, template = _load_template("modifier")
    user = template.substitute(
        keypoints=", ".join(k.name for k in s.keypoints),
        bones="\n".join(f"{b.parent} -> {b.child}" for b in s.bones),
        plan_text=plan_text,
    )
    return system, user


# --- plan model -------------------------------------------------------------


@dataclass(frozen=True)
class Instruction:
    op: str
    target: str | tuple[str, str]
    value: Vec3 | float

    def to_dict(self) -> dict:
        target = list(self.target) if isinstance(self.target, tuple) else self.target
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"op": self.op, "target": target, "value": value}


@dataclass(frozen=True)
class ObservationPlan:
    instructions: tuple[Instruction, ...] = ()
    commentary: str = ""

    def to_dict(self) -> dict:
        return {
            "instructions": [i.to_dict() for i in self.instructions],
            "commentary": self.commentary,
        }


@dataclass(frozen=True)
class FinderResult:
    chosen: LibraryEntry
    rationale: str = ""


@dataclass(frozen=True)
class Exchange:
    stage: str
    system: str
    user: str
    response: str

    def to_dict(self) -> dict:
        return {"stage": self.stage, "system": self.system, "user": self.user,
                "response": self.response}


@dataclass(frozen=True)
class AdaptationRecord:
    animal: str
    pose: str
    finder: FinderResult
    plan: ObservationPlan
    result: Skeleton
    transcript: tuple[Exchange, ...] = ()

    def to_dict(self) -> dict:
        return {
            "request": {"animal": self.animal, "pose": self.pose},
            "finder": {
                "animal": self.finder.chosen.animal_name,
                "pose": self.finder.chosen.pose_label,
                "rationale": self.finder.rationale,
            },
            "plan": self.plan.to_dict(),
            "result": json.loads(serialize(self.result)),
            "transcript": [e.to_dict() for e in self.transcript],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


# --- response parsing -------------------------------------------------------


def _strip_fences(text: str) -> str:
    t = text.strip()
    if t.startswith("```"):
        first = t.find("\n")
        if first >= 0 and t.endswith("```"):
            t = t[first + 1 : -3].strip()
    return t


def _parse_finder_response(text: str) -> tuple[str, str | None, str]:
    """Returns (animal, pose or None, rationale)."""
    t = _strip_fences(text)
    try:
        doc = json.loads(t)
    except json.JSONDecodeError:
        doc = t.strip().strip('"').rstrip(".")
    if isinstance(doc, dict):
        animal = doc.get("animal")
        if not isinstance(animal, str) or not animal:
            raise UnparseableResponseError("finder reply lacks an 'animal' field", (text,))
        pose = doc.get("pose") if isinstance(doc.get("pose"), str) else None
        reason = doc.get("reason") if isinstance(doc.get("reason"), str) else ""
        return animal, pose, reason
    if isinstance(doc, str) and doc:
        animal, sep, pose = doc.partition(" - ")
        return animal.strip(), (pose.strip() if sep else None), ""
    raise UnparseableResponseError("finder reply is neither JSON nor a name", (text,))


def _parse_instruction(item: object) -> Instruction:
    if not isinstance(item, dict):
        raise ValueError("instruction must be a JSON object")
    op = item.get("op")
    if op not in _INSTRUCTION_OPS:
        raise ValueError(f"unknown op: {op!r}")
    target = item.get("target")
    value = item.get("value")
    if op == "scale_segment":
        if (
            not isinstance(target, list)
            or len(target) != 2
            or not all(isinstance(t, str) and t for t in target)
        ):
            raise ValueError("scale_segment target must be a [parent, child] pair")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise ValueError("scale_segment value must be a positive number")
        return Instruction(op, (target[0], target[1]), float(value))
    if not isinstance(target, str) or not target:
        raise ValueError(f"{op} target must be a keypoint name")
    if (
        not isinstance(value, list)
        or len(value) != 3
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise ValueError(f"{op} value must be a list of 3 numbers")
    vec = (float(value[0]), float(value[1]), float(value[2]))
    if not all(v == v and abs(v) != float("inf") for v in vec):
        raise ValueError(f"{op} value must be finite")
    return Instruction(op, target, vec)


def parse_plan(text: str) -> ObservationPlan:
    """Parse a strict-JSON plan; any bad instruction fails the whole parse."""
    t = _strip_fences(text)
    try:
        doc = json.loads(t)
    except json.JSONDecodeError as exc:
        raise UnparseableResponseError(f"plan is not valid JSON: {exc.msg}", (text,)) from exc
    commentary = ""
    if isinstance(doc, dict):
        commentary = doc.get("commentary", "") if isinstance(doc.get("commentary"), str) else ""
        doc = doc.get("instructions")
    if not isinstance(doc, list):
        raise UnparseableResponseError("plan must be a JSON list of instructions", (text,))
    instructions: list[Instruction] = []
    bad: list[str] = []
    for item in doc:
        try:
            instructions.append(_parse_instruction(item))
        except ValueError as exc:
            bad.append(f"{json.dumps(item, ensure_ascii=False)}: {exc}")
    if bad:
        raise UnparseableResponseError(
            f"{len(bad)} unparseable instruction(s): " + "; ".join(bad), tuple(bad)
        )
    return ObservationPlan(tuple(instructions), commentary)


# --- pipeline stages --------------------------------------------------------


def finder_select(
    backend: ChatBackend,
    lib: PoseLibrary,
    animal: str,
    keypoint_names: tuple[str, ...],
    retries: int = FINDER_RETRIES,
    _log: list[Exchange] | None = None,
) -> FinderResult:
    """Pick the library entry closest to the requested animal.

    Retries when the backend names something outside the library; the
    same prompt is reissued so nondeterministic backends can resample.
    """
    if not lib.entries:
        raise EmptyLibraryError("library has no entries")
    system, user = render_finder_prompt(lib, animal, keypoint_names)
    failures: list[str] = []
    for _ in range(retries + 1):
        response = backend.complete(system, user)
        if _log is not None:
            _log.append(Exchange("finder", system, user, response))
        try:
            name, pose, reason = _parse_finder_response(response)
            found = lookup(lib, name, pose)
        except (UnparseableResponseError, NotFoundError) as exc:
            failures.append(f"{response!r}: {exc}")
            continue
        return FinderResult(found.entry, reason or response.strip())
    raise UnparseableResponseError(
        f"finder gave no usable library animal in {retries + 1} attempts: "
        + " | ".join(failures[-2:]),
        tuple(failures),
    )


def observer_plan(
    backend: ChatBackend,
    source: LibraryEntry,
    animal: str,
    pose_description: str,
    _log: list[Exchange] | None = None,
) -> ObservationPlan:
    """Ask for the adjustment plan and parse it; bad instructions are fatal."""
    system, user = render_observer_prompt(source, animal, pose_description)
    response = backend.complete(system, user)
    if _log is not None:
        _log.append(Exchange("observer", system, user, response))
    return parse_plan(response)


def plan_from_text(backend: ChatBackend, s: Skeleton, plan_text: str) -> ObservationPlan:
    """Optional pass: have the backend restate a free-text plan as strict JSON."""
    system, user = render_modifier_prompt(s, plan_text)
    return parse_plan(backend.complete(system, user))


def modifier_apply(skeleton: Skeleton, plan: ObservationPlan) -> Skeleton:
    """Apply instructions in order, purely functionally.

    ``scale_segment`` moves the child keypoint and everything attached
    beyond it (never crossing back through the parent) so the segment
    length is multiplied by the factor.
    """
    pos = {k.name: k.position for k in skeleton.keypoints}
    adj = skeleton.adjacency()
    bone_pairs = {frozenset((b.parent, b.child)) for b in skeleton.bones}

    for ins in plan.instructions:
        if ins.op == "translate":
            if ins.target not in pos:
                raise UnknownTargetError(f"translate: unknown keypoint {ins.target!r}")
            p, d = pos[ins.target], ins.value
            pos[ins.target] = (p[0] + d[0], p[1] + d[1], p[2] + d[2])
        elif ins.op == "set_position":
            if ins.target not in pos:
                raise UnknownTargetError(f"set_position: unknown keypoint {ins.target!r}")
            pos[ins.target] = ins.value
        elif ins.op == "scale_segment":
            parent, child = ins.target
            for end in (parent, child):
                if end not in pos:
                    raise UnknownTargetError(f"scale_segment: unknown keypoint {end!r}")
            if frozenset((parent, child)) not in bone_pairs:
                raise UnknownTargetError(f"scale_segment: no bone {parent}-{child}")
            factor = float(ins.value)
            pp, cp = pos[parent], pos[child]
            delta = tuple((factor - 1.0) * (c - p) for c, p in zip(cp, pp))
            for name in _beyond(child, parent, adj):
                p = pos[name]
                pos[name] = (p[0] + delta[0], p[1] + delta[1], p[2] + delta[2])

    for name, p in pos.items():
        if not all(c == c and abs(c) != float("inf") for c in p):
            raise NonFiniteResultError(f"non-finite position on keypoint {name!r}")
    return skeleton.with_positions(pos)


def _beyond(child: str, parent: str, adj: dict[str, set[str]]) -> set[str]:
    """Keypoints reachable from child without ever visiting parent."""
    seen = {child}
    stack = [child]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt != parent and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def adapt_pose(
    backend: ChatBackend,
    lib: PoseLibrary,
    animal: str,
    pose_description: str,
    retries: int = FINDER_RETRIES,
) -> AdaptationRecord:
    """Full pipeline: find a reference, plan adjustments, apply them."""
    log: list[Exchange] = []

    def _stage(stage: str, fn):
        try:
            return fn()
        except AgentError as exc:
            exc.args = (f"[{stage}] {exc}",) + exc.args[1:]
            raise
        except (EmptyLibraryError, NotFoundError) as exc:
            raise type(exc)(f"[{stage}] {exc}") from exc

    names = tuple(k.name for e in lib.entries[:1] for k in e.skeleton.keypoints)
    finder = _stage(
        "finder", lambda: finder_select(backend, lib, animal, names, retries, _log=log)
    )
    plan = _stage(
        "observer",
        lambda: observer_plan(backend, finder.chosen, animal, pose_description, _log=log),
    )
    result = _stage("modifier", lambda: modifier_apply(finder.chosen.skeleton, plan))
    result = replace(result, name=animal, pose_description=pose_description)
    report = validate_skeleton(result)
    if not report.ok:
        raise NonFiniteResultError(
            "[modifier] adapted skeleton failed validation: " + "; ".join(report.violations)
        )
    return AdaptationRecord(animal, pose_description, finder, plan, result, tuple(log))
