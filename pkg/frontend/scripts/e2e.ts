/** Live integration drive: exercises the editor core against a running
 * service. Start one first: `menagerie serve --port 8433`. Run with
 * `npm run e2e`. Exits nonzero on the first failed step. */

import { ApiClient } from "../src/api";
import { EditorSession } from "../src/editor";
import { parseObj } from "../src/obj";

const base = process.env.MENAGERIE_URL ?? "http://127.0.0.1:8433";

function check(label: string, ok: boolean): void {
  console.log(`${ok ? "ok " : "FAIL"} ${label}`);
  if (!ok) process.exit(1);
}

const api = new ApiClient(base);
const session = new EditorSession(api);

const animals = await api.listAnimals();
check("library lists 16 entries", animals.length === 16);

await session.loadAnimal("Elephant", "standing");
const before = session.serialized();
session.translateKeypoint("nose", [0, 0, 0.1]);
const exported = await session.exportSkeleton();
check("edited skeleton exports after server validation", exported.length > 0);

session.undoOnce();
check("undo restores the pre-edit bytes", session.serialized() === before);

await session.addAppendage("extra_head", "neck_end");
check("extra head grows to 21 keypoints", session.working!.keypoints.length === 21);

const parsed = parseObj(await session.createMesh());
check("mesh preview parses with per-part groups", parsed.groups.length > 0);

session.select("tail_end");
const report = await session.deleteSelected();
check("delete keeps the skeleton valid", report.ok);

console.log("live editor-to-service drive complete");
