export interface ParsedObj {
  positions: number[];          // flat xyz triples
  triangles: number[];          // flat vertex-index triples (0-based)
  groups: { name: string; start: number; count: number }[]; // triangle ranges
}

/** Minimal OBJ reader for the meshes the service returns: v, f, g lines;
 * polygon faces are fan-triangulated, v/vt/vn index forms accepted. */
export function parseObj(text: string): ParsedObj {
  const positions: number[] = [];
  const triangles: number[] = [];
  const groups: { name: string; start: number; count: number }[] = [];
  let current: { name: string; start: number; count: number } | null = null;

  const vertexCount = () => positions.length / 3;

  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    if (parts[0] === "v" && parts.length >= 4) {
      positions.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (parts[0] === "g") {
      current = { name: parts[1] ?? "default", start: triangles.length / 3, count: 0 };
      groups.push(current);
    } else if (parts[0] === "f") {
      const idx = parts.slice(1).map((token) => {
        const i = Number(token.split("/")[0]);
        return i > 0 ? i - 1 : vertexCount() + i;
      });
      if (idx.length < 3) throw new Error("face with fewer than 3 vertices");
      for (let k = 1; k < idx.length - 1; k++) {
        triangles.push(idx[0], idx[k], idx[k + 1]);
        if (current) current.count += 1;
      }
    }
  }
  const n = vertexCount();
  for (const i of triangles) {
    if (i < 0 || i >= n) throw new Error("face index out of range");
  }
  return { positions, triangles, groups };
}
