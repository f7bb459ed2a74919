// Parser for the experiment scatter tables (group,label,x,y,score).
// The table is consumed as-is; the 2-D projection was computed server-side.

export interface ScatterRow {
  group: string;
  label: string;
  x: number;
  y: number;
  score: number;
}

export function parseReport(text: string): ScatterRow[] {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length === 0 || lines[0] !== "group,label,x,y,score") {
    throw new Error(`unexpected report header: ${lines[0] ?? "<empty>"}`);
  }
  const rows: ScatterRow[] = [];
  for (const line of lines.slice(1)) {
    if (!line.trim()) continue;
    const parts = line.split(",");
    if (parts.length !== 5) throw new Error(`bad report row: ${line}`);
    const [group, label, x, y, score] = parts;
    const row = { group, label, x: Number(x), y: Number(y), score: Number(score) };
    if (!Number.isFinite(row.x) || !Number.isFinite(row.y) || !Number.isFinite(row.score)) {
      throw new Error(`non-numeric report row: ${line}`);
    }
    rows.push(row);
  }
  return rows;
}

export function groupRows(rows: ScatterRow[]): Map<string, ScatterRow[]> {
  const groups = new Map<string, ScatterRow[]>();
  for (const row of rows) {
    const bucket = groups.get(row.group);
    if (bucket) bucket.push(row);
    else groups.set(row.group, [row]);
  }
  return groups;
}

export interface Scale {
  toPx(x: number, y: number): [number, number];
}

export function makeScale(
  rows: ScatterRow[],
  width: number,
  height: number,
  margin = 24,
): Scale {
  const xs = rows.map((r) => r.x);
  const ys = rows.map((r) => r.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return {
    toPx(x: number, y: number): [number, number] {
      const px = margin + ((x - xMin) / xSpan) * (width - 2 * margin);
      // flip y so larger values plot upward
      const py = height - margin - ((y - yMin) / ySpan) * (height - 2 * margin);
      return [px, py];
    },
  };
}
