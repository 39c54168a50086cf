import Papa from "papaparse";

export type Row = Record<string, number>;

/** Parse a numeric CSV and check that every expected column is present. */
export function parseCsv(text: string, requiredColumns: string[], kind: string): Row[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${kind}: CSV parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = requiredColumns.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `${kind}: missing required column(s) ${missing.join(", ")}; found ${fields.join(", ")}`,
    );
  }
  return parsed.data.map((raw) => {
    const row: Row = {};
    for (const c of requiredColumns) {
      const v = Number(raw[c]);
      if (!Number.isFinite(v)) {
        throw new Error(`${kind}: non-numeric value '${raw[c]}' in column ${c}`);
      }
      row[c] = v;
    }
    return row;
  });
}

export function column(rows: Row[], name: string): number[] {
  return rows.map((r) => r[name]);
}
