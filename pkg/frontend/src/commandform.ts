import type { ParamSpecDoc } from "./types.js";

export interface FormField {
  name: string;
  widget: "number" | "text" | "select" | "checkbox";
  placeholder: string;
  choices?: string[];
}

/** Form layout for a model's parameter schema, in declaration order. */
export function formFields(schema: ParamSpecDoc[]): FormField[] {
  return schema.map((spec) => {
    if (spec.type === "choice") {
      return {
        name: spec.name,
        widget: "select" as const,
        placeholder: String(spec.default ?? ""),
        choices: spec.choices ?? [],
      };
    }
    if (spec.type === "flag") {
      return { name: spec.name, widget: "checkbox" as const, placeholder: "" };
    }
    const widget = spec.type === "string" ? ("text" as const) : ("number" as const);
    const bounds = spec.min !== undefined && spec.max !== undefined
      ? `${spec.min}..${spec.max}` : "";
    return {
      name: spec.name,
      widget,
      placeholder: `default ${spec.default}${bounds ? ` (${bounds})` : ""}`,
    };
  });
}

/** Collect only explicitly filled fields, typed per the schema. Empty
 * inputs are omitted so defaults stay server-side. */
export function valuesFromForm(
  schema: ParamSpecDoc[],
  raw: Record<string, string | boolean>,
): Record<string, unknown> {
  const values: Record<string, unknown> = {};
  for (const spec of schema) {
    const entry = raw[spec.name];
    if (entry === undefined || entry === "") continue;
    if (spec.type === "flag") {
      if (entry === true) values[spec.name] = true;
    } else if (spec.type === "int") {
      values[spec.name] = parseInt(String(entry), 10);
    } else if (spec.type === "float") {
      values[spec.name] = parseFloat(String(entry));
    } else {
      values[spec.name] = String(entry);
    }
  }
  return values;
}

/** Expansion size shown before generating; the command list itself always
 * comes from the grid endpoint. */
export function gridCount(axes: { values: unknown[] }[]): number {
  return axes.reduce((n, axis) => n * axis.values.length, 1);
}
