// Client-side mirror of the single-string property grammar, used only for
// inline form feedback; the service stays the authority on submit.

const UNITS = ['V', 'kV', 'VA', 'kVA', 'MVA', 'W', 'MW', 'VAr', 'MVAr', 'ohm', 'pu'];
const UNIT_BY_LOWER = new Map(UNITS.map((u) => [u.toLowerCase(), u]));
const QUALIFIERS = ['3-ph', '1-ph'];

export interface ParseResult {
  ok: boolean;
  error?: string;
}

export function checkProperty(raw: string, schema: string[]): ParseResult {
  const slots = schema.map((s) => ({
    kind: s.replace(/\?$/, ''),
    optional: s.endsWith('?'),
  }));
  const tokens = raw.trim().split(/\s+/).filter((t) => t.length > 0);
  const required = slots.filter((s) => !s.optional).length;
  if (tokens.length < required || tokens.length > slots.length) {
    return { ok: false, error: `expected ${required}..${slots.length} values` };
  }
  let ti = 0;
  let remaining = tokens.length;
  for (let i = 0; i < slots.length; i += 1) {
    const slot = slots[i]!;
    const neededAfter = slots.slice(i + 1).filter((s) => !s.optional).length;
    if (slot.optional && remaining - 1 < neededAfter) {
      continue;
    }
    if (ti >= tokens.length) {
      if (slot.optional) continue;
      return { ok: false, error: `missing ${slot.kind}` };
    }
    const token = tokens[ti]!;
    ti += 1;
    remaining -= 1;
    if (slot.kind === 'magnitude') {
      const value = Number(token);
      if (!Number.isFinite(value)) {
        return { ok: false, error: `'${token}' is not a number` };
      }
    } else if (slot.kind === 'unit') {
      if (!UNIT_BY_LOWER.has(token.toLowerCase())) {
        return { ok: false, error: `unknown unit '${token}'` };
      }
    } else if (slot.kind === 'qualifier') {
      if (!QUALIFIERS.includes(token.toLowerCase())) {
        return { ok: false, error: `unknown qualifier '${token}'` };
      }
    }
    // word slots accept anything
  }
  if (ti !== tokens.length) {
    return { ok: false, error: 'too many values' };
  }
  return { ok: true };
}
