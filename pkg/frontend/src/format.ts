// Deterministic overlay-label formatting. Tests compare rendered canvas
// labels against the solve response through these exact functions, so keep
// the output stable.

export function overlayLabel(values: Record<string, unknown>): string {
  if ('v_pu' in values && 'theta_deg' in values) {
    const v = values['v_pu'] as number;
    const th = values['theta_deg'] as number;
    return `${v.toFixed(4)} pu ∠ ${th.toFixed(3)}°`;
  }
  if ('p_send_pu' in values) {
    const p = values['p_send_pu'] as number;
    const q = values['q_send_pu'] as number;
    return `P ${p.toFixed(4)}  Q ${q.toFixed(4)}`;
  }
  const residuals = Object.keys(values).filter((k) => k.startsWith('residual_'));
  if (residuals.length > 0) {
    const parts = residuals
      .sort()
      .map((k) => `${k.slice('residual_'.length)} ${(values[k] as number).toFixed(4)}`);
    const flag = values['flagged'] ? ' !' : '';
    return `r: ${parts.join(' ')}${flag}`;
  }
  const pu = Object.keys(values).filter((k) => k.endsWith('_pu')).sort();
  if (pu.length > 0) {
    return pu
      .map((k) => {
        const value = values[k];
        const num = Array.isArray(value) ? (value as number[]) : null;
        const text = num
          ? `${num[0]!.toFixed(4)}${num[1]! >= 0 ? '+' : ''}${num[1]!.toFixed(4)}j`
          : (value as number).toFixed(4);
        return `${k.slice(0, -'_pu'.length)} ${text}`;
      })
      .join('  ');
  }
  return '';
}
