/** Number and indicator formatting. Probabilities display at 3 decimals. */

/** Threshold below which a delta renders as "no change". */
export const ARROW_EPS = 5e-4;

export function prob3(p: number): string {
  return p.toFixed(3);
}

export function arrow(delta: number, eps: number = ARROW_EPS): "↑" | "↓" | "·" {
  if (delta > eps) return "↑";
  if (delta < -eps) return "↓";
  return "·";
}

export function signedDelta(delta: number): string {
  const text = Math.abs(delta).toFixed(3);
  if (delta > 0) return `+${text}`;
  if (delta < 0) return `-${text}`;
  return text;
}

export function percentWidth(p: number): string {
  const clamped = Math.max(0, Math.min(1, p));
  return `${(clamped * 100).toFixed(1)}%`;
}
