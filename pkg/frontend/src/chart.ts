/** Axis scaling, tick placement, and number formatting for line charts. */

export interface Scale {
  (v: number): number; // data value -> pixel coordinate
  ticks: number[];
  format(v: number): string;
}

export function formatNumber(v: number): string {
  if (v === 0) return "0";
  const mag = Math.abs(v);
  if (mag >= 1e4 || mag < 1e-3) {
    return v.toExponential(0).replace("e+", "e").replace("e-", "e-");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const pow = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mult * pow >= raw) return mult * pow;
  }
  return 10 * pow;
}

export function linearScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
): Scale {
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const step = niceStep(hi - lo, 5);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  const scale = ((v: number) =>
    pxLo + ((v - lo) / (hi - lo)) * (pxHi - pxLo)) as Scale;
  scale.ticks = ticks;
  scale.format = formatNumber;
  return scale;
}

export function logScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
): Scale {
  if (!(lo > 0) || !(hi > 0)) throw new Error("log scale needs positive bounds");
  let llo = Math.log10(lo);
  let lhi = Math.log10(hi);
  if (lhi - llo < 1e-9) {
    llo -= 0.5;
    lhi += 0.5;
  }
  const ticks: number[] = [];
  const stride = Math.max(1, Math.ceil((lhi - llo) / 6));
  for (let e = Math.ceil(llo); e <= Math.floor(lhi + 1e-9); e += stride) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length === 0) ticks.push(Math.pow(10, Math.round((llo + lhi) / 2)));
  const scale = ((v: number) =>
    pxLo + ((Math.log10(v) - llo) / (lhi - llo)) * (pxHi - pxLo)) as Scale;
  scale.ticks = ticks;
  scale.format = (v: number) => `1e${Math.round(Math.log10(v))}`;
  return scale;
}

export const PALETTE: [number, number, number][] = [
  [214, 39, 40],
  [31, 119, 180],
  [44, 160, 44],
  [255, 127, 14],
  [148, 103, 189],
  [140, 86, 75],
  [23, 190, 207],
  [127, 127, 127],
];
