/**
 * Minimal deterministic SVG scaffolding: scales, axes, paths.
 * No timestamps, no randomness: identical inputs give identical bytes.
 */

export const WIDTH = 800;
export const HEIGHT = 520;
export const MARGIN = { top: 40, right: 30, bottom: 56, left: 78 };

export interface Scale {
  (x: number): number;
  ticks(): number[];
}

export function linearScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number
): Scale {
  const span = hi - lo || 1;
  const fn = ((x: number) =>
    outLo + ((x - lo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = () => {
    const step = niceStep(span / 6);
    const first = Math.ceil(lo / step) * step;
    const out: number[] = [];
    for (let t = first; t <= hi + 1e-12 * Math.abs(span); t += step) {
      out.push(Number(t.toPrecision(12)));
    }
    return out;
  };
  return fn;
}

export function logScale(
  lo: number,
  hi: number,
  outLo: number,
  outHi: number
): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const fn = ((x: number) =>
    outLo + ((Math.log10(x) - llo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = () => {
    const out: number[] = [];
    const step = Math.max(1, Math.round(span / 6));
    for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += step) {
      out.push(Math.pow(10, e));
    }
    return out.length >= 2 ? out : [lo, hi];
  };
  return fn;
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(raw) || 1)));
  const unit = raw / mag;
  const nice = unit >= 5 ? 10 : unit >= 2 ? 5 : unit >= 1 ? 2 : 1;
  return nice * mag;
}

export function fmt(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 1e4 || ax < 1e-3) return x.toExponential(0);
  return Number(x.toPrecision(6)).toString();
}

export class Svg {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
        `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
        `font-family="sans-serif" font-size="13">`
    );
    this.parts.push(
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`
    );
    this.parts.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" ` +
        `font-size="16">${escapeXml(title)}</text>`
    );
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  axes(xs: Scale, ys: Scale, xlabel: string, ylabel: string): void {
    const { top, right, bottom, left } = MARGIN;
    const x0 = left;
    const x1 = WIDTH - right;
    const y0 = HEIGHT - bottom;
    const y1 = top;
    this.add(
      `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
        `fill="none" stroke="#333"/>`
    );
    for (const t of xs.ticks()) {
      const px = xs(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.add(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 5}" stroke="#333"/>`);
      this.add(
        `<text x="${px.toFixed(2)}" y="${y0 + 20}" text-anchor="middle">${fmt(t)}</text>`
      );
    }
    for (const t of ys.ticks()) {
      const py = ys(t);
      if (py < y1 - 0.5 || py > y0 + 0.5) continue;
      this.add(`<line x1="${x0 - 5}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="#333"/>`);
      this.add(
        `<text x="${x0 - 9}" y="${(py + 4).toFixed(2)}" text-anchor="end">${fmt(t)}</text>`
      );
    }
    this.add(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle">${escapeXml(xlabel)}</text>`
    );
    this.add(
      `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
        `transform="rotate(-90 20 ${(y0 + y1) / 2})">${escapeXml(ylabel)}</text>`
    );
  }

  polyline(points: [number, number][], color: string, width = 1.8): void {
    const path = points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)} ${y.toFixed(2)}`)
      .join("");
    this.add(`<path d="${path}" fill="none" stroke="${color}" stroke-width="${width}"/>`);
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Small perceptual-ish colormap (dark blue -> yellow). */
export function heatColor(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const stops: [number, number, number][] = [
    [13, 8, 135],
    [84, 2, 163],
    [156, 23, 158],
    [216, 55, 107],
    [250, 112, 53],
    [253, 180, 47],
    [240, 249, 33],
  ];
  const pos = c * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(pos));
  const frac = pos - i;
  const mix = stops[i].map((v, k) => Math.round(v + frac * (stops[i + 1][k] - v)));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}
