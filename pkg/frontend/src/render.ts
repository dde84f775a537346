/**
 * Figure renderers: each consumes validated CSV data and emits SVG.
 * The figures never recompute a physical quantity: fitted rates come
 * from report.csv, the eigenvalue marker from spectrum.csv.
 */

import { EmptyCsvError, keyValueMap, parseCsv, requireNumeric } from "./csv";
import {
  HEIGHT,
  MARGIN,
  Svg,
  WIDTH,
  fmt,
  heatColor,
  linearScale,
  logScale,
} from "./svg";

const PLOT_X0 = MARGIN.left;
const PLOT_X1 = WIDTH - MARGIN.right;
const PLOT_Y0 = HEIGHT - MARGIN.bottom;
const PLOT_Y1 = MARGIN.top;

/** Log-linear decay curve; slope overlay if a report.csv is supplied. */
export function renderDecay(inputs: string[]): string {
  const traj = requireNumeric(
    parseCsv(inputs[0]),
    ["tau", "hsk_lightcone"],
    inputs[0]
  );
  const pos = traj.filter((r) => r.hsk_lightcone > 0);
  if (pos.length === 0) {
    throw new EmptyCsvError(`${inputs[0]}: no positive diagnostic values`);
  }
  const taus = pos.map((r) => r.tau);
  const vals = pos.map((r) => r.hsk_lightcone);
  const xs = linearScale(Math.min(...taus), Math.max(...taus), PLOT_X0, PLOT_X1);
  const ys = logScale(Math.min(...vals), Math.max(...vals), PLOT_Y0, PLOT_Y1);

  const svg = new Svg("light-cone norm decay");
  svg.axes(xs, ys, "tau", "H_{s,k} light-cone norm");
  svg.polyline(pos.map((r) => [xs(r.tau), ys(r.hsk_lightcone)]), "#1f6fb4");

  if (inputs.length > 1) {
    const report = keyValueMap(parseCsv(inputs[1]), inputs[1]);
    const omega = Number(report.get("omega_fit"));
    if (Number.isFinite(omega)) {
      // anchor the overlay a third of the way in, on the curve
      const i0 = Math.floor(pos.length / 3);
      const t0 = taus[i0];
      const v0 = vals[i0];
      const t1 = taus[taus.length - 1];
      const v1 = v0 * Math.exp(-omega * (t1 - t0));
      svg.polyline(
        [
          [xs(t0), ys(v0)],
          [xs(t1), ys(v1)],
        ],
        "#c0392b"
      );
      svg.add(
        `<text x="${PLOT_X1 - 8}" y="${PLOT_Y1 + 18}" text-anchor="end" ` +
          `fill="#c0392b">fitted rate ${fmt(omega)}</text>`
      );
    }
  }
  return svg.toString();
}

/** Physical-space snapshot: v and dt v against radius. */
export function renderProfile(inputs: string[]): string {
  const rows = requireNumeric(parseCsv(inputs[0]), ["r", "v0", "v1"], inputs[0]);
  const rs = rows.map((r) => r.r);
  const all = rows.flatMap((r) => [r.v0, r.v1]);
  const xs = linearScale(Math.min(...rs), Math.max(...rs), PLOT_X0, PLOT_X1);
  const ys = linearScale(Math.min(...all), Math.max(...all), PLOT_Y0, PLOT_Y1);
  const svg = new Svg("reconstructed physical snapshot");
  svg.axes(xs, ys, "r", "field value");
  svg.polyline(rows.map((r) => [xs(r.r), ys(r.v0)]), "#1f6fb4");
  svg.polyline(rows.map((r) => [xs(r.r), ys(r.v1)]), "#27ae60");
  svg.add(
    `<text x="${PLOT_X1 - 8}" y="${PLOT_Y1 + 18}" text-anchor="end" fill="#1f6fb4">v</text>` +
      `<text x="${PLOT_X1 - 8}" y="${PLOT_Y1 + 36}" text-anchor="end" fill="#27ae60">dt v</text>`
  );
  return svg.toString();
}

/** |mismatch| heat map over the scan rectangle with root markers. */
export function renderSpectrumMap(inputs: string[]): string {
  const map = requireNumeric(
    parseCsv(inputs[0]),
    ["re_lambda", "im_lambda", "mismatch_abs"],
    inputs[0]
  );
  const res = [...new Set(map.map((r) => r.re_lambda))].sort((a, b) => a - b);
  const ims = [...new Set(map.map((r) => r.im_lambda))].sort((a, b) => a - b);
  const xs = linearScale(Math.min(...res), Math.max(...res), PLOT_X0, PLOT_X1);
  const ys = linearScale(Math.min(...ims), Math.max(...ims), PLOT_Y0, PLOT_Y1);
  const logs = map
    .filter((r) => r.mismatch_abs > 0)
    .map((r) => Math.log10(r.mismatch_abs));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);

  const svg = new Svg("connection-mismatch map (log10 |mismatch|)");
  const wcell = res.length > 1 ? xs(res[1]) - xs(res[0]) : 24;
  const hcell = ims.length > 1 ? Math.abs(ys(ims[1]) - ys(ims[0])) : 24;
  for (const r of map) {
    const t =
      r.mismatch_abs > 0 ? (Math.log10(r.mismatch_abs) - lo) / (hi - lo || 1) : 0;
    svg.add(
      `<rect x="${(xs(r.re_lambda) - wcell / 2).toFixed(2)}" ` +
        `y="${(ys(r.im_lambda) - hcell / 2).toFixed(2)}" ` +
        `width="${wcell.toFixed(2)}" height="${hcell.toFixed(2)}" ` +
        `fill="${heatColor(t)}"/>`
    );
  }
  svg.axes(xs, ys, "Re lambda", "Im lambda");

  if (inputs.length > 1) {
    const roots = requireNumeric(
      parseCsv(inputs[1]),
      ["re_lambda", "im_lambda"],
      inputs[1]
    );
    for (const r of roots) {
      svg.add(
        `<circle cx="${xs(r.re_lambda).toFixed(2)}" cy="${ys(r.im_lambda).toFixed(2)}" ` +
          `r="7" fill="none" stroke="white" stroke-width="2.5"/>`
      );
      svg.add(
        `<text x="${(xs(r.re_lambda) + 12).toFixed(2)}" ` +
          `y="${(ys(r.im_lambda) - 10).toFixed(2)}" fill="white">lambda=` +
          `${fmt(r.re_lambda)}</text>`
      );
    }
  }
  return svg.toString();
}

/** Histogram of the inequality-harness ratios, one hue per kind. */
export function renderRatioHist(inputs: string[]): string {
  const rows = requireNumeric(parseCsv(inputs[0]), ["ratio"], inputs[0]);
  const kinds = parseCsv(inputs[0]).rows.map((r) => r["kind"] ?? "ratio");
  const byKind = new Map<string, number[]>();
  rows.forEach((r, i) => {
    const k = kinds[i] || "ratio";
    if (!byKind.has(k)) byKind.set(k, []);
    byKind.get(k)!.push(r.ratio);
  });

  const svg = new Svg("inequality-harness ratio histogram");
  const palette = ["#1f6fb4", "#27ae60", "#c0392b", "#8e44ad"];
  const groups = [...byKind.entries()];
  const panelW = (PLOT_X1 - PLOT_X0) / groups.length;
  groups.forEach(([kind, values], gi) => {
    const x0 = PLOT_X0 + gi * panelW;
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const bins = 10;
    const counts = new Array<number>(bins).fill(0);
    for (const v of values) {
      const b = Math.min(bins - 1, Math.floor(((v - lo) / (hi - lo || 1)) * bins));
      counts[b] += 1;
    }
    const peak = Math.max(...counts);
    const barW = (panelW - 24) / bins;
    counts.forEach((c, b) => {
      const h = (c / peak) * (PLOT_Y0 - PLOT_Y1 - 30);
      svg.add(
        `<rect x="${(x0 + 12 + b * barW).toFixed(2)}" ` +
          `y="${(PLOT_Y0 - h).toFixed(2)}" width="${(barW - 2).toFixed(2)}" ` +
          `height="${h.toFixed(2)}" fill="${palette[gi % palette.length]}"/>`
      );
    });
    svg.add(
      `<text x="${(x0 + panelW / 2).toFixed(2)}" y="${PLOT_Y1 + 18}" ` +
        `text-anchor="middle">${kind} (n=${values.length}, ` +
        `max=${fmt(hi)})</text>`
    );
    svg.add(
      `<line x1="${x0.toFixed(2)}" y1="${PLOT_Y0}" x2="${(x0 + panelW).toFixed(2)}" ` +
        `y2="${PLOT_Y0}" stroke="#333"/>`
    );
  });
  return svg.toString();
}

export const RENDERERS: Record<string, (inputs: string[]) => string> = {
  decay: renderDecay,
  profile: renderProfile,
  "spectrum-map": renderSpectrumMap,
  "ratio-hist": renderRatioHist,
};
