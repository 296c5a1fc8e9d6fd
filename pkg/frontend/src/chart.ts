// Activity chart rendered from /report buckets as a self-contained SVG:
// entries as upward bars, exits as downward bars, occupancy as a line.

import type { Report } from './types.js';

export interface ChartOptions {
  width?: number;
  height?: number;
}

export function activityChartSvg(report: Report, options: ChartOptions = {}): string {
  const width = options.width ?? 640;
  const height = options.height ?? 160;
  const buckets = report.buckets;
  if (buckets.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">` +
      'no events in window</text></svg>'
    );
  }

  const mid = height / 2;
  const barMax = Math.max(1, ...buckets.map((b) => Math.max(b.entries, b.exits)));
  const occMax = Math.max(1, ...buckets.map((b) => Math.abs(b.occupancy_end)));
  const slot = width / buckets.length;
  const barWidth = Math.max(1, slot * 0.6);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">`,
    `<line x1="0" y1="${mid}" x2="${width}" y2="${mid}" class="chart-axis"/>`,
  ];

  buckets.forEach((b, i) => {
    const x = i * slot + (slot - barWidth) / 2;
    if (b.entries > 0) {
      const h = (b.entries / barMax) * (mid - 8);
      parts.push(
        `<rect x="${x.toFixed(1)}" y="${(mid - h).toFixed(1)}" ` +
          `width="${barWidth.toFixed(1)}" height="${h.toFixed(1)}" class="chart-entries"/>`,
      );
    }
    if (b.exits > 0) {
      const h = (b.exits / barMax) * (mid - 8);
      parts.push(
        `<rect x="${x.toFixed(1)}" y="${mid.toFixed(1)}" ` +
          `width="${barWidth.toFixed(1)}" height="${h.toFixed(1)}" class="chart-exits"/>`,
      );
    }
  });

  const points = buckets
    .map((b, i) => {
      const x = (i + 0.5) * slot;
      const y = mid - (b.occupancy_end / occMax) * (mid - 8);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(' ');
  parts.push(`<polyline points="${points}" class="chart-occupancy" fill="none"/>`);
  parts.push('</svg>');
  return parts.join('');
}
