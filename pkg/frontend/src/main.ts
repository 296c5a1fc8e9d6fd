import { ApiClient, ApiError } from './api.js';
import { activityChartSvg } from './chart.js';
import { parsePgm, toRgba } from './pgm.js';
import { Poller } from './poller.js';
import type { ControlAction, Counts, CrossingEvent, StatusResponse } from './types.js';
import {
  formatTimestamp,
  loadBaseUrl,
  loadCapacity,
  overCapacity,
  saveBaseUrl,
  saveCapacity,
} from './viewmodel.js';

const REPORT_REFRESH_MS = 5000;
const REPORT_BUCKET_US = 10_000_000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

let client = new ApiClient(loadBaseUrl(localStorage));
let capacityLimit = loadCapacity(localStorage);
let lastCounts: Counts | null = null;

function renderCounts(counts: Counts): void {
  lastCounts = counts;
  el('tile-entries').textContent = String(counts.entries);
  el('tile-exits').textContent = String(counts.exits);
  el('tile-regret-enter').textContent = String(counts.regret_enter);
  el('tile-regret-exit').textContent = String(counts.regret_exit);
  el('tile-occupancy').textContent = String(counts.occupancy);
  renderCapacityBanner();
}

function renderCapacityBanner(): void {
  const over = lastCounts !== null && overCapacity(lastCounts.occupancy, capacityLimit);
  el('over-capacity').hidden = !over;
  if (over && lastCounts && capacityLimit !== null) {
    el('over-capacity').textContent =
      `Over capacity: ${lastCounts.occupancy} inside, limit ${capacityLimit}`;
  }
}

function renderStatus(status: StatusResponse): void {
  const live = status.running && !status.paused;
  const dot = el('running-dot');
  dot.classList.toggle('on', live);
  dot.classList.toggle('off', !live);
  el('running-label').textContent = status.paused
    ? 'stopped'
    : status.eos
      ? 'end of stream'
      : 'running';
  el('status-source').textContent = status.source;
  el('status-backend').textContent = status.backend;
  el('status-frames').textContent =
    `${status.frames_processed} frames, ${status.frames_dropped} dropped`;
  el('status-degraded').hidden = !status.degraded;
  if (status.degraded && status.error) {
    el('status-degraded').title = status.error;
  }
}

function snapshotCell(event: CrossingEvent): HTMLElement {
  const cell = document.createElement('td');
  if (event.snapshot_id === null) {
    const placeholder = document.createElement('div');
    placeholder.className = 'thumb placeholder';
    placeholder.textContent = 'none';
    cell.appendChild(placeholder);
    return cell;
  }
  const canvas = document.createElement('canvas');
  canvas.className = 'thumb';
  cell.appendChild(canvas);
  client
    .snapshotBytes(event.snapshot_id)
    .then((bytes) => {
      const image = parsePgm(bytes);
      canvas.width = image.width;
      canvas.height = image.height;
      const ctx = canvas.getContext('2d');
      if (!ctx) return;
      ctx.putImageData(new ImageData(toRgba(image), image.width, image.height), 0, 0);
    })
    .catch(() => {
      const placeholder = document.createElement('div');
      placeholder.className = 'thumb placeholder';
      placeholder.textContent = 'missing';
      cell.replaceChildren(placeholder);
    });
  return cell;
}

function appendEvents(fresh: CrossingEvent[]): void {
  const body = el<HTMLTableSectionElement>('event-rows');
  for (const event of fresh) {
    const row = document.createElement('tr');
    const badge = document.createElement('td');
    badge.innerHTML = `<span class="badge ${event.kind}">${event.kind}</span>`;
    row.appendChild(badge);
    const seq = document.createElement('td');
    seq.textContent = `#${event.seq}`;
    row.appendChild(seq);
    const time = document.createElement('td');
    time.textContent = formatTimestamp(event.timestamp_us);
    row.appendChild(time);
    const occ = document.createElement('td');
    occ.textContent = String(event.counts_after.occupancy);
    row.appendChild(occ);
    row.appendChild(snapshotCell(event));
    body.prepend(row);
  }
  el('event-empty').hidden = body.children.length > 0;
}

function showError(message: string | null): void {
  const banner = el('error-banner');
  banner.hidden = message === null;
  if (message !== null) banner.textContent = message;
}

const poller = new Poller(client, {
  onCounts: renderCounts,
  onStatus: renderStatus,
  onEvents: appendEvents,
  onStale: (stale) => {
    el('stale-badge').hidden = !stale;
  },
  onError: showError,
});

async function refreshChart(): Promise<void> {
  try {
    const report = await client.report(REPORT_BUCKET_US);
    el('chart').innerHTML = activityChartSvg(report);
  } catch {
    // the poller already surfaces connectivity problems
  }
}

async function runControl(action: ControlAction): Promise<void> {
  const needsConfirm: Record<string, string> = {
    reset: 'Reset all counters to zero?',
    clear_logs: 'Delete the event log, analysis log and all snapshots?',
  };
  const prompt = needsConfirm[action];
  if (prompt && !window.confirm(prompt)) return;
  try {
    const ack = await client.control(action);
    renderStatus(ack.status);
    renderCounts(ack.status.counts);
    if (action === 'clear_logs') {
      el<HTMLTableSectionElement>('event-rows').replaceChildren();
      el('event-empty').hidden = false;
      void refreshChart();
    }
    showError(null);
  } catch (err) {
    showError(err instanceof ApiError ? `${action} rejected: ${err.message}` : String(err));
  }
}

function wireUp(): void {
  const baseInput = el<HTMLInputElement>('base-url');
  baseInput.value = client.baseUrl;
  baseInput.addEventListener('change', () => {
    saveBaseUrl(localStorage, baseInput.value);
    window.location.reload();
  });

  const capacityInput = el<HTMLInputElement>('capacity-limit');
  capacityInput.value = capacityLimit === null ? '' : String(capacityLimit);
  capacityInput.addEventListener('input', () => {
    const raw = capacityInput.value.trim();
    capacityLimit = raw === '' ? null : Math.max(0, Math.floor(Number(raw)) || 0);
    saveCapacity(localStorage, capacityLimit);
    renderCapacityBanner();
  });

  for (const action of ['start', 'stop', 'reset', 'clear_logs'] as ControlAction[]) {
    el(`btn-${action}`).addEventListener('click', () => void runControl(action));
  }

  poller.start();
  void refreshChart();
  setInterval(() => void refreshChart(), REPORT_REFRESH_MS);
}

wireUp();
