/** Tag cloud: font size grows with log-scaled weight, layout seeded by date. */

import type { CloudEntry } from './api.js';

export const MIN_FONT_PX = 12;
export const MAX_FONT_PX = 34;

/**
 * Linear interpolation over log(1 + weight) between the day's extremes.
 * Equal weights all land on the minimum size; otherwise strictly monotone.
 */
export function fontSizePx(
  weight: number,
  minWeight: number,
  maxWeight: number,
  minPx: number = MIN_FONT_PX,
  maxPx: number = MAX_FONT_PX,
): number {
  const low = Math.log1p(minWeight);
  const high = Math.log1p(maxWeight);
  if (high <= low) return minPx;
  const fraction = (Math.log1p(weight) - low) / (high - low);
  return minPx + fraction * (maxPx - minPx);
}

/** Deterministic small PRNG so a given day always lays out the same way. */
export function seededShuffle<T>(items: T[], seedText: string): T[] {
  let seed = 2166136261;
  for (let index = 0; index < seedText.length; index += 1) {
    seed = Math.imul(seed ^ seedText.charCodeAt(index), 16777619) >>> 0;
  }
  const result = items.slice();
  for (let index = result.length - 1; index > 0; index -= 1) {
    seed = (Math.imul(seed, 1664525) + 1013904223) >>> 0;
    const swap = seed % (index + 1);
    const held = result[index] as T;
    result[index] = result[swap] as T;
    result[swap] = held;
  }
  return result;
}

export function renderTagCloud(
  container: HTMLElement,
  entries: CloudEntry[],
  date: string,
): void {
  container.textContent = '';
  if (entries.length === 0) {
    const placeholder = document.createElement('p');
    placeholder.className = 'cloud-empty';
    placeholder.textContent = 'no bot activity';
    container.appendChild(placeholder);
    return;
  }
  const weights = entries.map((entry) => entry.weight);
  const minWeight = Math.min(...weights);
  const maxWeight = Math.max(...weights);
  for (const entry of seededShuffle(entries, date)) {
    const span = document.createElement('span');
    span.className = `cloud-entry kind-${entry.kind}`;
    span.textContent = entry.value;
    span.title = `${entry.kind}: ${entry.weight}`;
    span.dataset.weight = String(entry.weight);
    span.style.fontSize = `${fontSizePx(entry.weight, minWeight, maxWeight).toFixed(2)}px`;
    container.appendChild(span);
  }
}
