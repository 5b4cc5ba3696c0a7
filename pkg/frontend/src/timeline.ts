/** Timeline panel: one selectable column per day, gaps for undefined days. */

import type { TimelinePoint } from './api.js';

const BAR_AREA_PX = 120;

export function renderTimeline(
  container: HTMLElement,
  points: TimelinePoint[],
  selectedDate: string | null,
  onSelect: (date: string) => void,
): void {
  container.textContent = '';
  const maxAbs = Math.max(
    1e-9,
    ...points.filter((p) => p.bev !== null).map((p) => Math.abs(p.bev as number)),
  );
  for (const point of points) {
    const column = document.createElement('button');
    column.type = 'button';
    column.className = 'day-column';
    column.dataset.date = point.date;
    if (point.date === selectedDate) column.classList.add('selected');

    const value = document.createElement('span');
    value.className = 'day-value';
    value.textContent = point.defined.bev ? point.bev_pct : 'n/a';

    const barArea = document.createElement('span');
    barArea.className = 'day-bar-area';
    if (point.defined.bev && point.bev !== null) {
      const bar = document.createElement('span');
      bar.className = point.bev >= 0 ? 'day-bar positive' : 'day-bar negative';
      const height = Math.max(2, Math.round((Math.abs(point.bev) / maxAbs) * BAR_AREA_PX));
      bar.style.height = `${height}px`;
      barArea.appendChild(bar);
    } else {
      // A gap, never a zero-height bar: zero is a meaningful value.
      barArea.classList.add('gap');
      barArea.title = 'no baseline data';
    }

    const label = document.createElement('span');
    label.className = 'day-label';
    label.textContent = point.date.slice(5); // MM-DD

    column.append(value, barArea, label);
    column.addEventListener('click', () => onSelect(point.date));
    container.appendChild(column);
  }
}
