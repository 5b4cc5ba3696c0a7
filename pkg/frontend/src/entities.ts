/** Ranked entity lists: three tabs, rows exactly in API order, external links. */

import type { EntityEntry, EntityKind } from './api.js';

export const ENTITY_KINDS: EntityKind[] = ['hashtag', 'mention', 'link'];

export function renderEntityTabs(
  container: HTMLElement,
  activeKind: EntityKind,
  onSelect: (kind: EntityKind) => void,
): void {
  container.textContent = '';
  for (const kind of ENTITY_KINDS) {
    const tab = document.createElement('button');
    tab.type = 'button';
    tab.className = 'entity-tab';
    tab.dataset.kind = kind;
    tab.textContent = `${kind}s`;
    if (kind === activeKind) tab.classList.add('active');
    tab.addEventListener('click', () => onSelect(kind));
    container.appendChild(tab);
  }
}

export function renderEntityList(container: HTMLElement, entries: EntityEntry[]): void {
  container.textContent = '';
  if (entries.length === 0) {
    const row = document.createElement('li');
    row.className = 'entity-empty';
    row.textContent = 'nothing here for this day';
    container.appendChild(row);
    return;
  }
  // No client-side re-sorting: the API order is the ranking.
  for (const entry of entries) {
    const row = document.createElement('li');
    row.className = 'entity-row';
    const link = document.createElement('a');
    link.href = entry.explorer_url;
    link.target = '_blank';
    link.rel = 'noopener noreferrer';
    link.textContent = entry.value;
    const count = document.createElement('span');
    count.className = 'entity-count';
    count.textContent = String(entry.count);
    row.append(link, count);
    container.appendChild(row);
  }
}
