import { describe, expect, it, vi } from 'vitest';

import { renderTimeline } from '../src/timeline.js';
import { fixtureTimeline, point } from './fixtures.js';

function container(): HTMLElement {
  const element = document.createElement('div');
  document.body.appendChild(element);
  return element;
}

describe('timeline panel', () => {
  it('renders one selectable column per defined day', () => {
    const element = container();
    renderTimeline(element, fixtureTimeline(), null, () => {});
    const columns = element.querySelectorAll('button.day-column');
    expect(columns).toHaveLength(8);
    expect(element.querySelectorAll('.day-bar')).toHaveLength(8);
  });

  it('shows the API percentage string verbatim', () => {
    const element = container();
    renderTimeline(element, [point('2024-01-05', 1.0666666)], null, () => {});
    expect(element.querySelector('.day-value')!.textContent).toBe('+106.7%');
  });

  it('renders undefined days as gaps, not zero-height bars', () => {
    const element = container();
    const points = [point('2024-01-01', 0.0), point('2024-01-02', null)];
    renderTimeline(element, points, null, () => {});
    const columns = element.querySelectorAll('.day-column');
    // The defined zero day still has a bar; the undefined day has none.
    expect(columns[0]!.querySelector('.day-bar')).not.toBeNull();
    expect(columns[1]!.querySelector('.day-bar')).toBeNull();
    expect(columns[1]!.querySelector('.day-bar-area.gap')).not.toBeNull();
    expect(columns[1]!.querySelector('.day-value')!.textContent).toBe('n/a');
  });

  it('marks the selected day and reports clicks', () => {
    const element = container();
    const onSelect = vi.fn();
    renderTimeline(element, fixtureTimeline(), '2024-01-03', onSelect);
    const selected = element.querySelector('.day-column.selected') as HTMLElement;
    expect(selected.dataset.date).toBe('2024-01-03');
    (element.querySelector('[data-date="2024-01-06"]') as HTMLElement).click();
    expect(onSelect).toHaveBeenCalledWith('2024-01-06');
  });
});
