/** Client view state: the selected day is the only thing that changes data. */

import type { EntityKind, TimelinePoint } from './api.js';

export interface PanelFlags {
  loading: boolean;
  error: string | null;
}

export interface ViewState {
  windowDays: number;
  points: TimelinePoint[];
  selectedDate: string | null;
  activeKind: EntityKind;
  panels: { cloud: PanelFlags; entities: PanelFlags };
}

export function initialState(windowDays = 8): ViewState {
  return {
    windowDays,
    points: [],
    selectedDate: null,
    activeKind: 'hashtag',
    panels: {
      cloud: { loading: false, error: null },
      entities: { loading: false, error: null },
    },
  };
}

/** Most recent day whose primary index is defined; falls back to the last day. */
export function defaultSelectedDate(points: TimelinePoint[]): string | null {
  for (let index = points.length - 1; index >= 0; index -= 1) {
    const point = points[index];
    if (point && point.defined.bev) return point.date;
  }
  const last = points[points.length - 1];
  return last ? last.date : null;
}

export function withTimeline(state: ViewState, points: TimelinePoint[]): ViewState {
  const next = { ...state, points };
  const stillShown = points.some((p) => p.date === state.selectedDate);
  if (!stillShown) {
    next.selectedDate = defaultSelectedDate(points);
  }
  return next;
}

export function selectDate(state: ViewState, date: string): ViewState {
  if (!state.points.some((p) => p.date === date)) {
    return state; // selection must stay within the displayed window
  }
  return { ...state, selectedDate: date };
}

export function selectKind(state: ViewState, kind: EntityKind): ViewState {
  return { ...state, activeKind: kind };
}
