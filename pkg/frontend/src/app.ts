/** Controller: wires the API to the panels; day selection drives everything.
 *
 * Panel fetches run concurrently and apply last-write-wins keyed by the
 * selected date, so a slow response for a day the user has already left is
 * discarded instead of tearing the view across two dates.
 */

import { ApiClient, WarmingUp } from './api.js';
import type { EntityEntry, EntityKind, TimelinePoint } from './api.js';
import { ENTITY_KINDS, renderEntityList, renderEntityTabs } from './entities.js';
import { initialState, selectDate, selectKind, withTimeline } from './state.js';
import type { ViewState } from './state.js';
import { renderTagCloud } from './tagcloud.js';
import { renderTimeline } from './timeline.js';

export interface DashboardElements {
  banner: HTMLElement;
  timeline: HTMLElement;
  selectedDate: HTMLElement;
  cloud: HTMLElement;
  tabs: HTMLElement;
  list: HTMLElement;
}

export function findElements(root: Document | HTMLElement): DashboardElements {
  const pick = (id: string): HTMLElement => {
    const element = root.querySelector<HTMLElement>(`#${id}`);
    if (!element) throw new Error(`missing #${id}`);
    return element;
  };
  return {
    banner: pick('banner'),
    timeline: pick('timeline'),
    selectedDate: pick('selected-date'),
    cloud: pick('cloud'),
    tabs: pick('entity-tabs'),
    list: pick('entity-list'),
  };
}

export class Dashboard {
  state: ViewState;
  private lists = new Map<EntityKind, EntityEntry[]>();
  private listsDate: string | null = null;

  constructor(
    private api: ApiClient,
    private elements: DashboardElements,
    windowDays = 8,
  ) {
    this.state = initialState(windowDays);
  }

  async init(): Promise<void> {
    try {
      const points = await this.api.timeline(this.state.windowDays);
      this.elements.banner.hidden = true;
      this.state = withTimeline(this.state, points);
      this.renderTimelinePanel();
      if (this.state.selectedDate !== null) {
        await this.loadDayPanels(this.state.selectedDate);
      }
    } catch (error) {
      if (error instanceof WarmingUp) {
        this.showRetryBanner(error.retryAfterSeconds);
        return;
      }
      throw error;
    }
  }

  private showRetryBanner(retryAfterSeconds: number): void {
    const banner = this.elements.banner;
    banner.hidden = false;
    banner.textContent = `warming up, retrying in ${retryAfterSeconds}s`;
    setTimeout(() => {
      void this.init();
    }, retryAfterSeconds * 1000);
  }

  async handleSelectDate(date: string): Promise<void> {
    const next = selectDate(this.state, date);
    if (next === this.state) return;
    this.state = next;
    this.renderTimelinePanel();
    await this.loadDayPanels(date);
  }

  handleSelectKind(kind: EntityKind): void {
    this.state = selectKind(this.state, kind);
    renderEntityTabs(this.elements.tabs, kind, (k) => this.handleSelectKind(k));
    renderEntityList(this.elements.list, this.lists.get(kind) ?? []);
  }

  private renderTimelinePanel(): void {
    renderTimeline(
      this.elements.timeline,
      this.state.points,
      this.state.selectedDate,
      (date) => void this.handleSelectDate(date),
    );
  }

  /** Fetch cloud and all three lists for one date; stale responses are dropped. */
  async loadDayPanels(date: string): Promise<void> {
    this.state.panels.cloud = { loading: true, error: null };
    this.state.panels.entities = { loading: true, error: null };
    this.elements.selectedDate.textContent = date;

    const cloudPromise = this.api.tagcloud(date);
    const listPromises = ENTITY_KINDS.map(
      (kind) => [kind, this.api.entities(date, kind)] as const,
    );

    try {
      const cloud = await cloudPromise;
      if (this.state.selectedDate === date) {
        renderTagCloud(this.elements.cloud, cloud, date);
        this.elements.cloud.dataset.date = date;
        this.state.panels.cloud = { loading: false, error: null };
      }
    } catch (error) {
      if (this.state.selectedDate === date) {
        this.state.panels.cloud = { loading: false, error: String(error) };
        this.elements.cloud.textContent = 'failed to load tag cloud';
      }
    }

    const fetched = new Map<EntityKind, EntityEntry[]>();
    try {
      for (const [kind, promise] of listPromises) {
        fetched.set(kind, await promise);
      }
    } catch (error) {
      if (this.state.selectedDate === date) {
        this.state.panels.entities = { loading: false, error: String(error) };
        this.elements.list.textContent = 'failed to load entities';
      }
      return;
    }
    if (this.state.selectedDate !== date) {
      return; // the user moved on: discard, never mix two dates
    }
    this.lists = fetched;
    this.listsDate = date;
    this.elements.list.dataset.date = date;
    this.state.panels.entities = { loading: false, error: null };
    renderEntityTabs(this.elements.tabs, this.state.activeKind, (k) =>
      this.handleSelectKind(k),
    );
    renderEntityList(this.elements.list, this.lists.get(this.state.activeKind) ?? []);
  }
}

export function bootstrap(doc: Document, baseUrl: string): Dashboard {
  const dashboard = new Dashboard(new ApiClient(baseUrl), findElements(doc));
  void dashboard.init();
  return dashboard;
}
