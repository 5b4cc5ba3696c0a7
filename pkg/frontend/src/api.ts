/** Typed client for the read-only analytics API. */

export type EntityKind = 'hashtag' | 'mention' | 'link';

export interface TimelinePoint {
  date: string;
  bev: number | null;
  bev_median: number | null;
  bev2: number | null;
  bev_pct: string;
  bev_median_pct: string;
  bev2_pct: string;
  defined: { bev: boolean; bev_median: boolean; bev2: boolean };
}

export interface EntityEntry {
  value: string;
  kind: EntityKind;
  count: number;
  explorer_url: string;
}

export interface CloudEntry {
  value: string;
  kind: EntityKind;
  weight: number;
}

export interface Health {
  status: 'ok' | 'warming';
  snapshot_id: number | null;
}

/** The backend has not published a snapshot yet; retry after the hint. */
export class WarmingUp extends Error {
  constructor(public retryAfterSeconds: number) {
    super('warming up');
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (response.status === 503) {
    let retry = 30;
    try {
      const body = (await response.json()) as { retry_after_seconds?: number };
      if (typeof body.retry_after_seconds === 'number') retry = body.retry_after_seconds;
    } catch {
      /* keep the default hint */
    }
    throw new WarmingUp(retry);
  }
  if (!response.ok) {
    throw new ApiError(response.status, `${url} -> ${response.status}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  timeline(days?: number): Promise<TimelinePoint[]> {
    const query = days === undefined ? '' : `?days=${days}`;
    return getJson(`${this.baseUrl}/api/timeline${query}`);
  }

  entities(date: string, kind: EntityKind, k?: number): Promise<EntityEntry[]> {
    const query = k === undefined ? `?kind=${kind}` : `?kind=${kind}&k=${k}`;
    return getJson(`${this.baseUrl}/api/day/${date}/entities${query}`);
  }

  tagcloud(date: string): Promise<CloudEntry[]> {
    return getJson(`${this.baseUrl}/api/day/${date}/tagcloud`);
  }

  health(): Promise<Health> {
    return getJson(`${this.baseUrl}/api/health`);
  }
}
