import type { CloudEntry, EntityEntry, EntityKind, TimelinePoint } from '../src/api.js';

export const FIXTURE_DAYS = Array.from(
  { length: 8 },
  (_unused, index) => `2024-01-0${index + 1}`,
);

export const EXPLORER_TEMPLATE = 'https://x.test/{kind}/{value}';

export function explorerUrl(kind: EntityKind, value: string): string {
  return EXPLORER_TEMPLATE.replace('{kind}', kind).replace(
    '{value}',
    encodeURIComponent(value),
  );
}

export function point(date: string, bev: number | null): TimelinePoint {
  const pct = bev === null ? 'n/a' : `${bev >= 0 ? '+' : ''}${(bev * 100).toFixed(1)}%`;
  return {
    date,
    bev,
    bev_median: bev,
    bev2: bev,
    bev_pct: pct,
    bev_median_pct: pct,
    bev2_pct: pct,
    defined: { bev: bev !== null, bev_median: bev !== null, bev2: bev !== null },
  };
}

export function fixtureTimeline(): TimelinePoint[] {
  return FIXTURE_DAYS.map((date, index) => point(date, 0.1 * (index + 1)));
}

export function fixtureCloud(date: string): CloudEntry[] {
  const day = date.slice(-2);
  return [
    { value: `big-${day}`, kind: 'hashtag', weight: 9 },
    { value: `mid-${day}`, kind: 'mention', weight: 4 },
    { value: `small-${day}`, kind: 'link', weight: 1 },
  ];
}

export function fixtureEntities(date: string, kind: EntityKind): EntityEntry[] {
  const day = date.slice(-2);
  return [2, 1, 0].map((rank) => {
    const value =
      kind === 'link' ? `https://ex.org/${day}/p?r=${rank}` : `${kind}-${day}-${rank}`;
    return {
      value,
      kind,
      count: 10 * (rank + 1),
      explorer_url: explorerUrl(kind, value),
    };
  });
}

export interface FetchLogEntry {
  url: string;
}

/** A fetch stub that answers like the backend and logs every request. */
export function installFetchStub(options?: {
  warmingFirst?: number;
  holdCloudFor?: string;
}): { log: string[]; releaseHeld: () => void } {
  const log: string[] = [];
  let warmingLeft = options?.warmingFirst ?? 0;
  let releaseHeld: () => void = () => {};
  const held = new Promise<void>((resolve) => {
    releaseHeld = resolve;
  });

  globalThis.fetch = (async (input: RequestInfo | URL) => {
    const url = String(input);
    log.push(url);
    const respond = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
      });

    if (warmingLeft > 0) {
      warmingLeft -= 1;
      return respond({ error: 'warming', retry_after_seconds: 1 }, 503);
    }
    const timeline = url.match(/\/api\/timeline(\?days=(\d+))?$/);
    if (timeline) {
      return respond(fixtureTimeline());
    }
    const cloud = url.match(/\/api\/day\/([0-9-]+)\/tagcloud$/);
    if (cloud) {
      const date = cloud[1] as string;
      if (options?.holdCloudFor === date) {
        await held;
      }
      return respond(fixtureCloud(date));
    }
    const entities = url.match(/\/api\/day\/([0-9-]+)\/entities\?kind=(\w+)/);
    if (entities) {
      return respond(fixtureEntities(entities[1] as string, entities[2] as EntityKind));
    }
    return respond({ error: `unrouted ${url}` }, 404);
  }) as typeof fetch;

  return { log, releaseHeld };
}

export function mountDashboardDom(): void {
  document.body.innerHTML = `
    <div id="banner" hidden></div>
    <div id="timeline"></div>
    <span id="selected-date"></span>
    <div id="cloud"></div>
    <nav id="entity-tabs"></nav>
    <ul id="entity-list"></ul>
  `;
}
