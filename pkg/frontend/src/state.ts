/** Filter/view state synced with the URL query string, plus request sequencing. */

export type View = "events" | "record" | "console" | "timeline";

export interface AppState {
  view: View;
  disease: string | null;
  country: string | null;
  year: number | null;
  page: number;
  recordId: string | null;
}

export const DEFAULT_STATE: AppState = {
  view: "events",
  disease: null,
  country: null,
  year: null,
  page: 1,
  recordId: null,
};

const VIEWS: View[] = ["events", "record", "console", "timeline"];

export function parseState(search: string): AppState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const viewParam = params.get("view");
  const year = params.get("year");
  const page = params.get("page");
  return {
    view: VIEWS.includes(viewParam as View) ? (viewParam as View) : "events",
    disease: params.get("disease"),
    country: params.get("country"),
    year: year !== null && /^-?\d+$/.test(year) ? parseInt(year, 10) : null,
    page: page !== null && /^\d+$/.test(page) && parseInt(page, 10) >= 1
      ? parseInt(page, 10) : 1,
    recordId: params.get("record"),
  };
}

export function stateToQuery(state: AppState): string {
  const params = new URLSearchParams();
  if (state.view !== "events") params.set("view", state.view);
  if (state.disease) params.set("disease", state.disease);
  if (state.country) params.set("country", state.country);
  if (state.year !== null) params.set("year", String(state.year));
  if (state.page !== 1) params.set("page", String(state.page));
  if (state.recordId) params.set("record", state.recordId);
  const text = params.toString();
  return text ? "?" + text : "";
}

/** Monotone sequence numbers so stale fetch responses can be discarded. */
export function makeSequencer() {
  let current = 0;
  return {
    next(): number {
      current += 1;
      return current;
    },
    isCurrent(n: number): boolean {
      return n === current;
    },
  };
}
