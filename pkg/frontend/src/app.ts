/** App shell: URL-synced state, data fetching, and event wiring. */

import { ApiError, Client, EventItem } from "./api.js";
import { buildChart, renderChartSvg, timelinePoints } from "./chart.js";
import {
  renderConsole, renderDetail, renderErrorBanner, renderEventList,
  renderFacetPanel, renderNotFound, renderResultTable,
} from "./render.js";
import { recordIdFromCell, toTable } from "./sparqljson.js";
import { AppState, makeSequencer, parseState, stateToQuery } from "./state.js";

const PAGE_SIZE = 50;
const HISTORY_KEY = "epikg-query-history";

const client = new Client("");
const sequencer = makeSequencer();

let state: AppState = parseState(window.location.search);

function pushState(next: AppState): void {
  state = next;
  history.replaceState(null, "", stateToQuery(state) || window.location.pathname);
  void refresh();
}

function queryHistory(): string[] {
  try {
    return JSON.parse(sessionStorage.getItem(HISTORY_KEY) ?? "[]") as string[];
  } catch {
    return [];
  }
}

function rememberQuery(query: string): void {
  const entries = [query, ...queryHistory().filter((q) => q !== query)].slice(0, 20);
  sessionStorage.setItem(HISTORY_KEY, JSON.stringify(entries));
}

function main(): HTMLElement {
  return document.getElementById("main") as HTMLElement;
}

function sidebar(): HTMLElement {
  return document.getElementById("sidebar") as HTMLElement;
}

async function refresh(): Promise<void> {
  const seq = sequencer.next();
  document.querySelectorAll("nav.tabs a").forEach((tab) => {
    tab.classList.toggle("active", tab.getAttribute("data-view") === state.view);
  });
  try {
    if (state.view === "record" && state.recordId) {
      await showDetail(state.recordId, seq);
    } else if (state.view === "console") {
      showConsole();
    } else if (state.view === "timeline") {
      await showTimeline(seq);
    } else {
      await showEvents(seq);
    }
  } catch (error) {
    if (!sequencer.isCurrent(seq)) return;
    main().innerHTML = renderErrorBanner(
      error instanceof Error ? error.message : String(error));
    const retry = document.getElementById("retry");
    retry?.addEventListener("click", (e) => {
      e.preventDefault();
      void refresh();
    });
  }
}

async function loadFacets(seq: number): Promise<void> {
  const facets = await client.fetchFacets();
  if (!sequencer.isCurrent(seq)) return;
  sidebar().innerHTML = renderFacetPanel(facets, state);
  sidebar().querySelectorAll("a.facet").forEach((link) => {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      const kind = link.getAttribute("data-facet") as "disease" | "country" | "year";
      const raw = link.getAttribute("data-value") ?? "";
      const next = { ...state, page: 1 } as AppState;
      if (kind === "year") {
        next.year = state.year === parseInt(raw, 10) ? null : parseInt(raw, 10);
      } else if (kind === "disease") {
        next.disease = state.disease === raw ? null : raw;
      } else {
        next.country = state.country === raw ? null : raw;
      }
      pushState(next);
    });
  });
  document.getElementById("clear-facets")?.addEventListener("click", () => {
    pushState({ ...state, disease: null, country: null, year: null, page: 1 });
  });
}

async function showEvents(seq: number): Promise<void> {
  await loadFacets(seq);
  const page = await client.fetchEvents({
    disease: state.disease, country: state.country, year: state.year,
    page: state.page, pageSize: PAGE_SIZE,
  });
  if (!sequencer.isCurrent(seq)) return;
  main().innerHTML = renderEventList(page, state, PAGE_SIZE);
  main().querySelectorAll("a.record-link").forEach((link) => {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      pushState({ ...state, view: "record", recordId: link.getAttribute("data-id") });
    });
  });
  document.getElementById("prev-page")?.addEventListener("click", () => {
    pushState({ ...state, page: Math.max(1, state.page - 1) });
  });
  document.getElementById("next-page")?.addEventListener("click", () => {
    pushState({ ...state, page: state.page + 1 });
  });
}

async function findEvent(recordId: string): Promise<EventItem | null> {
  const seqMatch = /^don-record(\d+)$/.exec(recordId);
  if (!seqMatch) return null;
  const page = await client.fetchEvents({ page: 1, pageSize: 10000 });
  return page.items.find((item) => item.id === recordId) ?? null;
}

async function showDetail(recordId: string, seq: number): Promise<void> {
  const item = await findEvent(recordId);
  if (!sequencer.isCurrent(seq)) return;
  if (!item) {
    main().innerHTML = renderNotFound(recordId);
    return;
  }
  const turtle = await client.describe(item.iri, "text/turtle");
  if (!sequencer.isCurrent(seq)) return;
  main().innerHTML = renderDetail(item, turtle);
  main().querySelectorAll("a.download").forEach((link) => {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void downloadAs(item, link.getAttribute("data-format") ?? "text/turtle");
    });
  });
  document.getElementById("back-to-list")?.addEventListener("click", (event) => {
    event.preventDefault();
    pushState({ ...state, view: "events", recordId: null });
  });
}

async function downloadAs(item: EventItem, format: string): Promise<void> {
  const body = await client.describe(item.iri, format);
  const extensions: Record<string, string> = {
    "text/turtle": "ttl", "application/rdf+xml": "rdf", "application/n-triples": "nt",
  };
  const blob = new Blob([body], { type: format });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = `${item.id}.${extensions[format] ?? "txt"}`;
  anchor.click();
  URL.revokeObjectURL(url);
}

function showConsole(): void {
  sidebar().innerHTML = "";
  main().innerHTML = renderConsole(queryHistory());
  const input = document.getElementById("query-input") as HTMLTextAreaElement;
  const errorBox = document.getElementById("query-error") as HTMLElement;
  const results = document.getElementById("query-results") as HTMLElement;

  async function run(): Promise<void> {
    const query = input.value.trim();
    errorBox.hidden = true;
    if (!query) {
      errorBox.textContent = "Enter a query first.";
      errorBox.hidden = false;
      return;
    }
    try {
      const payload = await client.sparql(query);
      rememberQuery(query);
      const table = toTable(payload);
      results.innerHTML = renderResultTable(table);
      results.querySelectorAll("td").forEach((cell) => {
        const id = recordIdFromCell(cell.textContent ?? "");
        if (id) {
          cell.innerHTML = `<a href="#" class="record-link" data-id="${id}">` +
            `${cell.textContent}</a>`;
        }
      });
      results.querySelectorAll("a.record-link").forEach((link) => {
        link.addEventListener("click", (event) => {
          event.preventDefault();
          pushState({ ...state, view: "record", recordId: link.getAttribute("data-id") });
        });
      });
      refreshHistory();
    } catch (error) {
      // the query text stays in the editor for fixing
      const message = error instanceof ApiError && error.offset !== undefined
        ? `${error.message}`
        : error instanceof Error ? error.message : String(error);
      errorBox.textContent = message;
      errorBox.hidden = false;
    }
  }

  function refreshHistory(): void {
    const list = document.getElementById("query-history") as HTMLElement;
    list.innerHTML = queryHistory().map((q) =>
      `<li><a href="#" class="history-item"></a></li>`).join("");
    Array.from(list.querySelectorAll("a.history-item")).forEach((link, i) => {
      link.textContent = queryHistory()[i];
      link.addEventListener("click", (event) => {
        event.preventDefault();
        input.value = link.textContent ?? "";
      });
    });
  }

  document.getElementById("run-query")?.addEventListener("click", () => void run());
  refreshHistory();
}

async function showTimeline(seq: number): Promise<void> {
  await loadFacets(seq);
  if (!state.disease || !state.country) {
    main().innerHTML = `<p class="placeholder">select a disease and a country ` +
      `facet to draw the case-count timeline</p>`;
    return;
  }
  const page = await client.fetchEvents({
    disease: state.disease, country: state.country, page: 1, pageSize: 10000,
  });
  if (!sequencer.isCurrent(seq)) return;
  const model = buildChart(timelinePoints(page.items));
  main().innerHTML =
    `<h2>${state.disease} in ${state.country}</h2>` + renderChartSvg(model);
  main().querySelectorAll("circle.point").forEach((marker) => {
    marker.addEventListener("click", () => {
      pushState({ ...state, view: "record", recordId: marker.getAttribute("data-id") });
    });
  });
}

export function start(): void {
  document.querySelectorAll("nav.tabs a").forEach((tab) => {
    tab.addEventListener("click", (event) => {
      event.preventDefault();
      pushState({ ...state, view: (tab.getAttribute("data-view") ?? "events") as AppState["view"] });
    });
  });
  window.addEventListener("popstate", () => {
    state = parseState(window.location.search);
    void refresh();
  });
  void refresh();
}

start();
