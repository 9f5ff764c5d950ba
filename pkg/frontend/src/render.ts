/** Pure HTML-string builders; the app shell injects these into the page. */

import type { EventItem, EventsPage, FacetEntry, Facets } from "./api.js";
import type { AppState } from "./state.js";
import type { ResultTable } from "./sparqljson.js";

export const ABSENT = "—";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatCell(value: string | number | null | undefined): string {
  if (value === null || value === undefined || value === "") return ABSENT;
  return escapeHtml(String(value));
}

function facetList(kind: "disease" | "country" | "year", entries: FacetEntry[],
                   selected: string | number | null): string {
  const items = entries.map((entry) => {
    const isActive = selected !== null && String(selected) === String(entry.value);
    const label = `${escapeHtml(String(entry.value))} (${entry.count})`;
    return `<li><a href="#" class="facet${isActive ? " active" : ""}" ` +
      `data-facet="${kind}" data-value="${escapeHtml(String(entry.value))}">` +
      `${label}</a></li>`;
  });
  return `<ul class="facet-list">${items.join("")}</ul>`;
}

export function renderFacetPanel(facets: Facets, state: AppState): string {
  return `
  <section class="facets">
    <h2>Diseases</h2>${facetList("disease", facets.diseases, state.disease)}
    <h2>Countries</h2>${facetList("country", facets.countries, state.country)}
    <h2>Years</h2>${facetList("year", facets.years, state.year)}
    <button id="clear-facets">Clear filters</button>
  </section>`;
}

export function renderEventRow(item: EventItem): string {
  return `<tr data-id="${escapeHtml(item.id)}">` +
    `<td><a href="#" class="record-link" data-id="${escapeHtml(item.id)}">` +
    `${escapeHtml(item.id)}</a></td>` +
    `<td>${formatCell(item.disease)}</td>` +
    `<td>${formatCell(item.country)}</td>` +
    `<td>${formatCell(item.date)}</td>` +
    `<td>${formatCell(item.imputed_date)}</td>` +
    `<td>${formatCell(item.cases)}</td>` +
    `<td>${formatCell(item.deaths)}</td></tr>`;
}

export function renderEventList(page: EventsPage, state: AppState,
                                pageSize: number): string {
  const rows = page.items.map(renderEventRow).join("");
  const pages = Math.max(1, Math.ceil(page.total / pageSize));
  return `
  <section class="events">
    <p class="total">${page.total} event${page.total === 1 ? "" : "s"}</p>
    <table class="event-table">
      <thead><tr><th>record</th><th>disease</th><th>country</th><th>date</th>
      <th>imputed</th><th>cases</th><th>deaths</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <nav class="pager">
      <button id="prev-page" ${state.page <= 1 ? "disabled" : ""}>previous</button>
      <span>page ${state.page} of ${pages}</span>
      <button id="next-page" ${state.page >= pages ? "disabled" : ""}>next</button>
    </nav>
  </section>`;
}

const DETAIL_ROWS: [keyof EventItem, string][] = [
  ["disease", "Disease"],
  ["country", "Country"],
  ["date", "Date"],
  ["imputed_date", "Imputed date"],
  ["cases", "Cases"],
  ["deaths", "Deaths"],
];

export function renderDetail(item: EventItem, turtle: string): string {
  const rows = DETAIL_ROWS.map(([key, label]) =>
    `<tr><th>${label}</th><td data-field="${key}">${formatCell(item[key])}</td></tr>`,
  ).join("");
  return `
  <section class="detail">
    <h2>${escapeHtml(item.id)}</h2>
    <table class="fields">${rows}</table>
    <h3>Raw triples</h3>
    <pre class="turtle"><code>${escapeHtml(turtle)}</code></pre>
    <p class="downloads">Download:
      <a href="#" class="download" data-format="text/turtle">turtle</a>
      <a href="#" class="download" data-format="application/rdf+xml">rdf+xml</a>
      <a href="#" class="download" data-format="application/n-triples">ntriples</a>
    </p>
    <p><a href="#" id="back-to-list">back to events</a></p>
  </section>`;
}

export function renderNotFound(id: string): string {
  return `<section class="detail"><h2>Not found</h2>
    <p>No record named ${escapeHtml(id)} exists in the graph.</p></section>`;
}

export function renderResultTable(table: ResultTable): string {
  const head = table.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = table.rows.map((row) =>
    `<tr>${row.map((cell) => `<td>${escapeHtml(cell)}</td>`).join("")}</tr>`,
  ).join("");
  return `<table class="results"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>`;
}

export function renderConsole(history: string[]): string {
  const past = history.map((q) =>
    `<li><a href="#" class="history-item">${escapeHtml(q)}</a></li>`).join("");
  return `
  <section class="console">
    <textarea id="query-input" rows="8" spellcheck="false"
      placeholder="SELECT ..."></textarea>
    <div><button id="run-query">Run</button></div>
    <div id="query-error" class="error" hidden></div>
    <div id="query-results"></div>
    <h3>History</h3>
    <ul id="query-history">${past}</ul>
  </section>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)} ` +
    `<a href="#" id="retry">retry</a></div>`;
}
