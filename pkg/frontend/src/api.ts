/** Typed client for the knowledge-graph service JSON API and SPARQL endpoint. */

export interface EventItem {
  id: string;
  iri: string;
  disease: string | null;
  country: string | null;
  date: string | null;
  imputed_date: string | null;
  cases: number | null;
  deaths: number | null;
}

export interface EventsPage {
  total: number;
  items: EventItem[];
}

export interface FacetEntry {
  value: string | number;
  count: number;
}

export interface Facets {
  diseases: FacetEntry[];
  countries: FacetEntry[];
  years: FacetEntry[];
}

export interface SparqlBinding {
  type: string;
  value: string;
  datatype?: string;
}

export interface SparqlJson {
  head: { vars: string[] };
  results: { bindings: Record<string, SparqlBinding>[] };
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly offset?: number) {
    super(message);
  }
}

export interface EventFilters {
  disease?: string | null;
  country?: string | null;
  year?: number | null;
  page?: number;
  pageSize?: number;
}

export function eventsQueryString(filters: EventFilters): string {
  const params = new URLSearchParams();
  if (filters.disease) params.set("disease", filters.disease);
  if (filters.country) params.set("country", filters.country);
  if (filters.year !== null && filters.year !== undefined) {
    params.set("year", String(filters.year));
  }
  if (filters.page) params.set("page", String(filters.page));
  if (filters.pageSize) params.set("page_size", String(filters.pageSize));
  return params.toString();
}

export class Client {
  constructor(readonly base: string = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      let message = `${response.status} ${response.statusText}`;
      let offset: number | undefined;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") message = body.error;
        if (body && typeof body.offset === "number") offset = body.offset;
      } catch {
        /* non-JSON error body; keep the status line */
      }
      throw new ApiError(message, response.status, offset);
    }
    return (await response.json()) as T;
  }

  fetchEvents(filters: EventFilters): Promise<EventsPage> {
    const query = eventsQueryString(filters);
    return this.json<EventsPage>(`/api/events${query ? "?" + query : ""}`);
  }

  fetchFacets(): Promise<Facets> {
    return this.json<Facets>("/api/facets");
  }

  async describe(iri: string, format: string = "text/turtle"): Promise<string> {
    const response = await fetch(
      `${this.base}/describe?url=${encodeURIComponent(iri)}`,
      { headers: { Accept: format } },
    );
    if (!response.ok) throw new ApiError(`describe failed`, response.status);
    return response.text();
  }

  sparql(query: string): Promise<SparqlJson> {
    return this.json<SparqlJson>("/sparql", {
      method: "POST",
      headers: { "Content-Type": "application/x-www-form-urlencoded", Accept: "application/json" },
      body: new URLSearchParams({ query }).toString(),
    });
  }
}
