import type {
  ClusterListPayload,
  ClusterSummary,
  ClusterView,
  SourceRecordView,
  ToggleAck,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get notFound(): boolean {
    return this.status === 404;
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON error body */
  }
  return `HTTP ${response.status}`;
}

/** Thin typed client for the curation endpoints. `baseUrl` stays empty when
 * the UI is served by the same service (the normal deployment). */
export class CurationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  async listClusters(): Promise<ClusterSummary[]> {
    const payload = await this.get<ClusterListPayload>("/curation/clusters");
    return payload.clusters;
  }

  getCluster(clusterId: string): Promise<ClusterView> {
    return this.get<ClusterView>(
      `/curation/clusters/${encodeURIComponent(clusterId)}`,
    );
  }

  getRecord(globalId: string): Promise<SourceRecordView> {
    return this.get<SourceRecordView>(
      `/curation/records/${encodeURIComponent(globalId)}`,
    );
  }

  async setSelection(
    clusterId: string,
    nativeId: string,
    selected: boolean,
  ): Promise<ToggleAck> {
    let response: Response;
    const path =
      `/curation/clusters/${encodeURIComponent(clusterId)}` +
      `/members/${encodeURIComponent(nativeId)}`;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ selected }),
      });
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as ToggleAck;
  }
}
