import { decodeFfd1 } from "./ffd1.js";
import type {
  ContoursJson, DistanceMap, Progress, RunMode, RunParams, SeedsJson,
  SessionInfo,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

/** Thin typed client over the session service; transport injectable for tests. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (...a) => fetch(...a)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async createSession(imageBytes: Uint8Array | Blob, filename = "image.png"):
      Promise<SessionInfo> {
    const form = new FormData();
    // slice() detaches from any byteOffset so the backing buffer is exact
    const blob = imageBytes instanceof Blob
      ? imageBytes
      : new Blob([imageBytes.slice().buffer]);
    form.append("image", blob, filename);
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url("/api/sessions"), { method: "POST", body: form }));
    return await resp.json() as SessionInfo;
  }

  async putSeeds(id: string, seeds: SeedsJson): Promise<void> {
    await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/seeds`),
      { method: "PUT", headers: { "content-type": "application/json" },
        body: JSON.stringify(seeds) }));
  }

  async getSeeds(id: string): Promise<SeedsJson> {
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/seeds`)));
    return await resp.json() as SeedsJson;
  }

  async startRun(id: string, mode: RunMode, params: RunParams = {},
                 n_th?: number): Promise<string> {
    const body: Record<string, unknown> = { mode, params };
    if (n_th !== undefined) body.n_th = n_th;
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/run`),
      { method: "POST", headers: { "content-type": "application/json" },
        body: JSON.stringify(body) }));
    const payload = await resp.json() as { run_id: string };
    return payload.run_id;
  }

  async progress(id: string): Promise<Progress> {
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/progress`)));
    return await resp.json() as Progress;
  }

  /** Raw body of /contours.json plus the parsed value; the UI must render the
      fetched coordinates verbatim, so both are exposed. */
  async contours(id: string): Promise<{ raw: string; parsed: ContoursJson }> {
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/contours.json`)));
    const raw = await resp.text();
    return { raw, parsed: JSON.parse(raw) as ContoursJson };
  }

  async labelPngBlob(id: string): Promise<Blob> {
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/label.png`)));
    return await resp.blob();
  }

  async distanceMap(id: string): Promise<DistanceMap> {
    const resp = await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}/distance.bin`)));
    return decodeFfd1(await resp.arrayBuffer());
  }

  async deleteSession(id: string): Promise<void> {
    await raiseForStatus(await this.fetchImpl(
      this.url(`/api/sessions/${id}`), { method: "DELETE" }));
  }
}
