/**
 * Typed client for the enhancement service.
 *
 * Images travel as base64-encoded 8-bit RGB PNG in both directions.
 * Every request accepts an AbortSignal so stale previews can be
 * cancelled when the user keeps moving a control.
 */

export interface EnhanceResponse {
  image: string;
  tf: number[];
  ccm: number[];
}

export interface InterpolateResponse extends EnhanceResponse {
  t: number;
}

export interface ChainStage {
  style: string;
  tf: number[];
  ccm: number[];
}

export interface ChainResponse {
  image: string;
  stages: ChainStage[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const message = typeof body?.error === "string" ? body.error : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message);
  }
  return body;
}

export class Client {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async post(path: string, payload: unknown, signal?: AbortSignal): Promise<any> {
    const resp = await fetch(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
    return parseJson(resp);
  }

  async health(signal?: AbortSignal): Promise<boolean> {
    try {
      const resp = await fetch(this.url("/healthz"), { signal });
      return resp.ok;
    } catch {
      return false;
    }
  }

  async styles(signal?: AbortSignal): Promise<string[]> {
    const body = await parseJson(await fetch(this.url("/styles"), { signal }));
    return body.styles as string[];
  }

  async enhance(image: string, style: string, signal?: AbortSignal): Promise<EnhanceResponse> {
    return this.post("/enhance", { image, style }, signal);
  }

  async interpolate(
    image: string,
    styleA: string,
    styleB: string,
    t: number,
    signal?: AbortSignal,
  ): Promise<InterpolateResponse> {
    return this.post("/interpolate", { image, style_a: styleA, style_b: styleB, t }, signal);
  }

  async chain(image: string, styles: string[], signal?: AbortSignal): Promise<ChainResponse> {
    return this.post("/chain", { image, styles }, signal);
  }
}
