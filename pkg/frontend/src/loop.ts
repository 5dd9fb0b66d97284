import type { ApiClient } from "./api.js";
import type { Progress, RunMode, RunParams } from "./types.js";

export interface LoopCallbacks {
  onStatus?: (status: Progress["status"]) => void;
  onProgress?: (p: Progress) => void;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/**
 * One run of the interactive loop: post the run, poll progress until the
 * service reports done or failed, recording every observed status transition.
 * The server enforces single-run-per-session; callers disable their run
 * button while `running` is true.
 */
export class RunLoop {
  readonly transitions: Array<Progress["status"]> = [];
  running = false;

  constructor(private readonly client: ApiClient,
              private readonly pollMs = 100,
              private readonly callbacks: LoopCallbacks = {}) {}

  private push(status: Progress["status"]): void {
    if (this.transitions[this.transitions.length - 1] !== status) {
      this.transitions.push(status);
      this.callbacks.onStatus?.(status);
    }
  }

  async run(sessionId: string, mode: RunMode, params: RunParams = {},
            n_th?: number, timeoutMs = 120000): Promise<Progress> {
    if (this.running) throw new Error("a run is already in flight");
    this.push("idle");
    this.running = true;
    try {
      await this.client.startRun(sessionId, mode, params, n_th);
      this.push("running");
      const t0 = Date.now();
      for (;;) {
        const p = await this.client.progress(sessionId);
        this.callbacks.onProgress?.(p);
        if (p.status === "done" || p.status === "failed") {
          this.push(p.status);
          return p;
        }
        if (Date.now() - t0 > timeoutMs) throw new Error("run timed out");
        await sleep(this.pollMs);
      }
    } finally {
      this.running = false;
    }
  }
}
