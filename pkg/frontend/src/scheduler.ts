// Debounce + single-in-flight request scheduling. Interactions queue a
// prediction; nothing is sent until the user has been quiet for the debounce
// window, at most one request is ever in flight, and a newer request
// supersedes an older one (the stale response is dropped on arrival).

export interface ScheduleOptions {
  debounceMs?: number; // quiet period before a queued request fires
  now?: () => number;  // injectable clock for tests
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
}

export type RunFn<T> = (signal: { superseded: () => boolean }) => Promise<T>;

interface Pending<T> {
  run: RunFn<T>;
  resolve: (v: T | undefined) => void;
  reject: (e: unknown) => void;
  ready: boolean; // debounce window elapsed
}

export class PredictionScheduler<T> {
  private readonly debounceMs: number;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;
  private readonly clearTimer: (handle: unknown) => void;
  private timer: unknown = null;
  private pending: Pending<T> | null = null;
  private inFlight = false;
  private generation = 0;

  constructor(opts: ScheduleOptions = {}) {
    this.debounceMs = Math.max(150, opts.debounceMs ?? 150);
    this.setTimer = opts.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = opts.clearTimer ?? ((h) => clearTimeout(h as number));
  }

  /** Queue a request. Resolves with the result, or undefined if superseded. */
  request(run: RunFn<T>): Promise<T | undefined> {
    return new Promise<T | undefined>((resolve, reject) => {
      if (this.pending) {
        this.pending.resolve(undefined); // superseded before it ever fired
      }
      const job: Pending<T> = { run, resolve, reject, ready: false };
      this.pending = job;
      if (this.timer !== null) this.clearTimer(this.timer);
      this.timer = this.setTimer(() => {
        this.timer = null;
        job.ready = true;
        this.maybeLaunch();
      }, this.debounceMs);
    });
  }

  /** True while a request is on the wire. */
  busy(): boolean {
    return this.inFlight;
  }

  private maybeLaunch(): void {
    if (this.inFlight || !this.pending || !this.pending.ready) return;
    const job = this.pending;
    this.pending = null;
    this.inFlight = true;
    const gen = ++this.generation;
    const superseded = () => gen !== this.generation || this.pending !== null;
    job.run({ superseded }).then(
      (value) => {
        this.inFlight = false;
        if (superseded()) {
          job.resolve(undefined);
        } else {
          job.resolve(value);
        }
        this.maybeLaunch(); // drain anything queued while we were busy
      },
      (err) => {
        this.inFlight = false;
        if (superseded()) {
          job.resolve(undefined);
        } else {
          job.reject(err);
        }
        this.maybeLaunch();
      },
    );
  }
}
