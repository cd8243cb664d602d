export interface ThrottleClock {
  now(): number;
  setTimer(fn: () => void, ms: number): unknown;
  clearTimer(id: unknown): void;
}

const wallClock: ThrottleClock = {
  now: () => Date.now(),
  setTimer: (fn, ms) => setTimeout(fn, ms),
  clearTimer: (id) => clearTimeout(id as Parameters<typeof clearTimeout>[0]),
};

/**
 * Caps a stream of values to at most one send per interval, keeping the
 * newest value. The first update in a quiet period goes out immediately;
 * later ones within the interval are coalesced and the last of them goes
 * out on a trailing timer, so the receiver always ends up with the final
 * value no matter how fast the pointer moved. The cap is absolute: no
 * path, flush() included, produces two sends closer than the interval.
 */
export class Throttle<T> {
  private lastSent = -Infinity;
  private pending: T | undefined;
  private timer: unknown = null;

  constructor(
    private readonly send: (value: T) => void,
    readonly intervalMs: number,
    private readonly clock: ThrottleClock = wallClock,
  ) {
    if (intervalMs <= 0) throw new Error("throttle interval must be positive");
  }

  update(value: T): void {
    const now = this.clock.now();
    if (this.timer === null && now - this.lastSent >= this.intervalMs) {
      this.lastSent = now;
      this.send(value);
      return;
    }
    this.pending = value;
    this.armTimer(now);
  }

  /**
   * Ask for the pending value to go out as early as the cap allows:
   * immediately if the interval has elapsed, otherwise via the trailing
   * timer at the earliest legal moment.
   */
  flush(): void {
    if (this.pending === undefined) return;
    const now = this.clock.now();
    if (now - this.lastSent >= this.intervalMs) {
      this.sendPending(now);
    } else {
      this.armTimer(now);
    }
  }

  private fire(): void {
    this.timer = null;
    if (this.pending === undefined) return;
    const now = this.clock.now();
    // wall timers truncate fractional delays and can wake a hair early
    if (this.lastSent + this.intervalMs - now > 1e-3) {
      this.armTimer(now);
      return;
    }
    this.sendPending(now);
  }

  private sendPending(now: number): void {
    if (this.timer !== null) {
      this.clock.clearTimer(this.timer);
      this.timer = null;
    }
    this.lastSent = now;
    const value = this.pending as T;
    this.pending = undefined;
    this.send(value);
  }

  private armTimer(now: number): void {
    if (this.timer !== null) return;
    const wait = Math.max(0, this.lastSent + this.intervalMs - now);
    this.timer = this.clock.setTimer(() => this.fire(), wait);
  }

  cancel(): void {
    if (this.timer !== null) {
      this.clock.clearTimer(this.timer);
      this.timer = null;
    }
    this.pending = undefined;
  }
}

/** Pose updates must not exceed 30 per second on the wire. */
export const POSE_INTERVAL_MS = 1000 / 30;
