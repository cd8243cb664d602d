/** FIFO of decoded audio blocks that waits for a target depth before
 * releasing anything, so network jitter up to that depth never starves
 * the scheduler. Draining after priming counts as an underrun and the
 * buffer re-primes. */
export class JitterBuffer {
  underruns = 0;

  private queue: Float32Array[] = [];
  private primed = false;

  constructor(readonly depth = 3) {
    if (depth < 1) throw new Error("jitter depth must be >= 1");
  }

  get size(): number {
    return this.queue.length;
  }

  push(block: Float32Array): void {
    this.queue.push(block);
    if (this.queue.length >= this.depth) this.primed = true;
  }

  pop(): Float32Array | null {
    if (!this.primed) return null;
    const block = this.queue.shift();
    if (block === undefined) {
      this.underruns += 1;
      this.primed = false;
      return null;
    }
    return block;
  }

  reset(): void {
    this.queue = [];
    this.primed = false;
  }
}
