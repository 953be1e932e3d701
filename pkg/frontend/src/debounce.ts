/** Delay execution until `delayMs` after the last call; used for the slider. */
export function debounce<T extends (...args: any[]) => void>(
  fn: T,
  delayMs: number,
): T & { cancel(): void } {
  let timer: ReturnType<typeof setTimeout> | null = null;

  const wrapped = ((...args: any[]) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, delayMs);
  }) as T & { cancel(): void };

  wrapped.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
  };
  return wrapped;
}

/**
 * One in-flight request per control: starting a new request aborts the
 * previous one, and late responses from aborted requests are ignorable
 * by checking `isCurrent`.
 */
export class RequestGate {
  private controller: AbortController | null = null;

  begin(): AbortSignal {
    if (this.controller !== null) this.controller.abort();
    this.controller = new AbortController();
    return this.controller.signal;
  }

  isCurrent(signal: AbortSignal): boolean {
    return this.controller !== null && this.controller.signal === signal && !signal.aborted;
  }

  cancel(): void {
    if (this.controller !== null) {
      this.controller.abort();
      this.controller = null;
    }
  }
}
