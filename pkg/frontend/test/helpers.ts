/** Test doubles: a fixture-backed fetch and a hand-cranked scheduler. */

import type { FetchLike } from "../src/api.js";
import type { Scheduler } from "../src/state.js";

export interface RouteResult {
  status: number;
  body: unknown;
}

/** Fetch stand-in: routes by URL, records every request it sees. */
export function fixtureFetch(
  route: (url: URL) => RouteResult,
  log: string[] = [],
): FetchLike {
  return async (url: string) => {
    log.push(url);
    const { status, body } = route(new URL(url, "http://fixture.test"));
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    };
  };
}

export const ok = (body: unknown): RouteResult => ({ status: 200, body });

export interface ManualClock {
  scheduler: Scheduler;
  /** Run everything currently scheduled (and nothing scheduled by it). */
  flush(): void;
  pending(): number;
}

/** Deterministic debounce clock: timers fire only when flushed. */
export function manualClock(): ManualClock {
  let nextId = 1;
  const tasks = new Map<number, () => void>();
  return {
    scheduler: {
      set(fn, _ms) {
        const id = nextId++;
        tasks.set(id, fn);
        return id;
      },
      clear(id) {
        tasks.delete(id as number);
      },
    },
    flush() {
      const fns = [...tasks.values()];
      tasks.clear();
      for (const fn of fns) fn();
    },
    pending: () => tasks.size,
  };
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(err: unknown): void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let queued promise callbacks run. */
export const settle = (): Promise<void> => new Promise((res) => setTimeout(res, 0));
