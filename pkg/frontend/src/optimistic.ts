/**
 * Optimistic mutation helper.
 * Applies the change to the DOM/state immediately, runs the remote call in
 * the background, and reverts on failure. The acknowledged server value is
 * handed back to the caller so the final rendered state always equals the
 * last acknowledged write.
 */

let pending = 0;

export interface OptimisticOptions<S, A> {
  /** Apply the change immediately; returns a snapshot used for revert. */
  apply: () => S;
  /** Perform the remote operation; resolves with the acknowledgment. */
  remote: () => Promise<A>;
  /** Reconcile the UI with the server acknowledgment. */
  acknowledge: (ack: A) => void;
  /** Undo the change when the remote call fails. */
  revert: (snapshot: S) => void;
  /** Called on failure, after revert. */
  onError?: (error: Error) => void;
}

export async function optimistic<S, A>(
  options: OptimisticOptions<S, A>,
): Promise<A | undefined> {
  const snapshot = options.apply();
  pending += 1;
  try {
    const ack = await options.remote();
    options.acknowledge(ack);
    return ack;
  } catch (error) {
    options.revert(snapshot);
    options.onError?.(error instanceof Error ? error : new Error(String(error)));
    return undefined;
  } finally {
    pending -= 1;
  }
}

export function pendingMutations(): number {
  return pending;
}
