/** Evidence selection store.
 *
 * The store is the single source of truth for what the user has selected;
 * the view always re-renders from it, so the evidence shown is exactly the
 * evidence last sent to the server.
 */

import type { Evidence } from "./types.js";

export class EvidenceStore {
  private selected = new Map<string, string>();

  /** Select a state; selecting the already-active state clears the node. */
  toggle(node: string, state: string): void {
    if (this.selected.get(node) === state) {
      this.selected.delete(node);
    } else {
      this.selected.set(node, state);
    }
  }

  clear(node?: string): void {
    if (node === undefined) {
      this.selected.clear();
    } else {
      this.selected.delete(node);
    }
  }

  get(node: string): string | undefined {
    return this.selected.get(node);
  }

  get size(): number {
    return this.selected.size;
  }

  /** Plain-object snapshot, suitable for the /api/query body. */
  snapshot(): Evidence {
    const out: Evidence = {};
    for (const [node, state] of this.selected) out[node] = state;
    return out;
  }

  /** Replace the whole selection (used to restore after errors). */
  restore(evidence: Evidence): void {
    this.selected = new Map(Object.entries(evidence));
  }
}
