/** Controller: wires the API, the evidence store and the renderers together.
 *
 * One in-flight query at a time; a superseded response is dropped so the
 * bars always reflect the latest selection.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  renderAssertionPanel,
  renderCards,
  renderErrorBanner,
  renderEvidenceError,
  renderEvidenceSummary,
} from "./render.js";
import { EvidenceStore } from "./state.js";
import type { MarginalDoc, ModelDoc } from "./types.js";

interface Mount {
  banner: HTMLElement;
  evidence: HTMLElement;
  cards: HTMLElement;
  checks: HTMLElement;
}

export class App {
  readonly store = new EvidenceStore();
  private model: ModelDoc | null = null;
  private marginals = new Map<string, MarginalDoc>();
  private bound = false;

  constructor(
    private api: ApiClient,
    private mount: Mount,
  ) {}

  async start(): Promise<void> {
    this.bindEvents(); // before the first fetch, so the retry control works
    this.mount.banner.innerHTML = "";
    try {
      this.model = await this.api.model();
    } catch (error) {
      this.mount.banner.innerHTML = renderErrorBanner(
        `cannot reach the qualbn service (${(error as Error).message})`,
      );
      return;
    }
    await this.refresh();
    await this.refreshChecks();
  }

  private bindEvents(): void {
    if (this.bound) return;
    this.bound = true;
    this.mount.cards.addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest<HTMLElement>(".evidence-toggle");
      if (!target) return;
      const node = target.dataset.node;
      const state = target.dataset.state;
      if (node === undefined || state === undefined) return;
      this.store.toggle(node, state);
      void this.refresh();
    });
    this.mount.evidence.addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action=clear]");
      if (!target) return;
      this.store.clear();
      void this.refresh();
    });
    this.mount.banner.addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action=retry]");
      if (!target) return;
      void this.start();
    });
  }

  /** POST the current selection and redraw; errors keep the selection. */
  async refresh(): Promise<void> {
    if (!this.model) return;
    const evidence = this.store.snapshot();
    this.mount.evidence.innerHTML = renderEvidenceSummary(evidence);
    try {
      const doc = await this.api.query(evidence);
      if (doc === null) return; // superseded by a newer selection
      this.marginals = new Map(doc.marginals.map((m) => [m.node, m]));
      this.mount.banner.innerHTML = "";
      this.mount.cards.innerHTML = renderCards(this.model, this.marginals, doc.evidence);
    } catch (error) {
      if (error instanceof ApiError && error.impossibleEvidence) {
        this.mount.banner.innerHTML = renderEvidenceError(error.message);
      } else {
        this.mount.banner.innerHTML = renderErrorBanner((error as Error).message);
      }
      // Re-render with the previous marginals so toggles stay visible and
      // the user can correct the selection.
      this.mount.cards.innerHTML = renderCards(this.model, this.marginals, evidence);
    }
  }

  async refreshChecks(): Promise<void> {
    if (!this.model?.has_suite) {
      this.mount.checks.innerHTML = "";
      return;
    }
    try {
      const doc = await this.api.check();
      this.mount.checks.innerHTML = renderAssertionPanel(doc);
    } catch (error) {
      this.mount.checks.innerHTML = renderErrorBanner(
        `check failed: ${(error as Error).message}`,
        false,
      );
    }
  }
}
