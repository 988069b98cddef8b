import { ApiClient } from "./api.js";
import { App } from "./app.js";

function mountPoint(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing mount point #${id}`);
  return el;
}

const app = new App(new ApiClient(), {
  banner: mountPoint("banner"),
  evidence: mountPoint("evidence"),
  cards: mountPoint("cards"),
  checks: mountPoint("checks"),
});

void app.start();
