/** Entry point: wire the HTTP client to the store and mount the page.
 * The service base URL comes from ?api=, defaulting to the service's
 * default bind address; ?campaign= opens an existing campaign. */

import { HttpApi } from "./api.js";
import { mount } from "./dom.js";
import { Store } from "./state.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8787";

const api = new HttpApi(base, (url, init) => window.fetch(url, init));
const store = new Store(api);

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}
mount(root, store);

const campaignId = params.get("campaign");
if (campaignId !== null) {
  void store.openCampaign(campaignId);
}
