import { CurationApi } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = new App(root, new CurationApi());

function onRoute(): void {
  void app.route(window.location.hash);
}

window.addEventListener("hashchange", onRoute);
onRoute();
