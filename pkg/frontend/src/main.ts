/**
 * Browser entry point: mount the playground on the #app element.
 */

import { Playground } from "./app.js";

const host = document.getElementById("app");
if (host === null) {
  throw new Error("missing #app mount point");
}
void new Playground(host).start();
