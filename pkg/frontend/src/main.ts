import { LqhClient } from "./api.js";
import { DEMO_SOURCE } from "./demo.js";
import { createApp } from "./view.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8645";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
createApp(root, new LqhClient(baseUrl), DEMO_SOURCE);
