import { Api } from "./api.js";
import { BrowseController } from "./controller.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "";

const root = document.querySelector("#app") as HTMLElement;
const controller = new BrowseController(root, new Api(serviceUrl), {
  onSessionChange: (sessionId) => {
    const url = new URL(window.location.href);
    if (sessionId) url.searchParams.set("session", sessionId);
    else url.searchParams.delete("session");
    window.history.replaceState(null, "", url);
  },
});

const resumeId = params.get("session");
if (resumeId) void controller.resume(resumeId);
