import { SessionApi } from "./api.js";
import { AnnotationView } from "./view.js";

function bootstrap(): void {
  const form = document.getElementById("annotator-form") as HTMLFormElement;
  const input = document.getElementById("annotator-id") as HTMLInputElement;
  const root = document.getElementById("app") as HTMLElement;

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const annotatorId = input.value.trim();
    if (!annotatorId) return;
    form.style.display = "none";
    const view = new AnnotationView(root, new SessionApi());
    view.start(annotatorId).catch((err) => {
      root.textContent = `Could not start a session: ${err}`;
      form.style.display = "";
    });
  });
}

document.addEventListener("DOMContentLoaded", bootstrap);
