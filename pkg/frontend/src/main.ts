import { Api } from "./api.js";
import { initialState, navigate, select, type View, type ViewState } from "./state.js";
import {
  renderCommands, renderFlows, renderModels, renderRegistry, renderRuns,
} from "./views.js";

const api = new Api("");
let state: ViewState = initialState();

const confirmDiscard = () =>
  window.confirm("Discard unsaved edits?");

function render(): void {
  const root = document.getElementById("view-root")!;
  document.querySelectorAll("nav button").forEach((btn) => {
    btn.classList.toggle("active",
      (btn as HTMLElement).dataset.view === state.view);
  });
  switch (state.view) {
    case "registry":
      void renderRegistry(api, root);
      break;
    case "models":
      void renderModels(api, root, state,
        (moduleId) => {
          const next = select(state, { moduleId }, confirmDiscard);
          if (next) {
            state = next;
            render();
          }
        },
        (dirty) => {
          state = { ...state, dirty };
        });
      break;
    case "flows":
      renderFlows(api, root);
      break;
    case "commands":
      void renderCommands(api, root);
      break;
    case "runs":
      void renderRuns(api, root);
      break;
  }
}

document.querySelectorAll("nav button").forEach((btn) => {
  btn.addEventListener("click", () => {
    const next = navigate(state,
      (btn as HTMLElement).dataset.view as View, confirmDiscard);
    if (next) {
      state = next;
      render();
    }
  });
});

window.addEventListener("darkit:refresh", render);
render();
