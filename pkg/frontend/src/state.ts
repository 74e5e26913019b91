export type View = "registry" | "models" | "flows" | "commands" | "runs";

export interface ViewState {
  view: View;
  model: string | null;
  moduleId: string | null;
  runIds: string[];
  dirty: boolean;
}

export function initialState(): ViewState {
  return { view: "models", model: null, moduleId: null, runIds: [], dirty: false };
}

/** Navigation guard: leaving a dirty editor requires explicit confirm.
 * Returns the next state, or null when the user kept their edits. */
export function navigate(
  state: ViewState,
  view: View,
  confirm: () => boolean,
): ViewState | null {
  if (state.view === view) {
    return state;
  }
  if (state.dirty && !confirm()) {
    return null;
  }
  return { ...state, view, dirty: false };
}

export function select(
  state: ViewState,
  patch: Partial<Pick<ViewState, "model" | "moduleId" | "runIds">>,
  confirm: () => boolean,
): ViewState | null {
  const changesModule =
    patch.moduleId !== undefined && patch.moduleId !== state.moduleId;
  if (state.dirty && changesModule && !confirm()) {
    return null;
  }
  return { ...state, ...patch, dirty: changesModule ? false : state.dirty };
}
