import { ApiClient, ApiError } from "./api.js";
import {
  canSubmit,
  initialState,
  recordResponse,
  recordSelection,
  recordVersion,
  renderEntries,
  renderIfiSummary,
  renderVersionList,
  type SessionState,
} from "./state.js";

/**
 * Wire the single-page client into the given document. Every handler issues
 * exactly one API call and then re-fetches whatever it displays; mutations
 * never update the view optimistically.
 */
export function mountApp(doc: Document, client: ApiClient): void {
  let state: SessionState = initialState();

  const queryInput = doc.getElementById("query-text") as HTMLInputElement;
  const topKInput = doc.getElementById("query-topk") as HTMLInputElement;
  const submitButton = doc.getElementById("query-submit") as HTMLButtonElement;
  const results = doc.getElementById("results") as HTMLElement;
  const status = doc.getElementById("status") as HTMLElement;
  const versionLabel = doc.getElementById("version") as HTMLElement;
  const versionList = doc.getElementById("version-list") as HTMLElement;
  const ifiButton = doc.getElementById("ifi-run") as HTMLButtonElement;
  const ifiRefresh = doc.getElementById("ifi-theta-refresh") as HTMLInputElement;
  const ifiFresh = doc.getElementById("ifi-theta-fresh") as HTMLInputElement;
  const ifiSummary = doc.getElementById("ifi-summary") as HTMLElement;

  function showError(error: unknown): void {
    status.textContent =
      error instanceof ApiError ? error.message : `Request failed: ${String(error)}`;
  }

  async function refreshMeta(): Promise<void> {
    const [info, counters] = await Promise.all([client.versions(), client.counters()]);
    state = recordVersion({ ...state, counters }, info);
    versionLabel.textContent = `model version ${info.current}`;
    versionList.innerHTML = renderVersionList(info);
  }

  function render(): void {
    results.innerHTML = renderEntries(state);
    submitButton.disabled = !canSubmit(state);
  }

  async function runQuery(): Promise<void> {
    status.textContent = "";
    try {
      const response = await client.query(
        state.queryText,
        Number(topKInput.value) || 5,
      );
      state = recordResponse(state, response);
      await refreshMeta();
      render();
    } catch (error) {
      showError(error);
    }
  }

  async function afterMutation(): Promise<void> {
    await refreshMeta();
    // Re-run the previous query so the list reflects the new model version.
    if (state.lastResponse !== null && canSubmit(state)) {
      await runQuery();
    } else {
      render();
    }
  }

  queryInput.addEventListener("input", () => {
    state = { ...state, queryText: queryInput.value };
    submitButton.disabled = !canSubmit(state);
  });

  submitButton.addEventListener("click", () => void runQuery());

  results.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const windowId = Number(target.dataset.windowId);
    const scdId = Number(target.dataset.scdId);
    const act = async () => {
      try {
        if (target.classList.contains("select-sentence")) {
          await client.selectSentence(windowId);
          state = recordSelection(state, { kind: "sentence", id: windowId });
          await refreshMeta();
          render();
        } else if (target.classList.contains("select-scd")) {
          await client.selectScd(scdId);
          state = recordSelection(state, { kind: "scd", id: scdId });
          await refreshMeta();
          render();
        } else if (target.classList.contains("faulty-sentence")) {
          await client.reportFaultySentence(windowId);
          await afterMutation();
        } else if (target.classList.contains("faulty-association")) {
          await client.reportFaultyAssociation(windowId);
          await afterMutation();
        }
      } catch (error) {
        showError(error);
      }
    };
    void act();
  });

  versionList.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains("restore")) {
      return;
    }
    const version = Number(target.dataset.version);
    void client
      .restore(version)
      .then(() => afterMutation())
      .catch(showError);
  });

  ifiButton.addEventListener("click", () => {
    void client
      .runIfi(
        ifiRefresh.value ? Number(ifiRefresh.value) : undefined,
        ifiFresh.value ? Number(ifiFresh.value) : undefined,
      )
      .then(async (result) => {
        ifiSummary.innerHTML = renderIfiSummary(result.applied);
        await afterMutation();
      })
      .catch(showError);
  });

  submitButton.disabled = true;
  void refreshMeta().catch(showError);
}

declare global {
  interface Window {
    SCD_API_BASE?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("query-submit")) {
  const base = window.SCD_API_BASE ?? "";
  mountApp(document, new ApiClient(base));
}
