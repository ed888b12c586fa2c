import { SessionApi } from "./api.js";
import { ApiError, SampleView, SubmitResult } from "./types.js";

type Status = "annotating" | "done" | "expired";

/**
 * Renders the annotation screen. Everything shown derives from the last
 * server response plus two local buffers (the rationale text and the
 * confirmation-dialog flag), so a refresh reproduces the same screen.
 */
export class AnnotationView {
  private view: SampleView | null = null;
  private status: Status = "annotating";
  private rationaleBuffer = "";
  private confirmVisible = false;
  private inFlight = false;
  private errorMessage = "";
  private readonly doc: Document;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SessionApi,
    private sessionId: string = "",
  ) {
    this.doc = root.ownerDocument;
  }

  async start(annotatorId: string): Promise<void> {
    const info = await this.api.createSession(annotatorId);
    this.sessionId = info.session_id;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    try {
      this.view = await this.api.current(this.sessionId);
      this.status = "annotating";
    } catch (err) {
      this.absorbTerminal(err);
    }
    this.render();
  }

  /** Row click: first pick requires a rationale before any request. */
  async selectStatement(index: number): Promise<void> {
    if (this.inFlight || this.status !== "annotating" || !this.view) return;
    if (this.view.selections.some((s) => s.statement_index === index)) return;
    const isFirstPick = this.view.selections.length === 0;
    const rationale = this.rationaleBuffer.trim();
    if (isFirstPick && !rationale) {
      this.errorMessage = "Enter a rationale for your first selection.";
      this.render();
      return;
    }
    await this.submit(() =>
      this.api.select(this.sessionId, index, isFirstPick ? rationale : undefined),
    );
  }

  /** The none-relevant control opens a confirmation dialog; only the
   *  dialog's confirm button issues the confirmed request. */
  noneRelevantClicked(): void {
    if (this.inFlight || this.status !== "annotating") return;
    this.confirmVisible = true;
    this.render();
  }

  async confirmNone(confirmed: boolean): Promise<void> {
    this.confirmVisible = false;
    if (!confirmed) {
      this.render();
      return;
    }
    await this.submit(() => this.api.noneRelevant(this.sessionId, true));
  }

  setRationale(text: string): void {
    this.rationaleBuffer = text;
  }

  private async submit(call: () => Promise<SubmitResult>): Promise<void> {
    this.inFlight = true;
    this.errorMessage = "";
    this.render();
    try {
      const result = await call();
      if (result.finalized) {
        this.rationaleBuffer = "";
      }
      if (result.view) {
        this.view = result.view;
      } else if (result.done) {
        this.status = "done";
      }
    } catch (err) {
      this.absorbTerminal(err);
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  private absorbTerminal(err: unknown): void {
    if (err instanceof ApiError && err.code === "SessionExpired") {
      this.status = "expired";
      return;
    }
    if (err instanceof ApiError && err.code === "QueueEmpty") {
      this.status = "done";
      return;
    }
    this.errorMessage = err instanceof Error ? err.message : String(err);
  }

  // -------------------- rendering --------------------

  render(): void {
    this.root.innerHTML = "";
    if (this.status === "expired") {
      this.renderTerminal("expired-screen", "Session expired", "The 90-minute session limit was reached. Thank you for participating.");
      return;
    }
    if (this.status === "done") {
      this.renderTerminal("done-screen", "All done", "There are no more methods in your queue. Thank you!");
      return;
    }
    if (!this.view) return;

    const header = this.el("div", "header");
    const label = this.el("h2", "", `Privacy label: ${this.view.label}`);
    label.id = "label";
    const description = this.el("p", "label-description", this.view.label_description);
    description.id = "label-description";
    const progress = this.el(
      "p",
      "progress",
      `${this.view.completed} done, ${this.view.remaining} remaining`,
    );
    progress.id = "progress";
    header.append(label, description, progress);

    const prompt = this.el(
      "p",
      "task-prompt",
      this.nextPickPrompt(),
    );

    const list = this.el("div", "stmt-list");
    const roleByIndex = new Map<number, string>();
    for (const sel of this.view.selections) {
      roleByIndex.set(sel.statement_index, sel.role);
    }
    for (const st of this.view.statements) {
      const row = this.el("div", "stmt-row");
      row.dataset.index = String(st.index);
      const lines =
        st.line_start === st.line_end
          ? `${st.line_start}`
          : `${st.line_start}-${st.line_end}`;
      row.append(this.el("span", "line-no", lines), this.el("pre", "stmt-text", st.text));
      const role = roleByIndex.get(st.index);
      if (role) {
        row.classList.add("selected", role);
      } else if (!this.inFlight) {
        row.classList.add("clickable");
        row.addEventListener("click", () => void this.selectStatement(st.index));
      }
      list.append(row);
    }

    const rationale = this.doc.createElement("textarea");
    rationale.id = "rationale";
    rationale.placeholder = "Why is your next selection relevant to this label?";
    rationale.value = this.rationaleBuffer;
    rationale.disabled = this.inFlight;
    rationale.addEventListener("input", () => this.setRationale(rationale.value));

    const noneButton = this.doc.createElement("button");
    noneButton.id = "none-relevant";
    noneButton.textContent = "There's no relevant line above";
    noneButton.disabled = this.inFlight;
    noneButton.addEventListener("click", () => this.noneRelevantClicked());

    const error = this.el("p", "error", this.errorMessage);
    error.id = "error";

    this.root.append(header, prompt, list, rationale, noneButton, error);

    if (this.confirmVisible) {
      const dialog = this.el("div", "confirm-dialog");
      dialog.id = "confirm-dialog";
      dialog.append(
        this.el(
          "p",
          "",
          this.view.selections.length === 0
            ? "Mark this method as having no relevant statement?"
            : "Finish this method with the selections made so far?",
        ),
      );
      const yes = this.doc.createElement("button");
      yes.id = "confirm-yes";
      yes.textContent = "Confirm";
      yes.addEventListener("click", () => void this.confirmNone(true));
      const no = this.doc.createElement("button");
      no.id = "confirm-no";
      no.textContent = "Cancel";
      no.addEventListener("click", () => void this.confirmNone(false));
      dialog.append(yes, no);
      this.root.append(dialog);
    }
  }

  private nextPickPrompt(): string {
    const n = this.view?.selections.length ?? 0;
    const ordinal = ["most", "second-most", "third-most"][n] ?? "next";
    return `Select the ${ordinal} relevant statement for this privacy label.`;
  }

  private renderTerminal(id: string, title: string, message: string): void {
    const screen = this.el("div", "terminal-screen");
    screen.id = id;
    screen.append(this.el("h2", "", title), this.el("p", "", message));
    this.root.append(screen);
  }

  private el(tag: string, className: string, text?: string): HTMLElement {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }
}
