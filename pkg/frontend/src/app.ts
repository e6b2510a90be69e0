/** DOM layer: renders the three annotation stages and wires them to the API.
 *
 * All state that matters lives on the server; this file is presentation
 * plus the client-side gating from state.ts.
 */

import { AnnotationApi, ApiError, type TaskDetail } from "./api.js";
import {
  JudgmentGridState,
  MemoryDraftStore,
  SubmissionGuard,
  allowedStages,
  firstOpenStage,
  wordCount,
  type DraftStore,
  type Stage,
} from "./state.js";

const guard = new SubmissionGuard();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function notice(kind: "error" | "info", text: string): HTMLElement {
  return el("div", { class: `notice ${kind}` }, text);
}

async function showError(root: HTMLElement, err: unknown): Promise<void> {
  const box = root.querySelector(".messages");
  if (!box) return;
  box.replaceChildren();
  if (err instanceof ApiError && err.isConflict) {
    box.append(notice("error", `The study moved on (${err.detail}). Reload to continue.`));
  } else if (err instanceof ApiError) {
    box.append(notice("error", `Rejected: ${err.detail}`));
  } else {
    box.append(notice("error", String(err)));
  }
}

export class App {
  private api!: AnnotationApi;
  private stage: Stage = "curate";

  constructor(
    private root: HTMLElement,
    private drafts: DraftStore = typeof localStorage === "undefined"
      ? new MemoryDraftStore()
      : localStorage,
  ) {}

  async start(): Promise<void> {
    const token = this.drafts.getItem("annotator-token");
    if (!token) {
      this.renderLogin();
      return;
    }
    this.api = new AnnotationApi("", token);
    await this.renderShell();
  }

  private renderLogin(): void {
    const input = el("input", { type: "password", placeholder: "annotator token" });
    const button = el("button", {}, "Sign in");
    button.addEventListener("click", async () => {
      this.drafts.setItem("annotator-token", (input as HTMLInputElement).value.trim());
      await this.start();
    });
    this.root.replaceChildren(
      el("div", { class: "login" }, el("h1", {}, "Annotation console"), input, button),
    );
  }

  private async renderShell(): Promise<void> {
    const [listing, compose, queue, progress] = await Promise.all([
      this.api.listTasks(),
      this.api.listCompositions(),
      this.api.factsQueue(),
      this.api.progress(),
    ]);
    const gate = allowedStages(listing, compose.compose_tasks, queue.finalized);
    if (!gate[this.stage]) this.stage = firstOpenStage(gate);

    const nav = el("nav", {});
    for (const stage of ["curate", "compose", "judge"] as Stage[]) {
      const button = el(
        "button",
        { class: stage === this.stage ? "active" : "", "data-stage": stage },
        stage,
      );
      if (!gate[stage]) button.setAttribute("disabled", "disabled");
      button.addEventListener("click", () => {
        this.stage = stage;
        void this.renderShell();
      });
      nav.append(button);
    }
    const header = el(
      "header",
      {},
      el("h1", {}, "Annotation console"),
      nav,
      el(
        "div",
        { class: "progress" },
        `facts ${progress.facts.curated}/${progress.facts.total} curated · ` +
          `tasks ${progress.tasks.done}/${progress.tasks.total} judged · ` +
          `${progress.compositions} paragraphs written`,
      ),
    );
    const messages = el("div", { class: "messages" });
    const main = el("main", {});
    this.root.replaceChildren(header, messages, main);

    if (this.stage === "curate") await this.renderCurate(main, queue.finalized);
    else if (this.stage === "compose") await this.renderCompose(main);
    else await this.renderJudge(main);
  }

  // --- stage 1: fact curation ---

  private async renderCurate(main: HTMLElement, finalized: boolean): Promise<void> {
    const queue = await this.api.factsQueue();
    const list = el("div", { class: "fact-queue" });
    for (const fact of queue.facts) {
      const text = el("input", { type: "text", value: fact.text });
      const status = el("span", { class: `status ${fact.status}` }, fact.status);
      const accept = el("button", {}, "accept");
      const reject = el("button", {}, "reject");
      const save = el("button", {}, "save edit");
      for (const [button, action] of [
        [accept, "accept"],
        [reject, "reject"],
        [save, "edit"],
      ] as const) {
        if (finalized) button.setAttribute("disabled", "disabled");
        button.addEventListener("click", async () => {
          try {
            await this.api.curate({
              action,
              fact_id: fact.fact_id,
              text: (text as HTMLInputElement).value,
            });
            await this.renderShell();
          } catch (err) {
            await showError(this.root, err);
          }
        });
      }
      list.append(el("div", { class: "fact-row" }, status, text, accept, save, reject));
    }
    const finalize = el("button", { class: "finalize" }, "Finalize curation");
    if (finalized) finalize.setAttribute("disabled", "disabled");
    finalize.addEventListener("click", async () => {
      try {
        await this.api.curate({ action: "finalize" });
        this.stage = "compose";
        await this.renderShell();
      } catch (err) {
        await showError(this.root, err);
      }
    });
    main.replaceChildren(
      el("p", {}, "Accept, edit, or reject the extracted facts. Finalizing builds the tasks."),
      list,
      finalize,
    );
  }

  // --- stage 2: staged composition ---

  private async renderCompose(main: HTMLElement): Promise<void> {
    const { compose_tasks } = await this.api.listCompositions();
    const container = el("div", { class: "compose-list" });
    for (const summary of compose_tasks) {
      const view = await this.api.composeView(summary.compose_id);
      const box = el("section", { class: "compose-task" });
      box.append(el("h2", {}, `Paragraph ${summary.compose_id} — stage ${view.stage}/${view.total_stages}`));
      if (view.done) {
        box.append(notice("info", "Both paragraphs submitted."));
        container.append(box);
        continue;
      }
      for (const [name, value] of Object.entries(view.components ?? {})) {
        box.append(el("h3", {}, name.replace(/_/g, " ")), el("p", { class: "component" }, value));
      }
      const textarea = el("textarea", { rows: "8", "data-compose": summary.compose_id });
      const counter = el("span", { class: "word-counter" }, "0 words");
      textarea.addEventListener("input", () => {
        counter.textContent = `${wordCount((textarea as HTMLTextAreaElement).value)} words`;
      });
      const submit = el("button", {}, "Submit paragraph");
      submit.addEventListener("click", async () => {
        const text = (textarea as HTMLTextAreaElement).value;
        if (wordCount(text) === 0) {
          await showError(this.root, new ApiError(422, "write a paragraph before submitting"));
          return;
        }
        try {
          await guard.run(`compose:${summary.compose_id}`, () =>
            this.api.submitComposition(summary.compose_id, text),
          );
          await this.renderShell();
        } catch (err) {
          await showError(this.root, err);
        }
      });
      box.append(textarea, el("div", {}, counter, submit));
      container.append(box);
    }
    main.replaceChildren(
      el(
        "p",
        {},
        "Write one related-work paragraph from the inputs shown. More inputs appear in the second pass.",
      ),
      container,
    );
  }

  // --- stage 3: blinded judgment grid ---

  private async renderJudge(main: HTMLElement): Promise<void> {
    const listing = await this.api.listTasks();
    const list = el("ul", { class: "task-list" });
    for (const task of listing.tasks) {
      const link = el("a", { href: "#" }, `${task.task_id} ${task.done ? "✓" : ""}`);
      link.addEventListener("click", async (event) => {
        event.preventDefault();
        const detail = await this.api.getTask(task.task_id);
        this.renderTask(main, detail);
      });
      list.append(el("li", {}, link));
    }
    main.replaceChildren(el("p", {}, "Pick a task to judge."), list);
  }

  private renderTask(main: HTMLElement, detail: TaskDetail): void {
    const grid = new JudgmentGridState(detail, this.drafts);
    const table = el("table", { class: "grid" });
    const head = el("tr", {}, el("th", {}, "fact"));
    for (const candidate of detail.candidates) head.append(el("th", {}, candidate.blind_label));
    table.append(head);
    for (const fact of detail.facts) {
      const row = el("tr", {}, el("td", {}, fact.text));
      for (const candidate of detail.candidates) {
        const box = el("input", { type: "checkbox" }) as HTMLInputElement;
        const existing = grid.valueOf(candidate.blind_label, fact.fact_id);
        if (existing !== undefined) box.checked = existing;
        if (grid.readOnly) box.disabled = true;
        box.addEventListener("change", () => {
          grid.setCell(candidate.blind_label, fact.fact_id, box.checked);
          submit.disabled = !grid.canSubmit;
          counter.textContent = `${grid.filledCells}/${grid.totalCells} cells`;
        });
        row.append(el("td", {}, box));
      }
      table.append(row);
    }
    const counter = el("span", { class: "cell-counter" }, `${grid.filledCells}/${grid.totalCells} cells`);
    const submit = el("button", {}, grid.readOnly ? "Already submitted" : "Submit judgment") as HTMLButtonElement;
    submit.disabled = !grid.canSubmit;
    submit.addEventListener("click", async () => {
      try {
        await guard.run(`judgment:${detail.task_id}`, () =>
          this.api.submitJudgment(detail.task_id, grid.toGrid()),
        );
        grid.clearDraft();
        await this.renderShell();
      } catch (err) {
        await showError(this.root, err);
      }
    });
    main.replaceChildren(
      el("h2", {}, detail.task_id),
      el("h3", {}, "Reference paragraph"),
      el("p", { class: "gold" }, detail.gold_text),
      ...detail.candidates.flatMap((c) => [
        el("h3", {}, `Candidate ${c.blind_label}`),
        el("p", { class: "candidate" }, c.text),
      ]),
      el("h3", {}, "Which facts does each candidate cover?"),
      table,
      el("div", {}, counter, submit),
    );
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(document.getElementById("app") as HTMLElement);
  void app.start();
}
