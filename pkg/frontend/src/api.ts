/** Typed client for the pyramid evaluation service.
 *
 * Every payload this client sees is blinded: candidates are neutral labels,
 * and no response field ever names a model or an input configuration.
 */

export interface TaskSummary {
  task_id: string;
  candidates: number;
  facts: number;
  done: boolean;
}

export interface TaskListing {
  stage: "curate" | "judge";
  tasks: TaskSummary[];
}

export interface Fact {
  fact_id: string;
  text: string;
}

export interface Candidate {
  blind_label: string;
  text: string;
}

export interface TaskDetail {
  task_id: string;
  gold_text: string;
  facts: Fact[];
  candidates: Candidate[];
  done: boolean;
}

export interface QueueFact {
  fact_id: string;
  instance_id: string;
  text: string;
  status: "extracted" | "curated" | "rejected";
}

export interface FactsQueue {
  finalized: boolean;
  facts: QueueFact[];
  raw: Record<string, string>;
  flagged: string[];
}

export interface ComposeSummary {
  compose_id: string;
  stages_done: number;
  total_stages: number;
}

export interface ComposeView {
  compose_id: string;
  stage: number;
  total_stages: number;
  done: boolean;
  components?: Record<string, string>;
}

export interface Progress {
  facts: { total: number; curated: number; pending: number };
  tasks: { total: number; done: number };
  compositions: number;
}

export type Grid = Record<string, Record<string, boolean>>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }

  /** Server-side validation problems carry a field-level cause. */
  get isValidation(): boolean {
    return this.status === 422;
  }

  /** Someone else advanced the state; the UI should reload. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      ...init,
      headers: {
        "Content-Type": "application/json",
        "X-Annotator-Token": this.token,
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listTasks(): Promise<TaskListing> {
    return this.request<TaskListing>("/api/tasks");
  }

  getTask(taskId: string): Promise<TaskDetail> {
    return this.request<TaskDetail>(`/api/tasks/${taskId}`);
  }

  submitJudgment(taskId: string, grid: Grid): Promise<{ version: number; status: string }> {
    return this.request(`/api/tasks/${taskId}/judgment`, {
      method: "POST",
      body: JSON.stringify({ grid }),
    });
  }

  factsQueue(): Promise<FactsQueue> {
    return this.request<FactsQueue>("/api/facts/queue");
  }

  curate(action: {
    action: "accept" | "reject" | "edit" | "add" | "finalize";
    fact_id?: string;
    text?: string;
    instance_id?: string;
  }): Promise<unknown> {
    return this.request("/api/facts/queue", { method: "POST", body: JSON.stringify(action) });
  }

  listCompositions(): Promise<{ compose_tasks: ComposeSummary[] }> {
    return this.request("/api/compose");
  }

  composeView(composeId: string): Promise<ComposeView> {
    return this.request<ComposeView>(`/api/compose/${composeId}`);
  }

  submitComposition(composeId: string, text: string): Promise<{ stage_submitted: number }> {
    return this.request(`/api/compose/${composeId}`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  progress(): Promise<Progress> {
    return this.request<Progress>("/api/progress");
  }
}
