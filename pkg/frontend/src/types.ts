export interface StatementRow {
  index: number;
  text: string;
  line_start: number;
  line_end: number;
}

export interface SelectionView {
  order: number;
  statement_index: number;
  role: string; // "red" for the first pick, "blue" for the second
}

export interface SampleView {
  session_id: string;
  sample_id: string;
  code: string;
  label: string;
  label_description: string;
  statements: StatementRow[];
  selections: SelectionView[];
  completed: number;
  remaining: number;
}

export interface SessionInfo {
  session_id: string;
  annotator_id: string;
  queued: number;
  seconds_left: number;
}

export interface SubmitResult {
  finalized: boolean;
  confirmation_required?: boolean;
  view: SampleView | null;
  done?: boolean;
}

export interface Progress {
  session_id: string;
  annotator_id: string;
  completed: number;
  remaining: number;
  seconds_left: number;
  expired: boolean;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}
