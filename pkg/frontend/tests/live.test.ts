// Scripted UI flow against a live annotation service (the acceptance flow):
// first pick renders red, second blue, selected rows are inert, none-relevant
// needs confirmation, and a third pick auto-advances to the next method.
import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionApi } from "../src/api.js";
import { AnnotationView } from "../src/view.js";

let server: ChildProcess;
let baseUrl = "";
let annotationsPath = "";

async function waitForServer(url: string, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      const r = await fetch(`${url}/api/session`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ annotator_id: "warmup" }),
      });
      if (r.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error(`service at ${url} never came up`);
}

beforeAll(async () => {
  server = spawn("python3", [new URL("./serve_fixture.py", import.meta.url).pathname], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  const port: number = await new Promise((resolve, reject) => {
    let buffer = "";
    server.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const portMatch = buffer.match(/PORT (\d+)/);
      const annMatch = buffer.match(/ANNOTATIONS (\S+)/);
      if (annMatch) annotationsPath = annMatch[1]!;
      if (portMatch && annMatch) resolve(Number(portMatch[1]));
    });
    server.on("exit", (code) => reject(new Error(`fixture server exited early (${code})`)));
    setTimeout(() => reject(new Error("fixture server timed out")), 20000);
  });
  baseUrl = `http://127.0.0.1:${port}`;
  await waitForServer(baseUrl);
}, 30000);

afterAll(() => {
  server?.kill();
});

function makeView(): { root: HTMLElement; view: AnnotationView } {
  const win = new Window();
  const root = win.document.createElement("div") as unknown as HTMLElement;
  win.document.body.appendChild(root as never);
  const api = new SessionApi(baseUrl, (...args) => fetch(...args));
  return { root, view: new AnnotationView(root, api) };
}

function rowByIndex(root: HTMLElement, index: number): HTMLElement {
  return root.querySelector(`.stmt-row[data-index="${index}"]`) as HTMLElement;
}

describe("UI flow against a live annotate service", () => {
  it("runs the four-step protocol end to end", async () => {
    const { root, view } = makeView();
    await view.start("live-tester");

    // the survey view: code rows, label and its description, none control
    expect(root.querySelectorAll(".stmt-row")).toHaveLength(6);
    expect(root.querySelector("#label")!.textContent).toContain("Advertisement");
    expect(root.querySelector("#label-description")!.textContent).toContain(
      "advertisement services",
    );
    expect(root.querySelector("#none-relevant")).not.toBeNull();
    const firstSampleProgress = root.querySelector("#progress")!.textContent;

    // first pick needs a rationale (client-side guard, no request sent)
    await view.selectStatement(2);
    expect(root.querySelector("#error")!.textContent).toContain("rationale");
    expect(rowByIndex(root, 2).classList.contains("red")).toBe(false);

    // first pick renders red
    view.setRationale("stores the location for ads");
    await view.selectStatement(2);
    expect(rowByIndex(root, 2).classList.contains("red")).toBe(true);
    expect(rowByIndex(root, 2).classList.contains("clickable")).toBe(false);

    // re-clicking the selected row is impossible: no clickable class, and the
    // guard never issues a request (the view stays unchanged)
    const htmlBefore = root.innerHTML;
    await view.selectStatement(2);
    expect(root.innerHTML).toBe(htmlBefore);

    // second pick renders blue
    await view.selectStatement(1);
    expect(rowByIndex(root, 1).classList.contains("blue")).toBe(true);
    expect(rowByIndex(root, 2).classList.contains("red")).toBe(true);

    // third pick auto-finalizes and advances to the next method
    await view.selectStatement(4);
    expect(root.querySelector("#progress")!.textContent).not.toBe(firstSampleProgress);
    expect(root.querySelectorAll(".selected")).toHaveLength(0); // fresh sample

    // none-relevant needs explicit confirmation before persisting
    view.noneRelevantClicked();
    expect(root.querySelector("#confirm-dialog")).not.toBeNull();
    await view.confirmNone(false);
    expect(root.querySelector("#confirm-dialog")).toBeNull();
    let written = readFileSync(annotationsPath, "utf-8").trim().split("\n");
    expect(written).toHaveLength(1); // only the finalized first sample

    view.noneRelevantClicked();
    await view.confirmNone(true);
    written = readFileSync(annotationsPath, "utf-8").trim().split("\n");
    expect(written).toHaveLength(2);

    const first = JSON.parse(written[0]!);
    expect(first.annotator_id).toBe("live-tester");
    expect(first.none_relevant).toBe(false);
    expect(first.selections.map((s: { statement_index: number }) => s.statement_index)).toEqual([
      2, 1, 4,
    ]);
    expect(first.selections[0].rationale).toContain("location");
    const second = JSON.parse(written[1]!);
    expect(second.none_relevant).toBe(true);
    expect(second.selections).toEqual([]);

    // third sample: finish via DOM clicks (the real row handlers)
    view.setRationale("clicked through the row");
    rowByIndex(root, 5).click();
    await new Promise((resolve) => setTimeout(resolve, 300));
    expect(rowByIndex(root, 5).classList.contains("red")).toBe(true);
  }, 30000);

  it("server rejects a duplicate index when a stale client bypasses the row guard", async () => {
    const api = new SessionApi(baseUrl, (...args) => fetch(...args));
    const info = await api.createSession("stale-tester");
    await api.select(info.session_id, 1, "first pick");
    await expect(api.select(info.session_id, 1)).rejects.toThrow(/DuplicateSelection/);
  }, 30000);
});
