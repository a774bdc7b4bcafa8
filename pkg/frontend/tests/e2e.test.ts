/**
 * Drives the real Python session service with the compiled controller:
 * builds a scene-cut clip, serves it, and plays the operator. The UI
 * contract under test: exactly one re-selection prompt (at the cut), and
 * the clicked index ends up in the trace.
 */

import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { PromptRequest, SessionController } from "../src/controller.js";

const PYTHON = "python3";

function primaryInstalled(): boolean {
  const probe = spawnSync(PYTHON, ["-c", "import maskflow"], { encoding: "utf-8" });
  return probe.status === 0;
}

const FIXTURE_SCRIPT = `
import sys
from maskflow import RunConfig, Session, TrackingPolicy
from maskflow.synthetic import scene_cut_fixture, write_background_dir

root = sys.argv[1]
fx = scene_cut_fixture(root + "/fg", n_frames=8, cut=5)
write_background_dir(root + "/bg", 8, 64, 64)
session = Session.create(RunConfig(
    manifest=str(fx.manifest_path), background=root + "/bg",
    out=root + "/session", policy=TrackingPolicy.adaptive(tau=0.5),
    on_reselect="serve",
))
session.advance()
print("ready")
`;

describe.skipIf(!primaryInstalled())("UI loop against the live service", () => {
  let proc: ReturnType<typeof spawn> | null = null;
  let base = "";
  let root = "";

  beforeAll(async () => {
    root = mkdtempSync(join(tmpdir(), "maskflow-ui-"));
    const setup = spawnSync(PYTHON, ["-c", FIXTURE_SCRIPT, root], { encoding: "utf-8" });
    expect(setup.status, setup.stderr).toBe(0);

    proc = spawn(PYTHON, ["-m", "maskflow", "serve", "--out", join(root, "session"), "--port", "0"]);
    base = await new Promise<string>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("service did not start")), 15000);
      proc!.stdout!.on("data", (chunk: Buffer) => {
        const match = String(chunk).match(/http:\/\/[\d.]+:\d+/);
        if (match) {
          clearTimeout(timer);
          resolve(match[0]);
        }
      });
      proc!.on("error", reject);
    });
  }, 30000);

  afterAll(async () => {
    if (base) {
      await fetch(`${base}/api/shutdown`, { method: "POST" }).catch(() => undefined);
    }
    proc?.kill();
  });

  it("surfaces exactly one re-selection prompt and records the click", async () => {
    const client = new ServiceClient(base);
    const prompts: PromptRequest[] = [];
    let controller: SessionController;

    const finished = new Promise<void>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("session never completed")), 20000);
      controller = new SessionController(
        client,
        {
          onPrompt: (prompt) => {
            prompts.push(prompt);
            // the operator: first pick is candidate 0, re-selections take 1
            void controller.submit(prompt.frame, prompt.frame === 0 ? 0 : 1);
          },
          onDone: () => {
            clearTimeout(timer);
            resolve();
          },
          onError: (error) => {
            clearTimeout(timer);
            reject(error instanceof Error ? error : new Error(String(error)));
          },
        },
        50,
      );
    });
    controller!.start();
    await finished;
    controller!.stop();

    const reselections = prompts.filter((p) => p.frame !== 0);
    expect(prompts[0]!.frame).toBe(0);
    expect(reselections).toHaveLength(1);
    expect(reselections[0]!.frame).toBe(5);

    const trace = await client.trace();
    expect(trace.events).toEqual([{ frame: 5, kind: "reselected" }]);
    expect(trace.frames[5]!.chosen_index).toBe(1);
  }, 30000);
});
