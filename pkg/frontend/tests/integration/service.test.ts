/**
 * End-to-end contract tests against a live `pointops serve` process.
 * Covers the UI acceptance criterion: slider endpoints pixel-identical
 * to single-style outputs, chain [a, a] equals two manual round trips,
 * and the identity style returning a pixel-identical preview.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../../src/api.js";
import { decodeBase64Png, decodePng, samePixels } from "../helpers/png.js";

const FIXTURE_SCRIPT = fileURLToPath(new URL("../fixtures/build_styleset.py", import.meta.url));
const PORT = 18000 + (process.pid % 2000);

let workDir: string;
let server: ChildProcess;
let client: Client;
let inputB64: string;

async function waitForHealth(timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await client.health()) return;
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service did not become healthy in time");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "pointops-ui-"));
  const build = spawnSync("python3", [FIXTURE_SCRIPT, workDir], { encoding: "utf-8" });
  if (build.status !== 0) {
    throw new Error(`fixture build failed: ${build.stderr}`);
  }
  server = spawn("python3", [
    "-m", "pointops.cli", "serve",
    "--set", join(workDir, "styleset.json"),
    "--bind", `127.0.0.1:${PORT}`,
  ]);
  client = new Client(`http://127.0.0.1:${PORT}`);
  inputB64 = readFileSync(join(workDir, "input.png")).toString("base64");
  await waitForHealth();
}, 60000);

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("service contract", () => {
  it("lists the fixture styles", async () => {
    expect(await client.styles()).toEqual(["identity", "lift", "warm"]);
  });

  it("identity style returns a pixel-identical preview", async () => {
    const resp = await client.enhance(inputB64, "identity");
    const original = decodePng(new Uint8Array(Buffer.from(inputB64, "base64")));
    const output = decodeBase64Png(resp.image);
    expect(samePixels(output, original)).toBe(true);
    expect(resp.tf).toHaveLength(256);
    expect(resp.ccm).toHaveLength(9);
  });

  it("slider t=0 preview is pixel-identical to style a", async () => {
    const single = await client.enhance(inputB64, "lift");
    const mixed = await client.interpolate(inputB64, "lift", "warm", 0);
    expect(samePixels(decodeBase64Png(mixed.image), decodeBase64Png(single.image))).toBe(true);
    expect(mixed.tf).toEqual(single.tf);
    expect(mixed.ccm).toEqual(single.ccm);
  });

  it("slider t=1 preview is pixel-identical to style b", async () => {
    const single = await client.enhance(inputB64, "warm");
    const mixed = await client.interpolate(inputB64, "lift", "warm", 1);
    expect(samePixels(decodeBase64Png(mixed.image), decodeBase64Png(single.image))).toBe(true);
  });

  it("intermediate t differs from both endpoints", async () => {
    const a = await client.enhance(inputB64, "lift");
    const b = await client.enhance(inputB64, "warm");
    const mixed = await client.interpolate(inputB64, "lift", "warm", 0.5);
    const mixedPixels = decodeBase64Png(mixed.image);
    expect(samePixels(mixedPixels, decodeBase64Png(a.image))).toBe(false);
    expect(samePixels(mixedPixels, decodeBase64Png(b.image))).toBe(false);
  });

  it("chain [a, a] matches two manual enhance round trips", async () => {
    const first = await client.enhance(inputB64, "lift");
    const second = await client.enhance(first.image, "lift");
    const chained = await client.chain(inputB64, ["lift", "lift"]);
    expect(samePixels(decodeBase64Png(chained.image), decodeBase64Png(second.image))).toBe(true);
    expect(chained.stages).toHaveLength(2);
    expect(chained.stages[0].tf).toEqual(first.tf);
    expect(chained.stages[1].tf).toEqual(second.tf);
  });

  it("surfaces backend errors with their message", async () => {
    await expect(client.enhance(inputB64, "nope")).rejects.toThrow(/unknown style/);
  });

  it("abort signals cancel requests", async () => {
    const controller = new AbortController();
    const pending = client.enhance(inputB64, "lift", controller.signal);
    controller.abort();
    await expect(pending).rejects.toThrow();
  });
});
