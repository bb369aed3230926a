import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

const ROOT = path.join(__dirname, "..");
const CLI = path.join(ROOT, "dist", "cli.js");
const FIXTURES = path.join(__dirname, "fixtures");

const tmpdir = fs.mkdtempSync(path.join(os.tmpdir(), "weight-exporter-cli-"));
afterAll(() => fs.rmSync(tmpdir, { recursive: true, force: true }));

beforeAll(() => {
  if (!fs.existsSync(CLI)) {
    const build = spawnSync("npx", ["tsc", "-p", "tsconfig.json"], { cwd: ROOT });
    expect(build.status, String(build.stderr)).toBe(0);
  }
});

function run(...args: string[]) {
  return spawnSync(process.execPath, [CLI, ...args], { encoding: "utf-8" });
}

describe("command line", () => {
  it("exports an archive and reports totals", () => {
    const out = path.join(tmpdir, "single.tarc");
    const res = run("--manifest", path.join(FIXTURES, "single16_manifest.json"), "--out", out);
    expect(res.status).toBe(0);
    expect(res.stdout).toMatch(/1 tensors, 2304 parameters/);
    const golden = fs.readFileSync(path.join(FIXTURES, "golden.tarc"));
    expect(fs.readFileSync(out).equals(golden)).toBe(true);
  });

  it("exits 1 on usage errors", () => {
    expect(run().status).toBe(1);
    expect(run("--manifest", "m.json").status).toBe(1);
    expect(run("--bogus").status).toBe(1);
  });

  it("exits 2 on data errors", () => {
    const manifest = path.join(tmpdir, "broken.json");
    fs.writeFileSync(
      manifest,
      JSON.stringify({
        source: path.join(FIXTURES, "single16.safetensors"),
        network: "tiny",
        spec: path.join(FIXTURES, "tiny.json"),
        mapping: { "features.1.weight": "conv" },
      }),
    );
    const res = run("--manifest", manifest, "--out", path.join(tmpdir, "x.tarc"));
    expect(res.status).toBe(2);
    expect(res.stderr).toMatch(/features\.1\.weight/);
  });

  it("prints usage on --help", () => {
    const res = run("--help");
    expect(res.status).toBe(0);
    expect(res.stdout).toMatch(/--manifest/);
  });
});
