import { execFileSync, spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

const ROOT = path.join(__dirname, "..");
const CLI = path.join(ROOT, "dist", "cli.js");
const FIX = path.join(ROOT, "fixtures");
const fx = (name: string) => path.join(FIX, name);

function run(...args: string[]) {
  return spawnSync("node", [CLI, ...args], { encoding: "utf8" });
}

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "plots-cli-"));
}

describe("plot CLI", () => {
  it("decay and spectrum-map produce valid image files", () => {
    const dir = tmpdir();
    for (const [kind, inputs, name] of [
      ["decay", ["--in", fx("trajectory.csv"), "--in", fx("report.csv")], "d.svg"],
      [
        "spectrum-map",
        ["--in", fx("mismatch_map.csv"), "--in", fx("spectrum.csv")],
        "m.svg",
      ],
    ] as [string, string[], string][]) {
      const out = path.join(dir, name);
      const res = run(kind, ...inputs, "--out", out);
      expect(res.status, res.stderr).toBe(0);
      const body = fs.readFileSync(out, "utf8");
      expect(body.startsWith("<svg")).toBe(true);
      expect(body.trimEnd().endsWith("</svg>")).toBe(true);
    }
  });

  it("profile and ratio-hist render too", () => {
    const dir = tmpdir();
    expect(
      run("profile", "--in", fx("snapshot.csv"), "--out", path.join(dir, "p.svg")).status
    ).toBe(0);
    expect(
      run("ratio-hist", "--in", fx("ratios.csv"), "--out", path.join(dir, "h.svg")).status
    ).toBe(0);
  });

  it("schema violation exits nonzero and names the column", () => {
    const dir = tmpdir();
    const bad = path.join(dir, "bad.csv");
    fs.writeFileSync(bad, "tau,sup_lightcone\n0.0,1.0\n");
    const res = run("decay", "--in", bad, "--out", path.join(dir, "x.svg"));
    expect(res.status).toBe(4);
    expect(res.stderr).toContain("hsk_lightcone");
  });

  it("non-numeric cell exits nonzero and names the column", () => {
    const dir = tmpdir();
    const bad = path.join(dir, "bad.csv");
    fs.writeFileSync(bad, "tau,hsk_lightcone\n0.0,NaNsense\n");
    const res = run("decay", "--in", bad, "--out", path.join(dir, "x.svg"));
    expect(res.status).toBe(4);
    expect(res.stderr).toContain("hsk_lightcone");
  });

  it("header-only input reports no rows", () => {
    const dir = tmpdir();
    const empty = path.join(dir, "empty.csv");
    fs.writeFileSync(empty, "tau,hsk_lightcone\n");
    const res = run("decay", "--in", empty, "--out", path.join(dir, "x.svg"));
    expect(res.status).toBe(5);
    expect(res.stderr).toContain("no rows");
  });

  it("missing file and bad usage exit nonzero", () => {
    expect(run("decay", "--in", "/nope.csv", "--out", "/tmp/x.svg").status).toBe(3);
    expect(run("decay").status).toBe(2);
    expect(run("sparkline", "--in", fx("trajectory.csv"), "--out", "/tmp/x.svg").status).toBe(2);
  });

  it("outputs are byte-identical across runs", () => {
    const dir = tmpdir();
    const a = path.join(dir, "a.svg");
    const b = path.join(dir, "b.svg");
    run("decay", "--in", fx("trajectory.csv"), "--out", a);
    run("decay", "--in", fx("trajectory.csv"), "--out", b);
    expect(fs.readFileSync(a, "utf8")).toBe(fs.readFileSync(b, "utf8"));
  });
});
