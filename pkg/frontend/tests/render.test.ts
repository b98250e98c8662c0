import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseSweep, parseTrace } from "../src/csv.js";
import { formatNumber, linearScale, logScale } from "../src/chart.js";
import { Surface } from "../src/raster.js";
import { renderConvergence, renderSweep } from "../src/render.js";
import { main } from "../src/cli.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

function writeTrace(dir: string, name: string, solver: string, rows: string[]): string {
  const path = join(dir, name);
  writeFileSync(
    path,
    [`# solver=${solver}`, "# loss=l1", "iter,f,grad_norm,dist,elapsed_ms", ...rows, ""].join("\n"),
  );
  return path;
}

const ROWS = [
  "0,9.5,2.1,0.5,0",
  "1,8.2,1.4,0.05,0",
  "2,7.9,0.6,0.002,0",
  "3,7.85,0.2,1e-05,0",
];

function writeSweep(dir: string): string {
  const path = join(dir, "sweep.csv");
  writeFileSync(
    path,
    [
      "theta,method,success_rate",
      "0.1,rsg,1",
      "0.2,rsg,0.9",
      "0.3,rsg,0.8",
      "0.1,linf,1",
      "0.2,linf,0.4",
      "0.3,linf,0",
      "",
    ].join("\n"),
  );
  return path;
}

describe("csv parsing", () => {
  it("reads trace meta, columns, and records", () => {
    const dir = tmp();
    const trace = parseTrace(writeTrace(dir, "t.csv", "rsg", ROWS));
    expect(trace.meta.solver).toBe("rsg");
    expect(trace.columns).toEqual(["iter", "f", "grad_norm", "dist", "elapsed_ms"]);
    expect(trace.rows).toHaveLength(4);
    expect(trace.rows[3].dist).toBeCloseTo(1e-5);
  });

  it("reads sweep series sorted by theta", () => {
    const sweep = parseSweep(writeSweep(tmp()));
    expect([...sweep.series.keys()].sort()).toEqual(["linf", "rsg"]);
    expect(sweep.series.get("linf")!.map((p) => p.rate)).toEqual([1, 0.4, 0]);
    for (const pts of sweep.series.values()) {
      for (const p of pts) expect(p.rate).toBeGreaterThanOrEqual(0);
      for (const p of pts) expect(p.rate).toBeLessThanOrEqual(1);
    }
  });

  it("rejects an empty sweep table", () => {
    const dir = tmp();
    const path = join(dir, "empty.csv");
    writeFileSync(path, "theta,method,success_rate\n");
    expect(() => parseSweep(path)).toThrow(/empty sweep/);
  });
});

describe("scales", () => {
  it("linear scale maps endpoints and picks in-range ticks", () => {
    const s = linearScale(0, 10, 100, 500);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(500);
    for (const t of s.ticks) {
      expect(t).toBeGreaterThanOrEqual(0);
      expect(t).toBeLessThanOrEqual(10);
    }
  });

  it("log scale places decade ticks", () => {
    const s = logScale(1e-6, 1, 400, 20);
    expect(s(1e-6)).toBe(400);
    expect(s(1)).toBe(20);
    expect(s.ticks).toContain(1e-6);
    expect(s.ticks).toContain(1);
    expect(s.format(1e-3)).toBe("1e-3");
  });

  it("formats plain and scientific numbers", () => {
    expect(formatNumber(0)).toBe("0");
    expect(formatNumber(0.25)).toBe("0.25");
    expect(formatNumber(12345678)).toBe("1e7");
  });
});

describe("raster surface", () => {
  it("encodes a valid PNG header and is deterministic", () => {
    const s = new Surface(40, 30);
    s.line(0, 0, 39, 29, [255, 0, 0], 2);
    s.text(2, 2, "AB 0.5", [0, 0, 0]);
    const png1 = s.toPng();
    const png2 = s.toPng();
    expect([...png1.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    expect(png1.equals(png2)).toBe(true);
  });
});

describe("convergence rendering", () => {
  it("plots one point per trace record and writes the PNG", () => {
    const dir = tmp();
    const a = writeTrace(dir, "a.csv", "rsg", ROWS);
    const b = writeTrace(dir, "b.csv", "irls", ROWS.slice(0, 2));
    const out = join(dir, "fig.png");
    const res = renderConvergence([a, b], { out });
    expect(res.pointCounts.get(a)).toBe(4);
    expect(res.pointCounts.get(b)).toBe(2);
    expect(readFileSync(out).subarray(1, 4).toString()).toBe("PNG");
  });

  it("handles a single-record trace without crashing", () => {
    const dir = tmp();
    const a = writeTrace(dir, "one.csv", "rgd", [ROWS[0]]);
    const out = join(dir, "fig.png");
    expect(renderConvergence([a], { out }).pointCounts.get(a)).toBe(1);
  });

  it("fails naming the file when the requested column is absent", () => {
    const dir = tmp();
    const path = join(dir, "nodist.csv");
    writeFileSync(path, "# solver=rgd\niter,f,grad_norm,elapsed_ms\n0,1,1,0\n");
    expect(() => renderConvergence([path], { out: join(dir, "f.png") })).toThrow(
      /column 'dist' missing in .*nodist\.csv/,
    );
  });

  it("renders identically for identical inputs", () => {
    const dir = tmp();
    const a = writeTrace(dir, "a.csv", "rsg", ROWS);
    const out1 = join(dir, "f1.png");
    const out2 = join(dir, "f2.png");
    renderConvergence([a], { out: out1 });
    renderConvergence([a], { out: out2 });
    expect(readFileSync(out1).equals(readFileSync(out2))).toBe(true);
  });
});

describe("sweep rendering", () => {
  it("renders two curves bounded in [0,1]", () => {
    const dir = tmp();
    const out = join(dir, "sweep.png");
    const res = renderSweep([writeSweep(dir)], { out });
    expect([...res.pointCounts.values()][0]).toBe(6);
    expect(existsSync(out)).toBe(true);
  });

  it("produces no output file on an empty grid", () => {
    const dir = tmp();
    const path = join(dir, "empty.csv");
    writeFileSync(path, "theta,method,success_rate\n");
    const out = join(dir, "nope.png");
    expect(() => renderSweep([path], { out })).toThrow();
    expect(existsSync(out)).toBe(false);
  });
});

describe("cli", () => {
  it("renders a convergence figure end to end", async () => {
    const dir = tmp();
    const a = writeTrace(dir, "a.csv", "rsg", ROWS);
    const out = join(dir, "fig.png");
    const code = await main(["convergence", a, "--y", "dist", "--log", "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("rejects an unknown y column choice", async () => {
    const dir = tmp();
    const a = writeTrace(dir, "a.csv", "rsg", ROWS);
    await expect(main(["convergence", a, "--y", "bogus"])).rejects.toThrow();
  });
});
