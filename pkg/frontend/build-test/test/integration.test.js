/** End-to-end: the UI client against the real service and engine.
 *
 * Covers the mask round-trip (uploaded PNG comes back byte-identical),
 * bit-identical results between UI-triggered propagation and the CLI,
 * and the re-annotation loop.
 */
import assert from "node:assert/strict";
import { test } from "node:test";
import { execFileSync, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync, mkdirSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { CutoutClient } from "../src/api.js";
import { rasterizeOps } from "../src/mask.js";
import { encodeMaskPng, encodeRgbPng } from "./png.js";
const W = 56;
const H = 40;
const N = 5;
function havePython() {
    const probe = spawnSync("python3", ["-c", "import videocutout"], { timeout: 30_000 });
    return probe.status === 0;
}
function writeScene(root) {
    mkdirSync(join(root, "frames"), { recursive: true });
    for (let i = 0; i < N; i++) {
        const rgb = new Uint8Array(W * H * 3);
        for (let p = 0; p < W * H; p++) {
            rgb[3 * p] = 60;
            rgb[3 * p + 1] = 60;
            rgb[3 * p + 2] = 60;
        }
        for (let y = 13; y < 26; y++) {
            for (let x = 18; x < 31; x++) {
                const p = y * W + x;
                rgb[3 * p] = 200;
                rgb[3 * p + 1] = 40;
                rgb[3 * p + 2] = 40;
            }
        }
        writeFileSync(join(root, "frames", String(i).padStart(5, "0") + ".png"), encodeRgbPng(rgb, W, H));
    }
}
/** Paint the square the way a user would: fat strokes + background cleanup. */
function paintSquareMask() {
    const ops = [
        { kind: "stroke", stroke: { points: [{ x: 20, y: 15 }, { x: 28, y: 15 }], radius: 3, polarity: "foreground" } },
        { kind: "stroke", stroke: { points: [{ x: 20, y: 20 }, { x: 28, y: 20 }], radius: 3, polarity: "foreground" } },
        { kind: "stroke", stroke: { points: [{ x: 20, y: 24 }, { x: 28, y: 24 }], radius: 3, polarity: "foreground" } },
        { kind: "polygon", points: [{ x: 18, y: 13 }, { x: 30, y: 13 }, { x: 30, y: 25 }, { x: 18, y: 25 }], polarity: "foreground" },
    ];
    return rasterizeOps(ops, W, H);
}
async function startService() {
    const proc = spawn("python3", ["-m", "videocutout.cli", "serve", "--port", "0"], { stdio: ["ignore", "pipe", "inherit"] });
    const base = await new Promise((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("service did not start")), 30_000);
        let buffer = "";
        proc.stdout.on("data", (data) => {
            buffer += data.toString();
            const m = buffer.match(/serving on (http:\/\/[\d.]+:\d+)/);
            if (m) {
                clearTimeout(timer);
                resolve(m[1]);
            }
        });
        proc.on("exit", () => reject(new Error("service exited early")));
    });
    return { proc, base };
}
test("integration: paint, round-trip, propagate, compare with CLI", { timeout: 300_000 }, async (t) => {
    if (!havePython()) {
        t.skip("python videocutout package not importable");
        return;
    }
    const root = mkdtempSync(join(tmpdir(), "cutout-ui-"));
    const seqDir = join(root, "seq");
    mkdirSync(seqDir);
    writeScene(seqDir);
    const { proc, base } = await startService();
    try {
        const client = new CutoutClient(base);
        const info = await client.createSession(seqDir, 2);
        assert.equal(info.frames, N);
        assert.equal(info.width, W);
        assert.equal(info.height, H);
        const recommended = await client.recommendations(info.session_id);
        assert.equal(recommended.length, 2);
        for (const f of recommended)
            assert.ok(f >= 1 && f <= N);
        // --- mask round-trip: uploaded bytes come back identical -------------
        const mask = paintSquareMask();
        const png = encodeMaskPng(mask, W, H);
        await client.uploadAnnotation(info.session_id, 1, png);
        const echoed = Buffer.from(await client.fetchAnnotation(info.session_id, 1));
        assert.ok(echoed.equals(png), "annotation round-trip must be byte-identical");
        // --- propagate from the UI path --------------------------------------
        await client.startPropagation(info.session_id);
        const status = await client.waitForPropagation(info.session_id, undefined, 200);
        assert.equal(status.state, "done");
        const uiMasks = [];
        for (let f = 1; f <= N; f++) {
            uiMasks.push(Buffer.from(await client.fetchResultMask(info.session_id, f)));
        }
        // --- same inputs through the CLI -------------------------------------
        const annPath = join(root, "ann1.png");
        writeFileSync(annPath, png);
        const outDir = join(root, "cli-out");
        execFileSync("python3", ["-m", "videocutout.cli", "propagate",
            "--seq", seqDir, "--ann", `1=${annPath}`, "--out", outDir], { timeout: 120_000 });
        const files = readdirSync(outDir).sort();
        assert.equal(files.length, N);
        files.forEach((name, i) => {
            const cliBytes = readFileSync(join(outDir, name));
            assert.ok(uiMasks[i].equals(cliBytes), `frame ${i + 1}: UI result must be bit-identical to the CLI output`);
        });
        // --- re-annotation loop ----------------------------------------------
        const before = uiMasks[N - 1];
        const newMask = new Uint8Array(W * H);
        for (let y = 5; y < 12; y++) {
            for (let x = 40; x < 50; x++)
                newMask[y * W + x] = 1;
        }
        const newPng = encodeMaskPng(newMask, W, H);
        await client.uploadAnnotation(info.session_id, 4, newPng);
        await client.startPropagation(info.session_id);
        await client.waitForPropagation(info.session_id, undefined, 200);
        // the new annotation is preserved exactly: its stored bytes are intact
        const echoedNew = Buffer.from(await client.fetchAnnotation(info.session_id, 4));
        assert.ok(echoedNew.equals(newPng));
        // and the CLI given both annotations produces the identical mask set
        const ann4 = join(root, "ann4.png");
        writeFileSync(ann4, newPng);
        const outDir2 = join(root, "cli-out2");
        execFileSync("python3", ["-m", "videocutout.cli", "propagate",
            "--seq", seqDir, "--ann", `1=${annPath}`, "--ann", `4=${ann4}`,
            "--out", outDir2], { timeout: 120_000 });
        const after = Buffer.from(await client.fetchResultMask(info.session_id, 5));
        const cliAfter = readFileSync(join(outDir2, "00004.png"));
        assert.ok(after.equals(cliAfter));
        assert.ok(!after.equals(before), "downstream mask must change after re-annotation");
    }
    finally {
        proc.kill();
    }
});
