/** DOM wiring: canvas painting, timeline, propagation control, review loop. */

import { CutoutClient } from "./api.js";
import { clampPoint, maskToPngBlob, rasterizeOps } from "./mask.js";
import type { PaintOp } from "./mask.js";
import * as st from "./state.js";
import type { BrushStroke, Point, SessionInfo, ViewState } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class CutoutApp {
  private client = new CutoutClient();
  private session: SessionInfo | null = null;
  private view: ViewState = st.initialState(1);
  private ops: PaintOp[] = [];
  private activeStroke: BrushStroke | null = null;
  private lassoPoints: Point[] = [];
  private recommendations: number[] = [];
  private resultVersion = 0;
  private playTimer: number | null = null;
  private perFrameJ: Record<string, { j: number; f: number }> = {};

  private frameCanvas = el<HTMLCanvasElement>("frame-canvas");
  private paintCanvas = el<HTMLCanvasElement>("paint-canvas");
  private overlayImg = new Image();
  private frameImg = new Image();

  start(): void {
    el<HTMLButtonElement>("open-btn").onclick = () => void this.openSession();
    el<HTMLButtonElement>("submit-btn").onclick = () => void this.submitAnnotation();
    el<HTMLButtonElement>("clear-btn").onclick = () => this.clearPaint();
    el<HTMLButtonElement>("propagate-btn").onclick = () => void this.propagate();
    el<HTMLButtonElement>("mark-btn").onclick = () => this.markForReannotation();
    el<HTMLButtonElement>("play-btn").onclick = () => this.togglePlayback();
    el<HTMLInputElement>("timeline").oninput = (e) =>
      this.setFrame(Number((e.target as HTMLInputElement).value));
    el<HTMLInputElement>("opacity").oninput = (e) => {
      this.view = st.setOpacity(this.view, Number((e.target as HTMLInputElement).value) / 100);
      this.redraw();
    };
    this.bindPainting();
    window.addEventListener("keydown", (e) => {
      if (e.key === "ArrowRight") this.setFrame(this.view.frame + 1);
      if (e.key === "ArrowLeft") this.setFrame(this.view.frame - 1);
    });
  }

  private setStatus(text: string, isError = false): void {
    const node = el<HTMLDivElement>("status-line");
    node.textContent = text;
    node.classList.toggle("error", isError);
  }

  private async openSession(): Promise<void> {
    const path = el<HTMLInputElement>("sequence-path").value.trim();
    const k = Number(el<HTMLInputElement>("budget").value) || 1;
    if (!path) {
      this.setStatus("enter a sequence directory first", true);
      return;
    }
    try {
      this.session = await this.client.createSession(path, k);
      this.view = st.initialState(this.session.frames);
      this.ops = [];
      this.perFrameJ = {};
      const timeline = el<HTMLInputElement>("timeline");
      timeline.min = "1";
      timeline.max = String(this.session.frames);
      timeline.value = "1";
      this.frameCanvas.width = this.paintCanvas.width = this.session.width;
      this.frameCanvas.height = this.paintCanvas.height = this.session.height;
      this.setStatus(`session ${this.session.session_id}: ${this.session.frames} frames`);
      this.recommendations = await this.client.recommendations(this.session.session_id);
      this.renderRecommendations();
      await this.loadFrame();
    } catch (err) {
      this.setStatus(`cannot open session: ${err}`, true);
    }
  }

  private renderRecommendations(): void {
    const box = el<HTMLDivElement>("recommendations");
    box.innerHTML = "";
    for (const f of this.recommendations) {
      const chip = document.createElement("button");
      chip.className = "chip";
      chip.textContent = `frame ${f}`;
      chip.onclick = () => this.setFrame(f);
      box.appendChild(chip);
    }
  }

  private renderQueue(): void {
    const box = el<HTMLDivElement>("queue");
    box.innerHTML = "";
    for (const f of this.view.reannotationQueue) {
      const chip = document.createElement("button");
      chip.className = "chip queued";
      chip.textContent = `re-annotate ${f}`;
      chip.onclick = () => this.setFrame(f);
      box.appendChild(chip);
    }
  }

  private setFrame(frame: number): void {
    this.view = st.setFrame(this.view, frame);
    el<HTMLInputElement>("timeline").value = String(this.view.frame);
    this.clearPaint();
    void this.loadFrame();
  }

  private async loadFrame(): Promise<void> {
    if (!this.session) return;
    const sid = this.session.session_id;
    const frame = this.view.frame;
    el<HTMLSpanElement>("frame-label").textContent =
      `frame ${frame} / ${this.view.nFrames}`;
    const score = this.perFrameJ[String(frame)];
    el<HTMLSpanElement>("score-label").textContent =
      score ? `J ${score.j.toFixed(3)}  F ${score.f.toFixed(3)}` : "";
    await new Promise<void>((resolve) => {
      this.frameImg.onload = () => resolve();
      this.frameImg.onerror = () => resolve();
      this.frameImg.src = this.client.frameUrl(sid, frame);
    });
    this.overlayImg = new Image();
    await new Promise<void>((resolve) => {
      this.overlayImg.onload = () => resolve();
      this.overlayImg.onerror = () => resolve();
      this.overlayImg.src =
        `${this.client.resultMaskUrl(sid, frame)}?v=${this.resultVersion}`;
    });
    this.redraw();
  }

  private redraw(): void {
    const ctx = this.frameCanvas.getContext("2d");
    if (!ctx || !this.session) return;
    ctx.clearRect(0, 0, this.frameCanvas.width, this.frameCanvas.height);
    if (this.frameImg.complete && this.frameImg.naturalWidth) {
      ctx.drawImage(this.frameImg, 0, 0);
    }
    if (this.overlayImg.complete && this.overlayImg.naturalWidth
        && this.view.overlayOpacity > 0) {
      ctx.globalAlpha = this.view.overlayOpacity;
      ctx.drawImage(this.overlayImg, 0, 0);
      ctx.globalAlpha = 1;
    }
    this.redrawPaint();
  }

  private redrawPaint(): void {
    const ctx = this.paintCanvas.getContext("2d");
    if (!ctx || !this.session) return;
    const { width, height } = this.paintCanvas;
    ctx.clearRect(0, 0, width, height);
    if (this.ops.length) {
      const mask = rasterizeOps(this.ops, width, height);
      const image = ctx.createImageData(width, height);
      for (let i = 0; i < mask.length; i++) {
        if (mask[i]) {
          image.data[4 * i] = 255;
          image.data[4 * i + 1] = 64;
          image.data[4 * i + 2] = 64;
          image.data[4 * i + 3] = 140;
        }
      }
      ctx.putImageData(image, 0, 0);
    }
    if (this.lassoPoints.length > 1) {
      ctx.strokeStyle = "#ffd34d";
      ctx.beginPath();
      ctx.moveTo(this.lassoPoints[0].x, this.lassoPoints[0].y);
      for (const p of this.lassoPoints.slice(1)) ctx.lineTo(p.x, p.y);
      ctx.stroke();
    }
  }

  private toolMode(): "brush" | "lasso" {
    return el<HTMLSelectElement>("tool").value as "brush" | "lasso";
  }

  private polarity(): "foreground" | "background" {
    return el<HTMLSelectElement>("polarity").value as "foreground" | "background";
  }

  private canvasPoint(e: MouseEvent): Point {
    const rect = this.paintCanvas.getBoundingClientRect();
    const p = {
      x: ((e.clientX - rect.left) / rect.width) * this.paintCanvas.width,
      y: ((e.clientY - rect.top) / rect.height) * this.paintCanvas.height,
    };
    return clampPoint(p, this.paintCanvas.width, this.paintCanvas.height);
  }

  private bindPainting(): void {
    this.paintCanvas.onmousedown = (e) => {
      if (!this.session) return;
      const p = this.canvasPoint(e);
      if (this.toolMode() === "lasso") {
        this.lassoPoints.push(p);
        if (e.detail === 2 && this.lassoPoints.length >= 3) {
          this.ops.push({ kind: "polygon", points: this.lassoPoints,
                          polarity: this.polarity() });
          this.lassoPoints = [];
          this.view = st.markDirty(this.view, this.view.frame);
        }
        this.redrawPaint();
        return;
      }
      this.activeStroke = {
        points: [p],
        radius: Number(el<HTMLInputElement>("brush-size").value) || 8,
        polarity: this.polarity(),
      };
      this.ops.push({ kind: "stroke", stroke: this.activeStroke });
    };
    this.paintCanvas.onmousemove = (e) => {
      if (!this.activeStroke) return;
      this.activeStroke.points.push(this.canvasPoint(e));
      this.redrawPaint();
    };
    const finish = () => {
      if (this.activeStroke) {
        this.activeStroke = null;
        this.view = st.markDirty(this.view, this.view.frame);
        this.redrawPaint();
      }
    };
    this.paintCanvas.onmouseup = finish;
    this.paintCanvas.onmouseleave = finish;
  }

  private clearPaint(): void {
    this.ops = [];
    this.lassoPoints = [];
    this.activeStroke = null;
    this.redrawPaint();
  }

  private async submitAnnotation(): Promise<void> {
    if (!this.session) return;
    if (!this.ops.length) {
      this.setStatus("paint at least one stroke before submitting", true);
      return;
    }
    const { width, height, session_id } = this.session;
    const mask = rasterizeOps(this.ops, width, height);
    try {
      const blob = await maskToPngBlob(mask, width, height);
      await this.client.uploadAnnotation(session_id, this.view.frame, blob);
      this.view = st.dequeueReannotation(this.view, this.view.frame);
      this.renderQueue();
      this.setStatus(`annotation for frame ${this.view.frame} accepted`);
      // echo the stored annotation back as the confirmation overlay
      this.overlayImg = new Image();
      this.overlayImg.onload = () => this.redraw();
      this.overlayImg.src =
        `/api/v1/sessions/${session_id}/annotations/${this.view.frame}`;
      this.clearPaint();
    } catch (err) {
      this.setStatus(`upload failed: ${err} (retry submit)`, true);
    }
  }

  private async propagate(): Promise<void> {
    if (!this.session) return;
    const sid = this.session.session_id;
    const bar = el<HTMLProgressElement>("progress");
    try {
      await this.client.startPropagation(sid,
        el<HTMLInputElement>("forward-only").checked);
      this.setStatus("propagating...");
      await this.client.waitForPropagation(sid, (status) => {
        bar.value = status.progress * 100;
      });
      bar.value = 100;
      this.resultVersion += 1;
      this.view = st.clearDirty(this.view);
      this.setStatus("propagation finished");
      if (this.session.has_ground_truth) {
        const metrics = await this.client.metrics(sid);
        this.perFrameJ = metrics.per_frame;
      }
      await this.loadFrame();
    } catch (err) {
      this.setStatus(`propagation failed: ${err}`, true);
    }
  }

  private markForReannotation(): void {
    this.view = st.queueReannotation(this.view, this.view.frame);
    this.renderQueue();
    this.setStatus(`frame ${this.view.frame} queued for re-annotation`);
  }

  private togglePlayback(): void {
    this.view = st.setPlaying(this.view, !this.view.playing);
    el<HTMLButtonElement>("play-btn").textContent = this.view.playing ? "pause" : "play";
    if (this.playTimer !== null) {
      window.clearInterval(this.playTimer);
      this.playTimer = null;
    }
    if (this.view.playing) {
      this.playTimer = window.setInterval(() => {
        this.view = st.advancePlayback(this.view);
        el<HTMLInputElement>("timeline").value = String(this.view.frame);
        if (!this.view.playing && this.playTimer !== null) {
          window.clearInterval(this.playTimer);
          this.playTimer = null;
          el<HTMLButtonElement>("play-btn").textContent = "play";
        }
        void this.loadFrame();
      }, 150);
    }
  }
}
