/** DOM wiring: canvas painting, timeline, propagation control, review loop. */
import { CutoutClient } from "./api.js";
import { clampPoint, maskToPngBlob, rasterizeOps } from "./mask.js";
import * as st from "./state.js";
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
export class CutoutApp {
    client = new CutoutClient();
    session = null;
    view = st.initialState(1);
    ops = [];
    activeStroke = null;
    lassoPoints = [];
    recommendations = [];
    resultVersion = 0;
    playTimer = null;
    perFrameJ = {};
    frameCanvas = el("frame-canvas");
    paintCanvas = el("paint-canvas");
    overlayImg = new Image();
    frameImg = new Image();
    start() {
        el("open-btn").onclick = () => void this.openSession();
        el("submit-btn").onclick = () => void this.submitAnnotation();
        el("clear-btn").onclick = () => this.clearPaint();
        el("propagate-btn").onclick = () => void this.propagate();
        el("mark-btn").onclick = () => this.markForReannotation();
        el("play-btn").onclick = () => this.togglePlayback();
        el("timeline").oninput = (e) => this.setFrame(Number(e.target.value));
        el("opacity").oninput = (e) => {
            this.view = st.setOpacity(this.view, Number(e.target.value) / 100);
            this.redraw();
        };
        this.bindPainting();
        window.addEventListener("keydown", (e) => {
            if (e.key === "ArrowRight")
                this.setFrame(this.view.frame + 1);
            if (e.key === "ArrowLeft")
                this.setFrame(this.view.frame - 1);
        });
    }
    setStatus(text, isError = false) {
        const node = el("status-line");
        node.textContent = text;
        node.classList.toggle("error", isError);
    }
    async openSession() {
        const path = el("sequence-path").value.trim();
        const k = Number(el("budget").value) || 1;
        if (!path) {
            this.setStatus("enter a sequence directory first", true);
            return;
        }
        try {
            this.session = await this.client.createSession(path, k);
            this.view = st.initialState(this.session.frames);
            this.ops = [];
            this.perFrameJ = {};
            const timeline = el("timeline");
            timeline.min = "1";
            timeline.max = String(this.session.frames);
            timeline.value = "1";
            this.frameCanvas.width = this.paintCanvas.width = this.session.width;
            this.frameCanvas.height = this.paintCanvas.height = this.session.height;
            this.setStatus(`session ${this.session.session_id}: ${this.session.frames} frames`);
            this.recommendations = await this.client.recommendations(this.session.session_id);
            this.renderRecommendations();
            await this.loadFrame();
        }
        catch (err) {
            this.setStatus(`cannot open session: ${err}`, true);
        }
    }
    renderRecommendations() {
        const box = el("recommendations");
        box.innerHTML = "";
        for (const f of this.recommendations) {
            const chip = document.createElement("button");
            chip.className = "chip";
            chip.textContent = `frame ${f}`;
            chip.onclick = () => this.setFrame(f);
            box.appendChild(chip);
        }
    }
    renderQueue() {
        const box = el("queue");
        box.innerHTML = "";
        for (const f of this.view.reannotationQueue) {
            const chip = document.createElement("button");
            chip.className = "chip queued";
            chip.textContent = `re-annotate ${f}`;
            chip.onclick = () => this.setFrame(f);
            box.appendChild(chip);
        }
    }
    setFrame(frame) {
        this.view = st.setFrame(this.view, frame);
        el("timeline").value = String(this.view.frame);
        this.clearPaint();
        void this.loadFrame();
    }
    async loadFrame() {
        if (!this.session)
            return;
        const sid = this.session.session_id;
        const frame = this.view.frame;
        el("frame-label").textContent =
            `frame ${frame} / ${this.view.nFrames}`;
        const score = this.perFrameJ[String(frame)];
        el("score-label").textContent =
            score ? `J ${score.j.toFixed(3)}  F ${score.f.toFixed(3)}` : "";
        await new Promise((resolve) => {
            this.frameImg.onload = () => resolve();
            this.frameImg.onerror = () => resolve();
            this.frameImg.src = this.client.frameUrl(sid, frame);
        });
        this.overlayImg = new Image();
        await new Promise((resolve) => {
            this.overlayImg.onload = () => resolve();
            this.overlayImg.onerror = () => resolve();
            this.overlayImg.src =
                `${this.client.resultMaskUrl(sid, frame)}?v=${this.resultVersion}`;
        });
        this.redraw();
    }
    redraw() {
        const ctx = this.frameCanvas.getContext("2d");
        if (!ctx || !this.session)
            return;
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
    redrawPaint() {
        const ctx = this.paintCanvas.getContext("2d");
        if (!ctx || !this.session)
            return;
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
            for (const p of this.lassoPoints.slice(1))
                ctx.lineTo(p.x, p.y);
            ctx.stroke();
        }
    }
    toolMode() {
        return el("tool").value;
    }
    polarity() {
        return el("polarity").value;
    }
    canvasPoint(e) {
        const rect = this.paintCanvas.getBoundingClientRect();
        const p = {
            x: ((e.clientX - rect.left) / rect.width) * this.paintCanvas.width,
            y: ((e.clientY - rect.top) / rect.height) * this.paintCanvas.height,
        };
        return clampPoint(p, this.paintCanvas.width, this.paintCanvas.height);
    }
    bindPainting() {
        this.paintCanvas.onmousedown = (e) => {
            if (!this.session)
                return;
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
                radius: Number(el("brush-size").value) || 8,
                polarity: this.polarity(),
            };
            this.ops.push({ kind: "stroke", stroke: this.activeStroke });
        };
        this.paintCanvas.onmousemove = (e) => {
            if (!this.activeStroke)
                return;
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
    clearPaint() {
        this.ops = [];
        this.lassoPoints = [];
        this.activeStroke = null;
        this.redrawPaint();
    }
    async submitAnnotation() {
        if (!this.session)
            return;
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
        }
        catch (err) {
            this.setStatus(`upload failed: ${err} (retry submit)`, true);
        }
    }
    async propagate() {
        if (!this.session)
            return;
        const sid = this.session.session_id;
        const bar = el("progress");
        try {
            await this.client.startPropagation(sid, el("forward-only").checked);
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
        }
        catch (err) {
            this.setStatus(`propagation failed: ${err}`, true);
        }
    }
    markForReannotation() {
        this.view = st.queueReannotation(this.view, this.view.frame);
        this.renderQueue();
        this.setStatus(`frame ${this.view.frame} queued for re-annotation`);
    }
    togglePlayback() {
        this.view = st.setPlaying(this.view, !this.view.playing);
        el("play-btn").textContent = this.view.playing ? "pause" : "play";
        if (this.playTimer !== null) {
            window.clearInterval(this.playTimer);
            this.playTimer = null;
        }
        if (this.view.playing) {
            this.playTimer = window.setInterval(() => {
                this.view = st.advancePlayback(this.view);
                el("timeline").value = String(this.view.frame);
                if (!this.view.playing && this.playTimer !== null) {
                    window.clearInterval(this.playTimer);
                    this.playTimer = null;
                    el("play-btn").textContent = "play";
                }
                void this.loadFrame();
            }, 150);
        }
    }
}
