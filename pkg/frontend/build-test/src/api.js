/** Typed client for the cutout service API (/api/v1). */
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
export class CutoutClient {
    baseUrl;
    fetchImpl;
    constructor(baseUrl = "", fetchImpl = (url, init) => fetch(url, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async request(method, path, body, contentType) {
        const headers = {};
        if (contentType)
            headers["Content-Type"] = contentType;
        const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
            method,
            headers,
            body,
        });
        if (!resp.ok) {
            let detail = `${resp.status}`;
            try {
                const data = await resp.json();
                if (data && data.error)
                    detail = data.error;
            }
            catch {
                /* non-JSON error body */
            }
            throw new ApiError(resp.status, detail);
        }
        return resp;
    }
    async json(method, path, payload) {
        const body = payload === undefined ? undefined : JSON.stringify(payload);
        const resp = await this.request(method, path, body, payload === undefined ? undefined : "application/json");
        return (await resp.json());
    }
    createSession(sequence, k) {
        return this.json("POST", "/sessions", { sequence, k });
    }
    getSession(id) {
        return this.json("GET", `/sessions/${id}`);
    }
    async recommendations(id) {
        const data = await this.json("GET", `/sessions/${id}/recommendations`);
        return data.frames;
    }
    frameUrl(id, frame) {
        return `${this.baseUrl}/api/v1/sessions/${id}/frames/${frame}`;
    }
    resultMaskUrl(id, frame) {
        return `${this.baseUrl}/api/v1/sessions/${id}/results/${frame}/mask`;
    }
    async uploadAnnotation(id, frame, png) {
        await this.request("PUT", `/sessions/${id}/annotations/${frame}`, png, "image/png");
    }
    async fetchAnnotation(id, frame) {
        const resp = await this.request("GET", `/sessions/${id}/annotations/${frame}`);
        return resp.arrayBuffer();
    }
    async fetchResultMask(id, frame) {
        const resp = await this.request("GET", `/sessions/${id}/results/${frame}/mask`);
        return resp.arrayBuffer();
    }
    async startPropagation(id, forwardOnly = false) {
        const data = await this.json("POST", `/sessions/${id}/propagate`, { forward_only: forwardOnly });
        return data.job;
    }
    status(id) {
        return this.json("GET", `/sessions/${id}/status`);
    }
    metrics(id) {
        return this.json("GET", `/sessions/${id}/metrics`);
    }
    /** Poll the session status until propagation finishes or fails. */
    async waitForPropagation(id, onProgress, intervalMs = 500, timeoutMs = 600_000) {
        const deadline = Date.now() + timeoutMs;
        for (;;) {
            const status = await this.status(id);
            if (onProgress)
                onProgress(status);
            if (status.state === "done")
                return status;
            if (status.state === "error") {
                throw new ApiError(500, status.error ?? "propagation failed");
            }
            if (Date.now() > deadline)
                throw new ApiError(408, "propagation timed out");
            await new Promise((r) => setTimeout(r, intervalMs));
        }
    }
}
