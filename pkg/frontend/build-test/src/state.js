/** Pure view-state transitions; the DOM layer applies them. */
export function initialState(nFrames) {
    return {
        frame: 1,
        nFrames,
        overlayOpacity: 0.5,
        playing: false,
        dirty: [],
        reannotationQueue: [],
    };
}
export function setFrame(state, frame) {
    const clamped = Math.min(Math.max(Math.round(frame), 1), state.nFrames);
    return { ...state, frame: clamped };
}
export function stepFrame(state, delta) {
    return setFrame(state, state.frame + delta);
}
export function advancePlayback(state) {
    if (!state.playing)
        return state;
    if (state.frame >= state.nFrames)
        return { ...state, playing: false };
    return { ...state, frame: state.frame + 1 };
}
export function setPlaying(state, playing) {
    return { ...state, playing };
}
export function setOpacity(state, opacity) {
    return { ...state, overlayOpacity: Math.min(Math.max(opacity, 0), 1) };
}
export function markDirty(state, frame) {
    if (state.dirty.includes(frame))
        return state;
    return { ...state, dirty: [...state.dirty, frame].sort((a, b) => a - b) };
}
export function clearDirty(state) {
    return { ...state, dirty: [] };
}
export function queueReannotation(state, frame) {
    if (state.reannotationQueue.includes(frame))
        return state;
    return {
        ...state,
        reannotationQueue: [...state.reannotationQueue, frame].sort((a, b) => a - b),
    };
}
export function dequeueReannotation(state, frame) {
    return {
        ...state,
        reannotationQueue: state.reannotationQueue.filter((f) => f !== frame),
    };
}
