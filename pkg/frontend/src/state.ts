/** Pure view-state transitions; the DOM layer applies them. */

import type { ViewState } from "./types.js";

export function initialState(nFrames: number): ViewState {
  return {
    frame: 1,
    nFrames,
    overlayOpacity: 0.5,
    playing: false,
    dirty: [],
    reannotationQueue: [],
  };
}

export function setFrame(state: ViewState, frame: number): ViewState {
  const clamped = Math.min(Math.max(Math.round(frame), 1), state.nFrames);
  return { ...state, frame: clamped };
}

export function stepFrame(state: ViewState, delta: number): ViewState {
  return setFrame(state, state.frame + delta);
}

export function advancePlayback(state: ViewState): ViewState {
  if (!state.playing) return state;
  if (state.frame >= state.nFrames) return { ...state, playing: false };
  return { ...state, frame: state.frame + 1 };
}

export function setPlaying(state: ViewState, playing: boolean): ViewState {
  return { ...state, playing };
}

export function setOpacity(state: ViewState, opacity: number): ViewState {
  return { ...state, overlayOpacity: Math.min(Math.max(opacity, 0), 1) };
}

export function markDirty(state: ViewState, frame: number): ViewState {
  if (state.dirty.includes(frame)) return state;
  return { ...state, dirty: [...state.dirty, frame].sort((a, b) => a - b) };
}

export function clearDirty(state: ViewState): ViewState {
  return { ...state, dirty: [] };
}

export function queueReannotation(state: ViewState, frame: number): ViewState {
  if (state.reannotationQueue.includes(frame)) return state;
  return {
    ...state,
    reannotationQueue: [...state.reannotationQueue, frame].sort((a, b) => a - b),
  };
}

export function dequeueReannotation(state: ViewState, frame: number): ViewState {
  return {
    ...state,
    reannotationQueue: state.reannotationQueue.filter((f) => f !== frame),
  };
}
