import assert from "node:assert/strict";
import { test } from "node:test";

import * as st from "../src/state.js";

test("frame index stays within 1..N", () => {
  let s = st.initialState(10);
  s = st.setFrame(s, 99);
  assert.equal(s.frame, 10);
  s = st.setFrame(s, -3);
  assert.equal(s.frame, 1);
  s = st.stepFrame(s, 5);
  assert.equal(s.frame, 6);
});

test("playback advances and stops at the last frame", () => {
  let s = st.setPlaying(st.initialState(3), true);
  s = st.advancePlayback(s);
  assert.equal(s.frame, 2);
  s = st.advancePlayback(s);
  assert.equal(s.frame, 3);
  s = st.advancePlayback(s);
  assert.equal(s.playing, false);
  assert.equal(s.frame, 3);
});

test("overlay opacity clamps to [0, 1]", () => {
  let s = st.initialState(2);
  s = st.setOpacity(s, 1.4);
  assert.equal(s.overlayOpacity, 1);
  s = st.setOpacity(s, -2);
  assert.equal(s.overlayOpacity, 0);
});

test("dirty flags record annotated frames once, sorted", () => {
  let s = st.initialState(8);
  s = st.markDirty(s, 5);
  s = st.markDirty(s, 2);
  s = st.markDirty(s, 5);
  assert.deepEqual(s.dirty, [2, 5]);
  s = st.clearDirty(s);
  assert.deepEqual(s.dirty, []);
});

test("re-annotation queue adds and removes frames", () => {
  let s = st.initialState(8);
  s = st.queueReannotation(s, 7);
  s = st.queueReannotation(s, 3);
  s = st.queueReannotation(s, 7);
  assert.deepEqual(s.reannotationQueue, [3, 7]);
  s = st.dequeueReannotation(s, 3);
  assert.deepEqual(s.reannotationQueue, [7]);
});

test("transitions never mutate the previous state", () => {
  const s0 = st.initialState(4);
  const s1 = st.markDirty(st.setFrame(s0, 2), 2);
  assert.equal(s0.frame, 1);
  assert.deepEqual(s0.dirty, []);
  assert.equal(s1.frame, 2);
});
