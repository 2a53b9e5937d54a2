/** Shared types for the cutout UI and its API client. */

export interface SessionInfo {
  session_id: string;
  state: string;
  frames: number;
  width: number;
  height: number;
  k: number;
  annotated: number[];
  has_ground_truth: boolean;
}

export interface StatusInfo {
  state: string;
  progress: number;
  frames: Record<string, number>;
  error: string | null;
}

export interface MetricsInfo {
  per_frame: Record<string, { j: number; f: number }>;
  mean_j: number | null;
  mean_f: number | null;
}

export interface Point {
  x: number;
  y: number;
}

/** One brush stroke: a polyline stamped with a disk of the given radius.
 *  Foreground strokes paint 1, background strokes erase to 0; later
 *  strokes win. */
export interface BrushStroke {
  points: Point[];
  radius: number;
  polarity: "foreground" | "background";
}

export interface ViewState {
  frame: number;
  nFrames: number;
  overlayOpacity: number;
  playing: boolean;
  /** Frames whose annotation changed since the last propagation. */
  dirty: number[];
  /** Frames the user marked for re-annotation during review. */
  reannotationQueue: number[];
}
