// Mirrors of the session service payloads.

export type LatLon = [number, number];

export interface TranscriptMessage {
  role: string;
  content: string;
  round: number;
  parsed: Record<string, unknown> | null;
}

export interface SnapshotFeature {
  type: "Feature";
  properties: Record<string, unknown>;
  geometry: {
    type: "Point" | "LineString" | "Polygon" | "MultiPolygon";
    coordinates: unknown;
  };
}

export interface Snapshot {
  type: "FeatureCollection";
  metadata: { procedure: string; round: number; status: string };
  features: SnapshotFeature[];
}

export interface SessionState {
  id: string;
  icao: string;
  runway: string;
  destination: string;
  procedure: string;
  waypoints: LatLon[];
  round: number;
  max_rounds: number;
  status: string;
  interactive: boolean;
  hallucinations: Record<string, number>;
  transcript: TranscriptMessage[];
  snapshot: Snapshot;
}

export interface StepResult extends SessionState {
  new_waypoint: LatLon | null;
  transcript_delta: TranscriptMessage[];
  error?: string;
}

export interface FixPayload {
  action: "fix" | "no_fix";
  fix_waypoint?: number;
  bearing?: number;
  distance?: number;
  last_waypoint_lat?: number;
  last_waypoint_lon?: number;
}

export interface MetricsPayload {
  fps: number | null;
  scc: number | null;
  mcr: number | null;
  fps_percent: string | null;
  scc_percent: string | null;
  mcr_percent: string | null;
  n_legs: number;
  n_procedures: number;
}

export interface FinalizeResult {
  id: string;
  status: string;
  metrics: MetricsPayload;
  txt: string;
}

export interface CreateSessionRequest {
  icao: string;
  runway: string;
  destination: string;
  backend?: string;
  interactive?: boolean;
  max_rounds?: number;
}
