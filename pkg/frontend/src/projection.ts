// Local equirectangular projection for the map pane. Good enough at the
// 100-200 km scale of a departure: latitude scales linearly, longitude by
// cos(center latitude). No external tile service; the base layer is a
// graticule drawn over the data's bounding box.

import type { Snapshot } from "./types";

export interface Viewport {
  width: number;
  height: number;
  minLon: number;
  maxLon: number;
  minLat: number;
  maxLat: number;
  cosLat: number;
  scale: number; // svg units per degree of latitude
}

function collectPositions(snapshot: Snapshot): [number, number][] {
  const out: [number, number][] = [];
  const walk = (coords: unknown): void => {
    if (!Array.isArray(coords)) return;
    if (coords.length >= 2 && typeof coords[0] === "number" && typeof coords[1] === "number") {
      out.push([coords[0] as number, coords[1] as number]);
      return;
    }
    for (const child of coords) walk(child);
  };
  for (const feature of snapshot.features) walk(feature.geometry.coordinates);
  return out;
}

export function fitViewport(
  snapshot: Snapshot,
  width: number,
  height: number,
  paddingFraction = 0.08,
): Viewport {
  const positions = collectPositions(snapshot);
  if (positions.length === 0) {
    positions.push([0, 0], [1, 1]);
  }
  let minLon = Infinity,
    maxLon = -Infinity,
    minLat = Infinity,
    maxLat = -Infinity;
  for (const [lon, lat] of positions) {
    minLon = Math.min(minLon, lon);
    maxLon = Math.max(maxLon, lon);
    minLat = Math.min(minLat, lat);
    maxLat = Math.max(maxLat, lat);
  }
  const padLon = Math.max((maxLon - minLon) * paddingFraction, 0.02);
  const padLat = Math.max((maxLat - minLat) * paddingFraction, 0.02);
  minLon -= padLon;
  maxLon += padLon;
  minLat -= padLat;
  maxLat += padLat;
  const cosLat = Math.cos((((minLat + maxLat) / 2) * Math.PI) / 180);
  const spanX = (maxLon - minLon) * cosLat;
  const spanY = maxLat - minLat;
  const scale = Math.min(width / spanX, height / spanY);
  return { width, height, minLon, maxLon, minLat, maxLat, cosLat, scale };
}

export function project(vp: Viewport, lon: number, lat: number): [number, number] {
  const x = (lon - vp.minLon) * vp.cosLat * vp.scale;
  const y = vp.height - (lat - vp.minLat) * vp.scale;
  return [x, y];
}

export function unproject(vp: Viewport, x: number, y: number): [number, number] {
  const lon = x / (vp.cosLat * vp.scale) + vp.minLon;
  const lat = (vp.height - y) / vp.scale + vp.minLat;
  return [lon, lat];
}

/** Choose a graticule step that yields a handful of lines across the span. */
export function graticuleStep(span: number): number {
  const candidates = [0.05, 0.1, 0.25, 0.5, 1, 2, 5];
  for (const step of candidates) {
    if (span / step <= 12) return step;
  }
  return 10;
}

export interface GraticuleLine {
  points: [number, number][];
  label: string;
}

export function graticule(vp: Viewport): GraticuleLine[] {
  const lines: GraticuleLine[] = [];
  const lonStep = graticuleStep(vp.maxLon - vp.minLon);
  const latStep = graticuleStep(vp.maxLat - vp.minLat);
  for (
    let lon = Math.ceil(vp.minLon / lonStep) * lonStep;
    lon <= vp.maxLon;
    lon += lonStep
  ) {
    lines.push({
      points: [project(vp, lon, vp.minLat), project(vp, lon, vp.maxLat)],
      label: `${lon.toFixed(2)}°E`,
    });
  }
  for (
    let lat = Math.ceil(vp.minLat / latStep) * latStep;
    lat <= vp.maxLat;
    lat += latStep
  ) {
    lines.push({
      points: [project(vp, vp.minLon, lat), project(vp, vp.maxLon, lat)],
      label: `${lat.toFixed(2)}°N`,
    });
  }
  return lines;
}
