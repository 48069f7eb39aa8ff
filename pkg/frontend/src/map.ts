// SVG rendering of a session snapshot: graticule base, protection-zone
// polygons, route polyline, obstacle and destination markers.

import { fitViewport, graticule, project, type Viewport } from "./projection";
import type { Snapshot, SnapshotFeature } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends string>(name: K, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function ringPath(vp: Viewport, ring: [number, number][]): string {
  return (
    ring
      .map(([lon, lat], i) => {
        const [x, y] = project(vp, lon, lat);
        return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ") + " Z"
  );
}

function addPolygons(svg: SVGElement, vp: Viewport, feature: SnapshotFeature): void {
  const band = feature.properties.band as string;
  const cls = band === "primary" ? "zone-primary" : "zone-secondary";
  const geometry = feature.geometry;
  const polygons: [number, number][][][] =
    geometry.type === "Polygon"
      ? [geometry.coordinates as [number, number][][]]
      : (geometry.coordinates as [number, number][][][]);
  for (const polygon of polygons) {
    const d = polygon.map((ring) => ringPath(vp, ring)).join(" ");
    const path = el("path", { d, class: cls, "data-band": band });
    svg.appendChild(path);
  }
}

function addMarker(
  svg: SVGElement,
  vp: Viewport,
  feature: SnapshotFeature,
): void {
  const [lon, lat] = feature.geometry.coordinates as [number, number];
  const [x, y] = project(vp, lon, lat);
  const kind = feature.properties.kind as string;
  if (kind === "obstacle") {
    const notable = feature.properties.notable === true;
    const marker = el("path", {
      d: `M${x},${y - 7} L${x - 6},${y + 5} L${x + 6},${y + 5} Z`,
      class: notable ? "obstacle notable" : "obstacle",
      "data-name": String(feature.properties.name),
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${feature.properties.name}: ${feature.properties.elev_m} m`;
    marker.appendChild(title);
    svg.appendChild(marker);
  } else if (kind === "destination") {
    svg.appendChild(
      el("circle", { cx: x, cy: y, r: 6, class: "destination", "data-name": String(feature.properties.name) }),
    );
    const label = el("text", { x: x + 9, y: y + 4, class: "marker-label" });
    label.textContent = String(feature.properties.name);
    svg.appendChild(label);
  }
}

function addRoute(svg: SVGElement, vp: Viewport, feature: SnapshotFeature): void {
  const coords = feature.geometry.coordinates as [number, number][];
  const points = coords
    .map(([lon, lat]) => project(vp, lon, lat).map((v) => v.toFixed(1)).join(","))
    .join(" ");
  svg.appendChild(el("polyline", { points, class: "route" }));
  coords.slice(1).forEach(([lon, lat], i) => {
    const [x, y] = project(vp, lon, lat);
    svg.appendChild(
      el("circle", { cx: x, cy: y, r: 4, class: "waypoint", "data-index": i + 1 }),
    );
    const label = el("text", { x: x + 6, y: y - 6, class: "marker-label" });
    label.textContent = String(i + 1);
    svg.appendChild(label);
  });
}

export function renderMap(container: HTMLElement, snapshot: Snapshot): void {
  container.textContent = "";
  const width = 640;
  const height = 480;
  const vp = fitViewport(snapshot, width, height);
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width,
    height,
    class: "map-svg",
    role: "img",
  });

  for (const line of graticule(vp)) {
    const [[x1, y1], [x2, y2]] = [line.points[0]!, line.points[1]!];
    svg.appendChild(el("line", { x1, y1, x2, y2, class: "graticule" }));
  }

  const byKind = (kind: string) =>
    snapshot.features.filter((f) => f.properties.kind === kind);
  for (const feature of snapshot.features.filter((f) => f.properties.band === "secondary")) {
    addPolygons(svg, vp, feature);
  }
  for (const feature of snapshot.features.filter((f) => f.properties.band === "primary")) {
    addPolygons(svg, vp, feature);
  }
  for (const feature of byKind("route")) addRoute(svg, vp, feature);
  for (const feature of byKind("obstacle")) addMarker(svg, vp, feature);
  for (const feature of byKind("destination")) addMarker(svg, vp, feature);

  container.appendChild(svg);
}
