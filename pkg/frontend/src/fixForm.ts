// Fix-command form. The grammar is enforced client-side so malformed
// commands never reach the service: action=fix requires waypoint index,
// bearing and distance; the anchor coordinates come as a pair or not at
// all.

import type { FixPayload } from "./types";

export interface FixFormInput {
  action: string;
  fix_waypoint: string;
  bearing: string;
  distance: string;
  last_waypoint_lat: string;
  last_waypoint_lon: string;
}

export interface FixValidation {
  ok: boolean;
  errors: string[];
  payload?: FixPayload;
}

function numberOrNull(raw: string): number | null {
  const trimmed = raw.trim();
  if (!trimmed) return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : NaN;
}

export function validateFix(input: FixFormInput, waypointCount: number): FixValidation {
  if (input.action === "no_fix") {
    return { ok: true, errors: [], payload: { action: "no_fix" } };
  }
  if (input.action !== "fix") {
    return { ok: false, errors: [`unknown action '${input.action}'`] };
  }
  const errors: string[] = [];
  const index = numberOrNull(input.fix_waypoint);
  const bearing = numberOrNull(input.bearing);
  const distance = numberOrNull(input.distance);
  const lat = numberOrNull(input.last_waypoint_lat);
  const lon = numberOrNull(input.last_waypoint_lon);

  if (index === null || Number.isNaN(index) || !Number.isInteger(index)) {
    errors.push("fix_waypoint: integer index required");
  } else if (index < 1 || index > waypointCount) {
    errors.push(`fix_waypoint: must be between 1 and ${waypointCount}`);
  }
  if (bearing === null || Number.isNaN(bearing) || bearing < 0 || bearing >= 360) {
    errors.push("bearing: degrees in [0, 360) required");
  }
  if (distance === null || Number.isNaN(distance) || distance <= 0) {
    errors.push("distance: positive meters required");
  }
  if ((lat === null) !== (lon === null)) {
    errors.push("anchor: latitude and longitude come together");
  }
  if (lat !== null && (Number.isNaN(lat) || lat < -90 || lat > 90)) {
    errors.push("anchor latitude out of range");
  }
  if (lon !== null && (Number.isNaN(lon) || lon <= -180 || lon > 180)) {
    errors.push("anchor longitude out of range");
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  const payload: FixPayload = {
    action: "fix",
    fix_waypoint: index as number,
    bearing: bearing as number,
    distance: distance as number,
  };
  if (lat !== null && lon !== null) {
    payload.last_waypoint_lat = lat;
    payload.last_waypoint_lon = lon;
  }
  return { ok: true, errors: [], payload };
}

export function readFixForm(form: HTMLFormElement): FixFormInput {
  const value = (name: string): string =>
    (form.querySelector(`[name="${name}"]`) as HTMLInputElement | HTMLSelectElement | null)
      ?.value ?? "";
  return {
    action: value("action"),
    fix_waypoint: value("fix_waypoint"),
    bearing: value("bearing"),
    distance: value("distance"),
    last_waypoint_lat: value("last_waypoint_lat"),
    last_waypoint_lon: value("last_waypoint_lon"),
  };
}

export function buildFixForm(
  onSubmit: (payload: FixPayload) => void,
  waypointCount: () => number,
): HTMLFormElement {
  const form = document.createElement("form");
  form.className = "fix-form";
  form.innerHTML = `
    <label>action
      <select name="action">
        <option value="no_fix">no fix</option>
        <option value="fix">fix</option>
      </select>
    </label>
    <span class="fix-only">
      <label>waypoint # <input name="fix_waypoint" size="3" inputmode="numeric"></label>
      <label>bearing ° <input name="bearing" size="7"></label>
      <label>distance m <input name="distance" size="9"></label>
      <label>anchor lat <input name="last_waypoint_lat" size="10" placeholder="optional"></label>
      <label>anchor lon <input name="last_waypoint_lon" size="10" placeholder="optional"></label>
    </span>
    <button type="submit">Send feedback</button>
    <span class="fix-errors" role="alert"></span>
  `;
  const errorBox = form.querySelector(".fix-errors") as HTMLElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const result = validateFix(readFixForm(form), waypointCount());
    if (!result.ok) {
      errorBox.textContent = result.errors.join("; ");
      return;
    }
    errorBox.textContent = "";
    onSubmit(result.payload!);
  });
  return form;
}
