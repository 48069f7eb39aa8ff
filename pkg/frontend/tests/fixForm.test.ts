import { describe, expect, it } from "vitest";

import { buildFixForm, validateFix, type FixFormInput } from "../src/fixForm";

function input(overrides: Partial<FixFormInput> = {}): FixFormInput {
  return {
    action: "fix",
    fix_waypoint: "1",
    bearing: "21.9",
    distance: "3551.4",
    last_waypoint_lat: "",
    last_waypoint_lon: "",
    ...overrides,
  };
}

describe("validateFix", () => {
  it("accepts no_fix with no other fields", () => {
    const result = validateFix(input({ action: "no_fix" }), 0);
    expect(result.ok).toBe(true);
    expect(result.payload).toEqual({ action: "no_fix" });
  });

  it("accepts a complete fix", () => {
    const result = validateFix(input(), 3);
    expect(result.ok).toBe(true);
    expect(result.payload).toEqual({
      action: "fix",
      fix_waypoint: 1,
      bearing: 21.9,
      distance: 3551.4,
    });
  });

  it("requires the mandatory fields", () => {
    const result = validateFix(input({ fix_waypoint: "", bearing: "", distance: "" }), 3);
    expect(result.ok).toBe(false);
    expect(result.errors.length).toBe(3);
  });

  it("bounds the waypoint index by the current count", () => {
    expect(validateFix(input({ fix_waypoint: "4" }), 3).ok).toBe(false);
    expect(validateFix(input({ fix_waypoint: "0" }), 3).ok).toBe(false);
    expect(validateFix(input({ fix_waypoint: "3" }), 3).ok).toBe(true);
  });

  it("rejects out-of-range bearing and distance", () => {
    expect(validateFix(input({ bearing: "360" }), 3).ok).toBe(false);
    expect(validateFix(input({ bearing: "-1" }), 3).ok).toBe(false);
    expect(validateFix(input({ distance: "0" }), 3).ok).toBe(false);
    expect(validateFix(input({ distance: "abc" }), 3).ok).toBe(false);
  });

  it("anchor coordinates come as a pair", () => {
    expect(validateFix(input({ last_waypoint_lat: "30.6" }), 3).ok).toBe(false);
    const both = validateFix(
      input({ last_waypoint_lat: "30.6", last_waypoint_lon: "104.0" }),
      3,
    );
    expect(both.ok).toBe(true);
    expect(both.payload).toMatchObject({ last_waypoint_lat: 30.6, last_waypoint_lon: 104.0 });
  });

  it("rejects unknown actions", () => {
    expect(validateFix(input({ action: "maybe" }), 3).ok).toBe(false);
  });
});

describe("buildFixForm", () => {
  it("submits a valid payload and reports errors inline", () => {
    const submitted: unknown[] = [];
    const form = buildFixForm((payload) => submitted.push(payload), () => 2);
    document.body.appendChild(form);

    (form.querySelector('[name="action"]') as HTMLSelectElement).value = "fix";
    (form.querySelector('[name="fix_waypoint"]') as HTMLInputElement).value = "5";
    (form.querySelector('[name="bearing"]') as HTMLInputElement).value = "21.9";
    (form.querySelector('[name="distance"]') as HTMLInputElement).value = "3551.4";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    expect(submitted.length).toBe(0);
    expect(form.querySelector(".fix-errors")!.textContent).toContain("between 1 and 2");

    (form.querySelector('[name="fix_waypoint"]') as HTMLInputElement).value = "1";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    expect(submitted).toEqual([
      { action: "fix", fix_waypoint: 1, bearing: 21.9, distance: 3551.4 },
    ]);
    expect(form.querySelector(".fix-errors")!.textContent).toBe("");
  });
});
