import { describe, expect, it } from "vitest";

import { ARROW_EPS, arrow, percentWidth, prob3, signedDelta } from "../src/format.js";

describe("prob3", () => {
  it("renders three decimals", () => {
    expect(prob3(0.22628435423806179)).toBe("0.226");
    expect(prob3(0)).toBe("0.000");
    expect(prob3(1)).toBe("1.000");
  });
});

describe("arrow", () => {
  it("points up for increases beyond the threshold", () => {
    expect(arrow(0.2163)).toBe("↑");
  });
  it("points down for decreases", () => {
    expect(arrow(-0.01)).toBe("↓");
  });
  it("is flat at or inside the threshold", () => {
    expect(arrow(0)).toBe("·");
    expect(arrow(ARROW_EPS)).toBe("·");
    expect(arrow(-ARROW_EPS)).toBe("·");
  });
  it("honors a custom epsilon", () => {
    expect(arrow(0.01, 0.1)).toBe("·");
    expect(arrow(0.2, 0.1)).toBe("↑");
  });
});

describe("signedDelta", () => {
  it("renders explicit signs", () => {
    expect(signedDelta(0.2163)).toBe("+0.216");
    expect(signedDelta(-0.0009)).toBe("-0.001");
    expect(signedDelta(0)).toBe("0.000");
  });
});

describe("percentWidth", () => {
  it("maps probabilities to CSS widths and clamps", () => {
    expect(percentWidth(0.5)).toBe("50.0%");
    expect(percentWidth(-0.2)).toBe("0.0%");
    expect(percentWidth(1.7)).toBe("100.0%");
  });
});
