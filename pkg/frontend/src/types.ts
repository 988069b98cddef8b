/** Document shapes returned by the qualbn HTTP API. */

export interface NodeDoc {
  id: string;
  display_name: string;
  states: string[];
  parents: string[];
}

export interface ModelDoc {
  name: string;
  description: string;
  provenance: string;
  nodes: NodeDoc[];
  arcs: [string, string][];
  has_suite: boolean;
  assertions: string[];
}

export interface MarginalDoc {
  node: string;
  states: string[];
  posterior: number[];
  prior: number[];
  delta: number[];
  observed: boolean;
}

export interface QueryDoc {
  evidence: Record<string, string>;
  marginals: MarginalDoc[];
}

export interface AssertionDoc {
  index: number;
  kind: string;
  label: string;
  verdict: "pass" | "fail" | "error";
  detail: string;
  values: Record<string, unknown>;
  epsilon: number | null;
}

export interface CheckDoc {
  model: { name: string; hash: string };
  suite: { name: string; hash: string };
  summary: { pass: number; fail: number; error: number };
  assertions: AssertionDoc[];
}

export type Evidence = Record<string, string>;
