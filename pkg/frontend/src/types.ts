// Payload shapes of the workbench HTTP API (mirrors the service JSON).

export type Mode = 'per-unit' | 'power-flow' | 'state-estimation';
export type Method = 'gs' | 'nr' | 'wls' | 'fdse';

export interface PlacementPayload {
  x: number;
  y: number;
  rotation: number;
}

export interface ComponentPayload {
  id: number;
  kind: string;
  placement: PlacementPayload;
  spec: Record<string, unknown>;
  properties: Record<string, string>;
  ports: [number, number][];
  bar?: [[number, number], [number, number]];
  source?: Record<string, unknown> | null;
}

export interface EndpointPayload {
  component: number;
  port?: number | null;
  point?: [number, number] | null;
}

export interface LinePayload {
  id: number;
  kind?: string;
  properties?: Record<string, string>;
  end_a: EndpointPayload;
  end_b: EndpointPayload;
  spec: { r: number; x: number; unit: string; shunt_b: number; is_connecting: boolean };
  route: number[][]; // [x1, y1, x2, y2] per segment
}

export interface Violation {
  code: string;
  component: number | null;
  message: string;
}

export interface SolveResponse {
  status: 'ok' | 'invalid' | 'failed';
  violations: Violation[];
  solution: Record<string, unknown> | null;
  overlay: Record<string, Record<string, unknown>> | null;
  error: string | null;
  trace_text: string;
}

export interface CatalogEntry {
  kind: string;
  modes: Mode[];
  ports: number;
  drawn_between_ports: boolean;
  property_schema: Record<string, string[]>;
  default_properties: Record<string, string>;
}

export interface Catalog {
  components: CatalogEntry[];
  modes: Mode[];
}

export interface ProjectSnapshot {
  project_id: string;
  mode: Mode;
  document: unknown;
  components: ComponentPayload[];
  lines: LinePayload[];
}

export interface EditDelta {
  created?: number[];
  removed?: number[];
  routes_changed?: Record<string, number[][]>;
  lines_changed?: Record<string, LinePayload>;
  component?: ComponentPayload;
  line?: LinePayload;
  placement?: PlacementPayload;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}
