// Client-side mirror of the server project: component/line views keyed by id,
// one-at-most selection, and the active canvas tool. Updated only from
// acknowledged server deltas so a refresh reproduces the same diagram.

import { ComponentPayload, EndpointPayload, LinePayload, Mode } from './types.js';

export type Tool =
  | { kind: 'idle' }
  | { kind: 'mode-select' }
  | { kind: 'component-create'; component: string }
  | { kind: 'line-draw'; first: EndpointPayload | null; firstPoint: [number, number] | null };

export class EditorState {
  projectId: string | null = null;
  mode: Mode = 'power-flow';
  components = new Map<number, ComponentPayload>();
  lines = new Map<number, LinePayload>();
  selection: number | null = null;
  tool: Tool = { kind: 'idle' };
  clipboard: number | null = null;
  lastMouse: [number, number] = [100, 100];
  solvePending = false;

  reset(projectId: string, mode: Mode): void {
    this.projectId = projectId;
    this.mode = mode;
    this.components.clear();
    this.lines.clear();
    this.selection = null;
    this.tool = { kind: 'idle' };
    this.clipboard = null;
    this.solvePending = false;
  }

  upsertComponent(payload: ComponentPayload): void {
    this.components.set(payload.id, payload);
  }

  upsertLine(payload: LinePayload): void {
    this.lines.set(payload.id, payload);
  }

  removeIds(ids: number[]): void {
    for (const id of ids) {
      this.components.delete(id);
      this.lines.delete(id);
      if (this.selection === id) {
        this.selection = null;
      }
      if (this.clipboard === id) {
        this.clipboard = null;
      }
    }
  }

  applyRoutes(routes: Record<string, number[][]> | undefined): void {
    if (!routes) return;
    for (const [id, route] of Object.entries(routes)) {
      const line = this.lines.get(Number(id));
      if (line) {
        line.route = route;
      }
    }
  }
}
