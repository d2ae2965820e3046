// Editor wiring: toolbar and canvas events drive the HTTP API; acknowledged
// deltas update the mirrored state; the canvas re-renders from state only.
// No client-side mutation bypasses the server.

import { ApiClient } from './api.js';
import { CalcPane } from './calc.js';
import { CanvasView } from './canvas.js';
import { PropertiesWindow } from './properties.js';
import { previewRoute } from './routing.js';
import { EditorState } from './state.js';
import { ToastRail } from './toast.js';
import { ComponentToolbar, ModeToolbar } from './toolbars.js';
import {
  ApiError,
  Catalog,
  EditDelta,
  EndpointPayload,
  Method,
  Mode,
  SolveResponse,
} from './types.js';

const PASTE_OFFSET = 40;

interface DragContext {
  id: number;
  moved: boolean;
}

export class Editor {
  readonly state = new EditorState();
  readonly canvas: CanvasView;
  readonly calc: CalcPane;
  readonly toasts: ToastRail;
  readonly properties: PropertiesWindow;
  readonly modeBar: ModeToolbar;
  readonly componentBar: ComponentToolbar;
  lastSolve: SolveResponse | null = null;

  private drag: DragContext | null = null;
  private pending = 0;
  private idleResolvers: (() => void)[] = [];
  private editChain: Promise<unknown> = Promise.resolve();

  private constructor(readonly root: HTMLElement, readonly api: ApiClient,
                      readonly catalog: Catalog) {
    this.modeBar = new ModeToolbar(root, catalog.modes,
                                   (mode) => this.switchMode(mode),
                                   (method) => this.runSolve(method));
    this.canvas = new CanvasView(root);
    this.componentBar = new ComponentToolbar(root, catalog,
                                             (kind) => this.pickComponent(kind));
    this.calc = new CalcPane(root, (id) => this.focusComponent(id));
    this.toasts = new ToastRail(root);
    this.properties = new PropertiesWindow(root,
                                           (id, props) => this.applyProperties(id, props));
    this.bindCanvasEvents();
    this.bindKeyboard();
  }

  static async create(root: HTMLElement, api: ApiClient,
                      mode: Mode = 'power-flow'): Promise<Editor> {
    const catalog = await api.catalog();
    const editor = new Editor(root, api, catalog);
    await editor.switchModeNow(mode);
    return editor;
  }

  // --- async bookkeeping so tests can await quiescence -----------------------

  private track<T>(work: Promise<T>): Promise<T | null> {
    this.pending += 1;
    return work
      .catch((error: unknown) => {
        if (error instanceof ApiError) {
          this.toasts.show(error.code, error.message);
          return null;
        }
        throw error;
      })
      .finally(() => {
        this.pending -= 1;
        if (this.pending === 0) {
          const resolvers = this.idleResolvers;
          this.idleResolvers = [];
          resolvers.forEach((resolve) => resolve());
        }
      });
  }

  whenIdle(): Promise<void> {
    if (this.pending === 0) {
      return Promise.resolve();
    }
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  /** Edits serialize: one in-flight edit request per session. */
  private enqueueEdit(work: () => Promise<void>): void {
    this.editChain = this.editChain.then(() => this.track(work()));
    void this.track(this.editChain.then(() => undefined));
  }

  // --- project lifecycle ------------------------------------------------------

  private switchMode(mode: Mode): void {
    void this.track(this.switchModeNow(mode));
  }

  async switchModeNow(mode: Mode): Promise<void> {
    const created = await this.api.createProject(mode);
    this.state.reset(created.project_id, created.mode);
    this.modeBar.markActive(mode);
    this.componentBar.applyMode(mode);
    this.canvas.clearOverlay();
    this.canvas.clearPreview();
    this.calc.showTrace('');
    this.lastSolve = null;
    this.canvas.render(this.state);
  }

  async refreshFromServer(): Promise<void> {
    const projectId = this.state.projectId;
    if (!projectId) return;
    const snapshot = await this.api.snapshot(projectId);
    this.state.components.clear();
    this.state.lines.clear();
    for (const component of snapshot.components) {
      this.state.upsertComponent(component);
    }
    for (const line of snapshot.lines) {
      this.state.upsertLine(line);
    }
    this.canvas.render(this.state);
  }

  // --- tool selection -----------------------------------------------------------

  pickComponent(kind: string): void {
    if (this.state.solvePending) return;
    if (kind === 'line') {
      this.state.tool = { kind: 'line-draw', first: null, firstPoint: null };
    } else {
      this.state.tool = { kind: 'component-create', component: kind };
    }
  }

  focusComponent(id: number): void {
    this.state.selection = id;
    this.canvas.render(this.state);
  }

  // --- canvas events ---------------------------------------------------------

  private bindCanvasEvents(): void {
    const svg = this.canvas.svg;
    svg.addEventListener('click', (event) => this.onCanvasClick(event as MouseEvent));
    svg.addEventListener('dblclick', (event) => this.onCanvasDblClick(event as MouseEvent));
    svg.addEventListener('mousedown', (event) => this.onMouseDown(event as MouseEvent));
    svg.addEventListener('mousemove', (event) => this.onMouseMove(event as MouseEvent));
    svg.addEventListener('mouseup', (event) => this.onMouseUp(event as MouseEvent));
  }

  private endpointAt(event: MouseEvent): { ref: EndpointPayload; at: [number, number] } | null {
    const target = event.target as Element | null;
    const port = target?.closest?.('.port') as SVGElement | null;
    if (port) {
      const component = Number(port.getAttribute('data-component'));
      const index = Number(port.getAttribute('data-port'));
      const payload = this.state.components.get(component);
      const at = payload?.ports[index] ?? this.canvas.eventPoint(event);
      return { ref: { component, port: index }, at };
    }
    const bar = target?.closest?.('.bar') as SVGElement | null;
    if (bar) {
      const component = Number(bar.getAttribute('data-id'));
      const at = this.canvas.eventPoint(event);
      return { ref: { component, point: at }, at };
    }
    return null;
  }

  private componentAt(event: MouseEvent): number | null {
    const target = event.target as Element | null;
    const sprite = target?.closest?.('.component') as SVGElement | null;
    if (sprite) {
      return Number(sprite.getAttribute('data-id'));
    }
    const line = target?.closest?.('.line') as SVGElement | null;
    if (line) {
      return Number(line.getAttribute('data-id'));
    }
    return null;
  }

  private onCanvasClick(event: MouseEvent): void {
    this.state.lastMouse = this.canvas.eventPoint(event);
    const tool = this.state.tool;
    if (this.state.solvePending) return;

    if (tool.kind === 'component-create') {
      const [x, y] = this.canvas.eventPoint(event);
      this.state.tool = { kind: 'idle' };
      this.enqueueEdit(() => this.createComponent(tool.component, x, y));
      return;
    }

    if (tool.kind === 'line-draw') {
      const endpoint = this.endpointAt(event);
      if (!endpoint) {
        // a line that does not end in another port is cancelled outright
        this.state.tool = { kind: 'idle' };
        this.canvas.clearPreview();
        return;
      }
      if (tool.first === null) {
        this.state.tool = { kind: 'line-draw', first: endpoint.ref,
                            firstPoint: endpoint.at };
        return;
      }
      const first = tool.first;
      this.state.tool = { kind: 'idle' };
      this.canvas.clearPreview();
      this.enqueueEdit(() => this.createLine(first, endpoint.ref));
      return;
    }

    const hit = this.componentAt(event);
    this.state.selection = hit;
    this.canvas.render(this.state);
  }

  private onCanvasDblClick(event: MouseEvent): void {
    const hit = this.componentAt(event);
    if (hit === null) return;
    this.state.selection = hit;
    void this.track(this.openProperties(hit));
  }

  private onMouseDown(event: MouseEvent): void {
    if (this.state.solvePending || this.state.tool.kind !== 'idle') return;
    const target = event.target as Element | null;
    if (target?.closest?.('.port')) return;
    const sprite = target?.closest?.('.component') as SVGElement | null;
    if (!sprite) return;
    this.drag = { id: Number(sprite.getAttribute('data-id')), moved: false };
  }

  private onMouseMove(event: MouseEvent): void {
    this.state.lastMouse = this.canvas.eventPoint(event);
    const tool = this.state.tool;
    if (tool.kind === 'line-draw' && tool.first !== null && tool.firstPoint) {
      this.canvas.showPreview(previewRoute(tool.firstPoint, this.state.lastMouse));
    }
    if (this.drag) {
      this.drag.moved = true;
    }
  }

  private onMouseUp(event: MouseEvent): void {
    const drag = this.drag;
    this.drag = null;
    if (!drag || !drag.moved || this.state.solvePending) return;
    const [x, y] = this.canvas.eventPoint(event);
    this.enqueueEdit(() => this.moveComponent(drag.id, x, y));
  }

  private bindKeyboard(): void {
    document.addEventListener('keydown', (event) => {
      const key = event.key;
      if (this.state.solvePending) return;
      const selected = this.state.selection;
      const clipboard = this.state.clipboard;
      if (key === 'Delete' && selected !== null) {
        this.enqueueEdit(() => this.deleteComponent(selected));
      } else if ((key === 'r' || key === 'R') && selected !== null) {
        this.enqueueEdit(() => this.rotateComponent(selected));
      } else if ((event.ctrlKey || event.metaKey) && (key === 'c' || key === 'C')) {
        this.state.clipboard = selected;
      } else if ((event.ctrlKey || event.metaKey) && (key === 'v' || key === 'V')) {
        if (clipboard !== null) {
          this.enqueueEdit(() => this.pasteComponent(clipboard));
        }
      }
    });
  }

  // --- server operations -------------------------------------------------------

  private applyDelta(delta: EditDelta): void {
    if (delta.component) this.state.upsertComponent(delta.component);
    if (delta.line) this.state.upsertLine(delta.line);
    if (delta.lines_changed) {
      for (const payload of Object.values(delta.lines_changed)) {
        this.state.upsertLine(payload);
      }
    } else {
      this.state.applyRoutes(delta.routes_changed);
    }
    if (delta.removed) this.state.removeIds(delta.removed);
    this.canvas.render(this.state);
  }

  private async createComponent(kind: string, x: number, y: number): Promise<void> {
    const projectId = this.state.projectId!;
    const delta = await this.api.addComponent(projectId, kind, { x, y });
    this.applyDelta(delta);
    this.state.selection = delta.created?.[0] ?? null;
    this.canvas.render(this.state);
  }

  private async createLine(a: EndpointPayload, b: EndpointPayload): Promise<void> {
    const projectId = this.state.projectId!;
    const delta = await this.api.addLine(projectId, a, b);
    this.applyDelta(delta);
  }

  private async openProperties(id: number): Promise<void> {
    const projectId = this.state.projectId!;
    const { component } = await this.api.getComponent(projectId, id);
    this.properties.open(component, this.catalog);
  }

  private upsertFromPayload(payload: unknown): void {
    const record = payload as { route?: unknown };
    if (record && typeof record === 'object' && 'route' in record) {
      this.state.upsertLine(payload as never);
    } else {
      this.state.upsertComponent(payload as never);
    }
  }

  private applyProperties(id: number, props: Record<string, string>): void {
    this.enqueueEdit(async () => {
      const projectId = this.state.projectId!;
      const result = await this.api.editProperties(projectId, id, props);
      this.upsertFromPayload(result.component);
      const extra = (result as unknown as EditDelta).lines_changed;
      if (extra) {
        for (const payload of Object.values(extra)) {
          this.state.upsertLine(payload);
        }
      }
      this.properties.close();
      this.canvas.render(this.state);
    });
  }

  private async deleteComponent(id: number): Promise<void> {
    const projectId = this.state.projectId!;
    const { removed } = await this.api.deleteComponent(projectId, id);
    this.state.removeIds(removed);
    this.canvas.render(this.state);
  }

  private async rotateComponent(id: number): Promise<void> {
    const projectId = this.state.projectId!;
    const delta = await this.api.rotateComponent(projectId, id);
    this.applyDelta(delta);
  }

  private async moveComponent(id: number, x: number, y: number): Promise<void> {
    const projectId = this.state.projectId!;
    const delta = await this.api.moveComponent(projectId, id, x, y);
    this.applyDelta(delta);
  }

  private async pasteComponent(id: number): Promise<void> {
    const projectId = this.state.projectId!;
    const [x, y] = this.state.lastMouse;
    const delta = await this.api.copyComponent(
      projectId, id, x + PASTE_OFFSET, y + PASTE_OFFSET);
    this.applyDelta(delta);
  }

  runSolve(method: Method | null): void {
    if (this.state.solvePending) return;
    this.state.solvePending = true;
    void this.track((async () => {
      try {
        const projectId = this.state.projectId!;
        const response = await this.api.solve(projectId, method ?? undefined);
        this.lastSolve = response;
        if (response.status === 'invalid') {
          this.calc.showViolations(response.violations);
          this.canvas.clearOverlay();
          return;
        }
        this.calc.showTrace(response.trace_text);
        if (response.status === 'ok') {
          this.canvas.renderOverlay(this.state, response.overlay);
        } else {
          this.canvas.clearOverlay();
          this.toasts.show(response.error ?? 'SolveFailed',
                           'solver did not converge');
        }
      } finally {
        this.state.solvePending = false;
      }
    })());
  }
}
