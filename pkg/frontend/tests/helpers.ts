// Test scaffolding: spawn the Python workbench service, mount the editor in
// jsdom, and dispatch realistic UI events.

import { ChildProcess, spawn } from 'node:child_process';
import path from 'node:path';
import { ApiClient } from '../src/api.js';
import { Editor } from '../src/app.js';
import type { Mode } from '../src/types.js';

const REPO_ROOT = path.resolve(__dirname, '..', '..');

export interface ServiceHandle {
  base: string;
  proc: ChildProcess;
  stop: () => void;
}

export async function startService(port: number): Promise<ServiceHandle> {
  const proc = spawn(
    'python3', ['-m', 'sldkit.cli', 'serve', '--port', String(port)],
    {
      cwd: REPO_ROOT,
      env: { ...process.env, SLDKIT_NO_NUMBA: '1' },
      stdio: ['ignore', 'ignore', 'pipe'],
    },
  );
  let stderr = '';
  proc.stderr?.on('data', (chunk) => { stderr += String(chunk); });
  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/api/catalog`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (proc.exitCode !== null) {
      throw new Error(`service exited early (${proc.exitCode}): ${stderr}`);
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error(`service did not come up on ${base}: ${stderr}`);
    }
    await sleep(150);
  }
  return { base, proc, stop: () => { proc.kill(); } };
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function mountEditor(base: string, mode: Mode): Promise<Editor> {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById('app') as HTMLElement;
  return Editor.create(root, new ApiClient(base), mode);
}

function mouseInit(x: number, y: number): MouseEventInit {
  return { bubbles: true, cancelable: true, clientX: x, clientY: y };
}

export function clickAt(target: Element, x: number, y: number): void {
  target.dispatchEvent(new MouseEvent('click', mouseInit(x, y)));
}

export function dblClickAt(target: Element, x: number, y: number): void {
  target.dispatchEvent(new MouseEvent('dblclick', mouseInit(x, y)));
}

export function dragBetween(editor: Editor, target: Element,
                            from: [number, number], to: [number, number]): void {
  target.dispatchEvent(new MouseEvent('mousedown', mouseInit(from[0], from[1])));
  editor.canvas.svg.dispatchEvent(new MouseEvent('mousemove', mouseInit(
    (from[0] + to[0]) / 2, (from[1] + to[1]) / 2)));
  editor.canvas.svg.dispatchEvent(new MouseEvent('mouseup', mouseInit(to[0], to[1])));
}

export function pressKey(key: string, modifiers: { ctrl?: boolean } = {}): void {
  document.dispatchEvent(new KeyboardEvent('keydown', {
    key, bubbles: true, ctrlKey: modifiers.ctrl ?? false,
  }));
}

export function toolButton(editor: Editor, kind: string): HTMLButtonElement {
  return editor.componentBar.element.querySelector(
    `.component-button[data-kind="${kind}"]`,
  ) as HTMLButtonElement;
}

export function solveButton(editor: Editor, method: string): HTMLButtonElement {
  return editor.modeBar.element.querySelector(
    `.solve-button[data-method="${method}"]`,
  ) as HTMLButtonElement;
}

export function spriteOf(editor: Editor, id: number): SVGElement {
  return editor.canvas.svg.querySelector(
    `.component[data-id="${id}"]`,
  ) as SVGElement;
}

export function portOf(editor: Editor, id: number, port: number): SVGElement {
  return editor.canvas.svg.querySelector(
    `.port[data-component="${id}"][data-port="${port}"]`,
  ) as SVGElement;
}

export function barOf(editor: Editor, id: number): SVGElement {
  return editor.canvas.svg.querySelector(`.bar[data-id="${id}"]`) as SVGElement;
}

export function lineOf(editor: Editor, id: number): SVGElement {
  return editor.canvas.svg.querySelector(`.line[data-id="${id}"]`) as SVGElement;
}

/** The clickable element for any drawn item: sprite group or line polyline. */
export function elementOf(editor: Editor, id: number): SVGElement {
  return spriteOf(editor, id) ?? lineOf(editor, id);
}

/** Place a component through the toolbar + canvas click flow. */
export async function placeComponent(editor: Editor, kind: string,
                                     x: number, y: number): Promise<number> {
  toolButton(editor, kind).click();
  clickAt(editor.canvas.svg, x, y);
  await editor.whenIdle();
  const id = editor.state.selection;
  if (id === null) {
    throw new Error(`placing ${kind} at ${x},${y} failed`);
  }
  return id;
}

/** Draw a line by clicking two connection targets (ports or bar points). */
export async function drawLine(
  editor: Editor,
  first: { element: Element; at: [number, number] },
  second: { element: Element; at: [number, number] },
): Promise<number> {
  toolButton(editor, 'line').click();
  clickAt(first.element, first.at[0], first.at[1]);
  clickAt(second.element, second.at[0], second.at[1]);
  await editor.whenIdle();
  const ids = [...editor.state.lines.keys()];
  return ids[ids.length - 1]!;
}

/** Canonical deep form for comparing client state to a fresh server snapshot. */
export function canonical(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(canonical);
  }
  if (value && typeof value === 'object') {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = canonical((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export async function expectMirrorsServer(editor: Editor): Promise<void> {
  const api = editor.api;
  const snapshot = await api.snapshot(editor.state.projectId!);
  const serverComponents = canonical(snapshot.components);
  const clientComponents = canonical(
    [...editor.state.components.values()].sort((a, b) => a.id - b.id));
  const serverLines = canonical(snapshot.lines);
  const clientLines = canonical(
    [...editor.state.lines.values()].sort((a, b) => a.id - b.id));
  if (JSON.stringify(serverComponents) !== JSON.stringify(clientComponents)) {
    throw new Error('client component set diverged from server snapshot');
  }
  if (JSON.stringify(serverLines) !== JSON.stringify(clientLines)) {
    throw new Error('client line set diverged from server snapshot');
  }
}
