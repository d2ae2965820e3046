// End-to-end through real DOM events against a live workbench service:
// build a generator-transformer-bus-load chain in a per-unit project with the
// port-to-port line tool and the "100 MVA 3-ph" double-click edit, then run
// Newton-Raphson on a power-flow project and check the canvas overlay labels
// and the calculation pane against the solve response byte for byte.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { overlayLabel } from '../src/format.js';
import type { Editor } from '../src/app.js';
import {
  barOf,
  clickAt,
  dblClickAt,
  dragBetween,
  drawLine,
  elementOf,
  expectMirrorsServer,
  placeComponent,
  portOf,
  pressKey,
  solveButton,
  spriteOf,
  startService,
  mountEditor,
  type ServiceHandle,
} from './helpers.js';

let service: ServiceHandle;

beforeAll(async () => {
  service = await startService(8791);
});

afterAll(() => {
  service.stop();
});

async function setProperties(editor: Editor, id: number,
                             values: Record<string, string>): Promise<void> {
  dblClickAt(elementOf(editor, id), 0, 0);
  await editor.whenIdle();
  const window_ = editor.properties.element;
  expect(window_.hidden).toBe(false);
  for (const [name, value] of Object.entries(values)) {
    const input = window_.querySelector(
      `.property-input[data-name="${name}"]`) as HTMLInputElement;
    expect(input).not.toBeNull();
    input.value = value;
    input.dispatchEvent(new Event('input', { bubbles: true }));
  }
  (window_.querySelector('#properties-apply') as HTMLButtonElement).click();
  await editor.whenIdle();
}

describe('editing chain in a per-unit project', () => {
  let editor: Editor;
  let ids: { gen: number; trafo: number; bar: number; load: number };

  it('creates generator, transformer, bus-bar and load via toolbar clicks', async () => {
    editor = await mountEditor(service.base, 'per-unit');
    ids = {
      gen: await placeComponent(editor, 'generator', 300, 200),
      trafo: await placeComponent(editor, 'transformer', 300, 400),
      bar: await placeComponent(editor, 'busbar', 250, 600),
      load: await placeComponent(editor, 'load', 600, 700),
    };
    expect(editor.state.components.size).toBe(4);
    await expectMirrorsServer(editor);
  });

  it('draws the chain port-to-port with orthogonal routes', async () => {
    await drawLine(editor,
      { element: portOf(editor, ids.gen, 0), at: [300, 224] },
      { element: portOf(editor, ids.trafo, 0), at: [300, 376] });
    await drawLine(editor,
      { element: portOf(editor, ids.trafo, 1), at: [300, 424] },
      { element: barOf(editor, ids.bar), at: [280, 600] });
    await drawLine(editor,
      { element: portOf(editor, ids.load, 0), at: [600, 676] },
      { element: barOf(editor, ids.bar), at: [300, 600] });
    expect(editor.state.lines.size).toBe(3);
    for (const line of editor.state.lines.values()) {
      for (const segment of line.route) {
        const horizontal = segment[1] === segment[3];
        const vertical = segment[0] === segment[2];
        expect(horizontal || vertical).toBe(true);
      }
    }
    await expectMirrorsServer(editor);
  });

  it('shows a live orthogonal preview while drawing', async () => {
    const svg = editor.canvas.svg;
    (editor.componentBar.element.querySelector(
      '.component-button[data-kind="line"]') as HTMLButtonElement).click();
    clickAt(portOf(editor, ids.gen, 0), 300, 224);
    svg.dispatchEvent(new MouseEvent('mousemove',
      { bubbles: true, clientX: 500, clientY: 330 }));
    const preview = svg.querySelector('#line-preview');
    expect(preview).not.toBeNull();
    expect(preview!.getAttribute('points')).toBe('300,224 500,224 500,330');
    // cancel by clicking empty canvas
    clickAt(svg, 900, 100);
    expect(svg.querySelector('#line-preview')).toBeNull();
    await editor.whenIdle();
  });

  it('double-click edits the transformer rated power as "100 MVA 3-ph"', async () => {
    await setProperties(editor, ids.trafo, { rated_power: '100 MVA 3-ph' });
    const fresh = await editor.api.getComponent(editor.state.projectId!, ids.trafo);
    expect(fresh.component.properties['rated_power']).toBe('100 MVA 3-ph');
    expect(fresh.component.spec['rated_power']).toEqual(
      { magnitude: 100.0, unit: 'MVA', qualifier: '3-ph' });
    await expectMirrorsServer(editor);
  });

  it('blocks apply while a field fails the property grammar', async () => {
    dblClickAt(spriteOf(editor, ids.trafo), 0, 0);
    await editor.whenIdle();
    const window_ = editor.properties.element;
    const input = window_.querySelector(
      '.property-input[data-name="rated_power"]') as HTMLInputElement;
    const apply = window_.querySelector('#properties-apply') as HTMLButtonElement;
    input.value = 'abc MVA';
    input.dispatchEvent(new Event('input', { bubbles: true }));
    expect(apply.disabled).toBe(true);
    expect((window_.querySelector(
      '.parse-feedback[data-name="rated_power"]') as HTMLElement).textContent)
      .toContain('not a number');
    input.value = '120 MVA 3-ph';
    input.dispatchEvent(new Event('input', { bubbles: true }));
    expect(apply.disabled).toBe(false);
    editor.properties.close();
  });

  it('runs the per-unit report and fills the calculation pane', async () => {
    // anchor the bases next to the generator first
    await placeComponent(editor, 'pu_base', 320, 180);
    solveButton(editor, 'report').click();
    await editor.whenIdle();
    const direct = await editor.api.solve(editor.state.projectId!);
    expect(editor.calc.pane.textContent).toBe(direct.trace_text);
    expect(direct.status).toBe('ok');
  });
});

describe('power-flow project: solve and display', () => {
  let editor: Editor;
  let barA = 0;
  let barB = 0;
  let load = 0;
  let line = 0;

  it('builds a two-bus feeder through the UI', async () => {
    editor = await mountEditor(service.base, 'power-flow');
    barA = await placeComponent(editor, 'busbar', 200, 200);
    barB = await placeComponent(editor, 'busbar', 700, 500);
    load = await placeComponent(editor, 'load', 760, 650);
    line = await drawLine(editor,
      { element: barOf(editor, barA), at: [230, 200] },
      { element: barOf(editor, barB), at: [730, 500] });
    await drawLine(editor,
      { element: portOf(editor, load, 0), at: [760, 626] },
      { element: barOf(editor, barB), at: [745, 500] });
    await setProperties(editor, barA, { slack: 'true', v_set: '1.03 pu' });
    await setProperties(editor, line, { impedance: '0.02 0.08 pu' });
    await setProperties(editor, load, { p: '0.7 pu', q: '0.2 pu' });
    await expectMirrorsServer(editor);
  });

  it('runs NR and mirrors the solve response byte-for-byte', async () => {
    solveButton(editor, 'nr').click();
    await editor.whenIdle();
    expect(editor.lastSolve?.status).toBe('ok');

    // independent solve of the same project for the reference response
    const direct = await editor.api.solve(editor.state.projectId!, 'nr');
    expect(direct.status).toBe('ok');

    // calculation pane text equals the response trace byte for byte
    expect(editor.calc.pane.textContent).toBe(direct.trace_text);
    expect(editor.lastSolve!.trace_text).toBe(direct.trace_text);

    // every overlay entry appears as a canvas label with the shared format
    const labels = new Map(
      Array.from(editor.canvas.svg.querySelectorAll('.overlay-label'))
        .map((node) => [node.getAttribute('data-id')!, node.textContent!]));
    const expected = Object.entries(direct.overlay!)
      .filter(([, values]) => overlayLabel(values) !== '');
    expect(expected.length).toBeGreaterThan(0);
    for (const [id, values] of expected) {
      expect(labels.get(id)).toBe(overlayLabel(values));
    }
    expect(labels.size).toBe(expected.length);
  });

  it('replaces the overlay atomically after an edit and re-solve', async () => {
    const before = new Map(
      Array.from(editor.canvas.svg.querySelectorAll('.overlay-label'))
        .map((node) => [node.getAttribute('data-id')!, node.textContent!]));

    dragBetween(editor, spriteOf(editor, load), [760, 650], [820, 700]);
    await editor.whenIdle();
    await expectMirrorsServer(editor);

    solveButton(editor, 'nr').click();
    await editor.whenIdle();
    const direct = await editor.api.solve(editor.state.projectId!, 'nr');
    const after = new Map(
      Array.from(editor.canvas.svg.querySelectorAll('.overlay-label'))
        .map((node) => [node.getAttribute('data-id')!, node.textContent!]));
    for (const [id, values] of Object.entries(direct.overlay!)) {
      const text = overlayLabel(values);
      if (text) {
        expect(after.get(id)).toBe(text);
      }
    }
    expect(editor.calc.pane.textContent).toBe(direct.trace_text);
    expect(after.size).toBe(before.size);
  });

  it('supports rotate, copy/paste and cascade delete from the keyboard', async () => {
    clickAt(spriteOf(editor, load), 760, 650);
    expect(editor.state.selection).toBe(load);
    const rotationBefore = editor.state.components.get(load)!.placement.rotation;
    pressKey('r');
    await editor.whenIdle();
    expect(editor.state.components.get(load)!.placement.rotation)
      .toBe((rotationBefore + 90) % 360);

    pressKey('c', { ctrl: true });
    editor.canvas.svg.dispatchEvent(new MouseEvent('mousemove',
      { bubbles: true, clientX: 900, clientY: 300 }));
    pressKey('v', { ctrl: true });
    await editor.whenIdle();
    const pasted = [...editor.state.components.keys()].pop()!;
    expect(editor.state.components.get(pasted)!.kind).toBe('load');
    await expectMirrorsServer(editor);

    clickAt(spriteOf(editor, barB), 730, 500);
    const linesBefore = editor.state.lines.size;
    pressKey('Delete');
    await editor.whenIdle();
    expect(editor.state.components.has(barB)).toBe(false);
    expect(editor.state.lines.size).toBe(linesBefore - 2);
    await expectMirrorsServer(editor);
  });
});
