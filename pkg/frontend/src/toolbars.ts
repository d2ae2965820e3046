// Left toolbar: operation modes and the solve controls. Right toolbar: the
// component palette filtered by the current mode.

import { Catalog, Method, Mode } from './types.js';

export class ModeToolbar {
  readonly element: HTMLElement;

  constructor(parent: HTMLElement, modes: Mode[],
              onMode: (mode: Mode) => void,
              onSolve: (method: Method | null) => void) {
    this.element = document.createElement('div');
    this.element.id = 'toolbar-modes';
    for (const mode of modes) {
      const button = document.createElement('button');
      button.className = 'mode-button';
      button.dataset['mode'] = mode;
      button.textContent = mode;
      button.addEventListener('click', () => onMode(mode));
      this.element.appendChild(button);
    }
    for (const method of ['gs', 'nr', 'wls', 'fdse'] as Method[]) {
      const button = document.createElement('button');
      button.className = 'solve-button';
      button.dataset['method'] = method;
      button.textContent = `run ${method}`;
      button.addEventListener('click', () => onSolve(method));
      this.element.appendChild(button);
    }
    const report = document.createElement('button');
    report.className = 'solve-button';
    report.dataset['method'] = 'report';
    report.textContent = 'run per-unit';
    report.addEventListener('click', () => onSolve(null));
    this.element.appendChild(report);
    parent.appendChild(this.element);
  }

  markActive(mode: Mode): void {
    for (const button of this.element.querySelectorAll('.mode-button')) {
      button.classList.toggle('active', (button as HTMLElement).dataset['mode'] === mode);
    }
  }
}

export class ComponentToolbar {
  readonly element: HTMLElement;

  constructor(parent: HTMLElement, private readonly catalog: Catalog,
              onPick: (kind: string) => void) {
    this.element = document.createElement('div');
    this.element.id = 'toolbar-components';
    for (const entry of catalog.components) {
      const button = document.createElement('button');
      button.className = 'component-button';
      button.dataset['kind'] = entry.kind;
      button.textContent = entry.kind;
      button.addEventListener('click', () => onPick(entry.kind));
      this.element.appendChild(button);
    }
    parent.appendChild(this.element);
  }

  /** Grey out components that the current mode does not allow. */
  applyMode(mode: Mode): void {
    const byKind = new Map(this.catalog.components.map((c) => [c.kind, c]));
    for (const button of this.element.querySelectorAll('.component-button')) {
      const kind = (button as HTMLElement).dataset['kind']!;
      const allowed = byKind.get(kind)?.modes.includes(mode) ?? false;
      (button as HTMLButtonElement).disabled = !allowed;
    }
  }
}
