// Calculation pane: the rendered solver trace, plus the violation list with
// click-to-focus on offending components.

import { Violation } from './types.js';

export class CalcPane {
  readonly pane: HTMLPreElement;
  readonly violations: HTMLElement;

  constructor(parent: HTMLElement, private readonly focus: (id: number) => void) {
    const wrap = document.createElement('div');
    wrap.id = 'calc-window';
    this.violations = document.createElement('ul');
    this.violations.id = 'violations';
    this.pane = document.createElement('pre');
    this.pane.id = 'calc-pane';
    wrap.append(this.violations, this.pane);
    parent.appendChild(wrap);
  }

  showTrace(text: string): void {
    this.violations.replaceChildren();
    this.pane.textContent = text;
  }

  showViolations(violations: Violation[]): void {
    this.pane.textContent = '';
    this.violations.replaceChildren();
    for (const violation of violations) {
      const item = document.createElement('li');
      item.className = 'violation';
      item.dataset['code'] = violation.code;
      item.textContent = violation.component === null
        ? `${violation.code}: ${violation.message}`
        : `${violation.code} (component ${violation.component}): ${violation.message}`;
      if (violation.component !== null) {
        const id = violation.component;
        item.addEventListener('click', () => this.focus(id));
      }
      this.violations.appendChild(item);
    }
  }

  violationCodes(): string[] {
    return Array.from(this.violations.querySelectorAll('.violation'))
      .map((v) => (v as HTMLElement).dataset['code'] ?? '');
  }
}
