// Properties window (opened by double-click): one single-string text input
// per property, with inline parse feedback. Submit stays blocked while any
// field fails the grammar; the server re-validates on apply.

import { checkProperty } from './parse.js';
import { Catalog } from './types.js';

export interface EditablePayload {
  id: number;
  kind?: string;
  properties?: Record<string, string>;
}

export class PropertiesWindow {
  readonly element: HTMLElement;
  private componentId: number | null = null;
  private schema: Record<string, string[]> = {};

  constructor(parent: HTMLElement,
              private readonly onApply: (id: number, props: Record<string, string>) => void) {
    this.element = document.createElement('div');
    this.element.id = 'properties-window';
    this.element.hidden = true;
    parent.appendChild(this.element);
  }

  open(component: EditablePayload, catalog: Catalog): void {
    const entry = catalog.components.find((c) => c.kind === component.kind);
    this.schema = entry?.property_schema ?? {};
    this.componentId = component.id;
    this.element.hidden = false;
    this.element.replaceChildren();

    const title = document.createElement('h3');
    title.textContent = `${component.kind} ${component.id}`;
    this.element.appendChild(title);

    const current = { ...entry?.default_properties, ...(component.properties ?? {}) };
    for (const name of Object.keys(this.schema)) {
      const row = document.createElement('label');
      row.className = 'property-row';
      row.dataset['name'] = name;
      const caption = document.createElement('span');
      caption.textContent = name;
      const input = document.createElement('input');
      input.type = 'text';
      input.className = 'property-input';
      input.dataset['name'] = name;
      input.value = current[name] ?? '';
      const feedback = document.createElement('span');
      feedback.className = 'parse-feedback';
      feedback.dataset['name'] = name;
      input.addEventListener('input', () => this.validateField(input, feedback));
      row.append(caption, input, feedback);
      this.element.appendChild(row);
    }

    const apply = document.createElement('button');
    apply.id = 'properties-apply';
    apply.textContent = 'apply';
    apply.addEventListener('click', () => this.apply());
    const close = document.createElement('button');
    close.id = 'properties-close';
    close.textContent = 'close';
    close.addEventListener('click', () => this.close());
    this.element.append(apply, close);
    this.refreshSubmitGate();
  }

  private validateField(input: HTMLInputElement, feedback: HTMLElement): void {
    const name = input.dataset['name']!;
    const schema = this.schema[name] ?? [];
    if (input.value.trim() === '') {
      feedback.textContent = '';
      input.classList.remove('invalid');
    } else {
      const result = checkProperty(input.value, schema);
      feedback.textContent = result.ok ? '' : result.error ?? 'invalid';
      input.classList.toggle('invalid', !result.ok);
    }
    this.refreshSubmitGate();
  }

  private refreshSubmitGate(): void {
    const apply = this.element.querySelector('#properties-apply') as
      HTMLButtonElement | null;
    if (apply) {
      apply.disabled = this.element.querySelectorAll('.invalid').length > 0;
    }
  }

  private apply(): void {
    if (this.componentId === null) return;
    const props: Record<string, string> = {};
    for (const input of this.element.querySelectorAll('.property-input')) {
      const field = input as HTMLInputElement;
      if (field.value.trim() !== '') {
        props[field.dataset['name']!] = field.value.trim();
      }
    }
    this.onApply(this.componentId, props);
  }

  close(): void {
    this.element.hidden = true;
    this.componentId = null;
  }

  get openFor(): number | null {
    return this.componentId;
  }
}
