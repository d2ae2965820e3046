// Inline error toasts naming the server error code (BusBarConnected, ...).

export class ToastRail {
  readonly element: HTMLElement;

  constructor(parent: HTMLElement) {
    this.element = document.createElement('div');
    this.element.id = 'toasts';
    parent.appendChild(this.element);
  }

  show(code: string, message: string): void {
    const toast = document.createElement('div');
    toast.className = 'toast';
    toast.dataset['code'] = code;
    toast.textContent = `${code}: ${message}`;
    this.element.appendChild(toast);
    setTimeout(() => toast.remove(), 4000);
  }

  codes(): string[] {
    return Array.from(this.element.querySelectorAll('.toast'))
      .map((t) => (t as HTMLElement).dataset['code'] ?? '');
  }
}
