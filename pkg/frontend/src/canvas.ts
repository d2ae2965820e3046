// SVG rendering of the diagram: component sprites with connection-port
// rectangles, orthogonal line polylines, the live line-draw preview, and
// solve-overlay labels. Rendering is a pure function of the editor state.

import { overlayLabel } from './format.js';
import { routePolylinePoints } from './routing.js';
import { EditorState } from './state.js';
import { ComponentPayload, LinePayload } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const PORT_HALF = 4;
const BAR_HALF = 3;

const KIND_LETTER: Record<string, string> = {
  generator: 'G',
  transformer: 'T',
  load: 'L',
  meter: 'M',
  pu_base: 'B',
};

function el(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export class CanvasView {
  readonly svg: SVGSVGElement;
  private readonly spriteLayer: SVGGElement;
  private readonly lineLayer: SVGGElement;
  private readonly previewLayer: SVGGElement;
  private readonly overlayLayer: SVGGElement;

  constructor(parent: HTMLElement, width = 1200, height = 900) {
    this.svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
    this.svg.setAttribute('id', 'canvas');
    this.svg.setAttribute('width', String(width));
    this.svg.setAttribute('height', String(height));
    this.svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
    this.lineLayer = el('g', { id: 'layer-lines' }) as SVGGElement;
    this.spriteLayer = el('g', { id: 'layer-sprites' }) as SVGGElement;
    this.previewLayer = el('g', { id: 'layer-preview' }) as SVGGElement;
    this.overlayLayer = el('g', { id: 'layer-overlay' }) as SVGGElement;
    this.svg.append(this.lineLayer, this.spriteLayer, this.previewLayer,
                    this.overlayLayer);
    parent.appendChild(this.svg);
  }

  /** Canvas coordinates of a mouse event (identity under jsdom). */
  eventPoint(event: MouseEvent): [number, number] {
    const rect = this.svg.getBoundingClientRect();
    return [event.clientX - rect.left, event.clientY - rect.top];
  }

  render(state: EditorState): void {
    this.renderLines(state);
    this.renderSprites(state);
  }

  private renderSprites(state: EditorState): void {
    this.spriteLayer.replaceChildren();
    for (const component of state.components.values()) {
      this.spriteLayer.appendChild(this.sprite(component, state.selection));
    }
  }

  private renderLines(state: EditorState): void {
    this.lineLayer.replaceChildren();
    for (const line of state.lines.values()) {
      this.lineLayer.appendChild(this.lineElement(line, state.selection));
    }
  }

  private sprite(component: ComponentPayload, selection: number | null): SVGElement {
    const group = el('g', {
      class: `component${selection === component.id ? ' selected' : ''}`,
      'data-id': component.id,
      'data-kind': component.kind,
    });
    const { x, y } = component.placement;
    if (component.kind === 'busbar' && component.bar) {
      const [[x1, y1], [x2, y2]] = component.bar;
      group.appendChild(el('rect', {
        class: 'bar',
        'data-id': component.id,
        x: Math.min(x1, x2) - (x1 === x2 ? BAR_HALF : 0),
        y: Math.min(y1, y2) - (y1 === y2 ? BAR_HALF : 0),
        width: x1 === x2 ? 2 * BAR_HALF : Math.abs(x2 - x1),
        height: y1 === y2 ? 2 * BAR_HALF : Math.abs(y2 - y1),
      }));
    } else {
      group.appendChild(el('rect', {
        class: 'body',
        x: x - 14, y: y - 14, width: 28, height: 28,
        transform: `rotate(${component.placement.rotation} ${x} ${y})`,
      }));
      const label = el('text', { class: 'kind-label', x, y });
      label.textContent = KIND_LETTER[component.kind] ?? '?';
      group.appendChild(label);
    }
    component.ports.forEach(([px, py], index) => {
      group.appendChild(el('rect', {
        class: 'port',
        'data-component': component.id,
        'data-port': index,
        x: px - PORT_HALF, y: py - PORT_HALF,
        width: 2 * PORT_HALF, height: 2 * PORT_HALF,
      }));
    });
    return group;
  }

  private lineElement(line: LinePayload, selection: number | null): SVGElement {
    return el('polyline', {
      class: `line${line.spec.is_connecting ? ' connecting' : ''}`
        + `${selection === line.id ? ' selected' : ''}`,
      'data-id': line.id,
      points: routePolylinePoints(line.route),
      fill: 'none',
    });
  }

  showPreview(route: number[][]): void {
    this.previewLayer.replaceChildren();
    if (route.length === 0) return;
    this.previewLayer.appendChild(el('polyline', {
      id: 'line-preview',
      points: routePolylinePoints(route),
      fill: 'none',
    }));
  }

  clearPreview(): void {
    this.previewLayer.replaceChildren();
  }

  /** Replace all overlay labels atomically from a solve response. */
  renderOverlay(state: EditorState,
                overlay: Record<string, Record<string, unknown>> | null): void {
    this.overlayLayer.replaceChildren();
    if (!overlay) return;
    for (const [idText, values] of Object.entries(overlay)) {
      const id = Number(idText);
      const text = overlayLabel(values);
      if (!text) continue;
      const anchor = this.labelAnchor(state, id);
      if (!anchor) continue;
      const label = el('text', {
        class: 'overlay-label',
        'data-id': id,
        x: anchor[0] + 8,
        y: anchor[1] - 8,
      });
      label.textContent = text;
      this.overlayLayer.appendChild(label);
    }
  }

  clearOverlay(): void {
    this.overlayLayer.replaceChildren();
  }

  private labelAnchor(state: EditorState, id: number): [number, number] | null {
    const component = state.components.get(id);
    if (component) {
      return [component.placement.x, component.placement.y];
    }
    const line = state.lines.get(id);
    if (line && line.route.length > 0) {
      const mid = line.route[Math.floor(line.route.length / 2)]!;
      return [(mid[0]! + mid[2]!) / 2, (mid[1]! + mid[3]!) / 2];
    }
    return null;
  }
}
