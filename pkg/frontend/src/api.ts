// Thin typed client over the workbench service. Every mutation returns the
// server's delta so callers can mirror state without a full reload.

import {
  ApiError,
  Catalog,
  ComponentPayload,
  EditDelta,
  EndpointPayload,
  Method,
  Mode,
  ProjectSnapshot,
  SolveResponse,
  Violation,
} from './types.js';

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { 'content-type': 'application/json' },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    const code = typeof body?.error === 'string' ? body.error : `HTTP${response.status}`;
    const message = typeof body?.message === 'string' ? body.message : url;
    throw new ApiError(response.status, code, message);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base: string) {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  catalog(): Promise<Catalog> {
    return request(this.url('/api/catalog'));
  }

  createProject(mode: Mode): Promise<{ project_id: string; mode: Mode }> {
    return request(this.url('/api/projects'), {
      method: 'POST',
      body: JSON.stringify({ mode }),
    });
  }

  snapshot(projectId: string): Promise<ProjectSnapshot> {
    return request(this.url(`/api/projects/${projectId}`));
  }

  addComponent(
    projectId: string,
    kind: string,
    placement: { x: number; y: number; rotation?: number },
    properties?: Record<string, string>,
  ): Promise<EditDelta> {
    return request(this.url(`/api/projects/${projectId}/components`), {
      method: 'POST',
      body: JSON.stringify({ kind, placement, properties }),
    });
  }

  getComponent(projectId: string, id: number): Promise<{ component: ComponentPayload }> {
    return request(this.url(`/api/projects/${projectId}/components/${id}`));
  }

  editProperties(
    projectId: string,
    id: number,
    properties: Record<string, string>,
  ): Promise<{ component: ComponentPayload }> {
    return request(this.url(`/api/projects/${projectId}/components/${id}`), {
      method: 'PATCH',
      body: JSON.stringify({ properties }),
    });
  }

  deleteComponent(projectId: string, id: number): Promise<{ removed: number[] }> {
    return request(this.url(`/api/projects/${projectId}/components/${id}`), {
      method: 'DELETE',
    });
  }

  moveComponent(projectId: string, id: number, x: number, y: number): Promise<EditDelta> {
    return request(this.url(`/api/projects/${projectId}/components/${id}/move`), {
      method: 'POST',
      body: JSON.stringify({ x, y }),
    });
  }

  rotateComponent(projectId: string, id: number): Promise<EditDelta> {
    return request(this.url(`/api/projects/${projectId}/components/${id}/rotate`), {
      method: 'POST',
      body: JSON.stringify({}),
    });
  }

  copyComponent(projectId: string, id: number, x: number, y: number): Promise<EditDelta> {
    return request(this.url(`/api/projects/${projectId}/components/${id}/copy`), {
      method: 'POST',
      body: JSON.stringify({ x, y }),
    });
  }

  addLine(
    projectId: string,
    a: EndpointPayload,
    b: EndpointPayload,
    properties?: Record<string, string>,
  ): Promise<EditDelta> {
    return request(this.url(`/api/projects/${projectId}/lines`), {
      method: 'POST',
      body: JSON.stringify({ a, b, properties }),
    });
  }

  validate(projectId: string): Promise<{ violations: Violation[] }> {
    return request(this.url(`/api/projects/${projectId}/validate`), {
      method: 'POST',
      body: JSON.stringify({}),
    });
  }

  solve(projectId: string, method?: Method): Promise<SolveResponse> {
    return request(this.url(`/api/projects/${projectId}/solve`), {
      method: 'POST',
      body: JSON.stringify(method ? { method } : {}),
    });
  }
}
