// Browser bootstrap: point the editor at the local service and mount it.

import { ApiClient } from './api.js';
import { Editor } from './app.js';

declare global {
  interface Window {
    SLDKIT_API?: string;
    sldkitEditor?: unknown;
  }
}

const base = window.SLDKIT_API ?? 'http://127.0.0.1:8787';
const root = document.getElementById('app') ?? document.body;

Editor.create(root as HTMLElement, new ApiClient(base))
  .then((editor) => {
    window.sldkitEditor = editor;
  })
  .catch((error) => {
    const banner = document.createElement('div');
    banner.id = 'startup-error';
    banner.textContent = `cannot reach the workbench service: ${error}`;
    (root as HTMLElement).appendChild(banner);
  });
