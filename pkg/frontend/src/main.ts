import { bootstrap } from './app.js';

declare global {
  interface Window {
    BEV_API_BASE?: string;
  }
}

document.addEventListener('DOMContentLoaded', () => {
  bootstrap(document, window.BEV_API_BASE ?? '');
});
