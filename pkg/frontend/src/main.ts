import { ApiClient } from './api.js';
import { App } from './app.js';
import './style.css';

const root = document.querySelector<HTMLElement>('#app');
if (root === null) {
  throw new Error('missing #app mount point');
}
void new App(root, new ApiClient('')).init();
