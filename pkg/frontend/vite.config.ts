/// <reference types="vitest" />
import { defineConfig } from 'vite';

export default defineConfig({
  server: {
    // Dev-mode convenience; production serves dist/ from the API server
    // itself, so same-origin needs no proxy.
    proxy: { '/api': 'http://127.0.0.1:8731' },
  },
  build: { outDir: 'dist' },
  test: {
    environment: 'jsdom',
  },
});
