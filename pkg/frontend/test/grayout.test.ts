// The gray-out property: searching changes opacity/highlight classes
// and nothing else.  The graph keeps every element, so the filtered
// view preserves context.

import { afterEach, beforeEach, describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api.js';
import { App } from '../src/app.js';
import { MockApi, settle } from './mock_api.js';

let mock: MockApi;
let app: App;
let root: HTMLElement;
let svg: SVGSVGElement;

beforeEach(async () => {
  mock = new MockApi().routeCurated().install();
  mock.route('/api/search?q=add&phase=1', [2]);
  mock.route('/api/search?q=zzz&phase=1', []);
  root = document.createElement('div');
  document.body.append(root);
  app = new App(root, new ApiClient(''));
  await app.init();
  await app.dispatch({ kind: 'select_phase', phase: 1 });
  await settle();
  svg = root.querySelector('svg')!;
});

afterEach(() => {
  app.destroy();
  root.remove();
  mock.restore();
});

/** Everything about the scene except class attributes. */
function skeleton(): string[] {
  return [...svg.querySelectorAll('*')].map((element) => {
    const attrs = [...element.attributes]
      .filter((a) => a.name !== 'class')
      .map((a) => `${a.name}=${a.value}`)
      .sort()
      .join(' ');
    return `${element.tagName} ${attrs} ${element.childElementCount}`;
  });
}

function classesByNode(): Map<string, string> {
  const out = new Map<string, string>();
  for (const g of svg.querySelectorAll('g.node')) {
    out.set(g.getAttribute('data-node-id')!, g.getAttribute('class')!);
  }
  return out;
}

describe('search gray-out', () => {
  it('changes only classes, never the element set', async () => {
    const before = skeleton();
    const count = svg.querySelectorAll('*').length;

    await app.search('add');
    await settle();

    expect(svg.querySelectorAll('*').length).toBe(count);
    expect(skeleton()).toEqual(before);
  });

  it('marks matches .hit and everything else .dim', async () => {
    await app.search('add');
    await settle();

    for (const [id, cls] of classesByNode()) {
      if (id === '2') {
        expect(cls).toContain('hit');
        expect(cls).not.toContain('dim');
      } else {
        expect(cls).toContain('dim');
        expect(cls).not.toContain('hit');
      }
    }
    // Edges not connecting two matches are dimmed too.
    for (const line of svg.querySelectorAll('line.edge')) {
      expect(line.getAttribute('class')).toContain('dim');
    }
  });

  it('clearing the query restores every node', async () => {
    await app.search('add');
    await settle();
    await app.search('');
    await settle();

    for (const cls of classesByNode().values()) {
      expect(cls).not.toContain('dim');
      expect(cls).not.toContain('hit');
    }
    expect(svg.querySelectorAll('.dim')).toHaveLength(0);
  });

  it('a search with no matches dims the whole graph but removes nothing', async () => {
    const count = svg.querySelectorAll('*').length;
    await app.search('zzz');
    await settle();

    expect(svg.querySelectorAll('*').length).toBe(count);
    for (const cls of classesByNode().values()) {
      expect(cls).toContain('dim');
    }
  });

  it('hiding a node is also class-only', async () => {
    const count = svg.querySelectorAll('*').length;
    await app.dispatch({ kind: 'toggle_node_hidden', node: 9 });
    await settle();

    expect(svg.querySelectorAll('*').length).toBe(count);
    const node9 = svg.querySelector('g.node[data-node-id="9"]')!;
    expect(node9.getAttribute('class')).toContain('hidden');

    await app.dispatch({ kind: 'clear_hidden' });
    expect(svg.querySelectorAll('.hidden')).toHaveLength(0);
  });
});
