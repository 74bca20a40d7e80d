import { describe, expect, it } from 'vitest';
import type { Action, ViewState } from '../src/state.js';
import {
  FAST_MULTIPLIER,
  initialState,
  reduce,
  tickMillis,
} from '../src/state.js';

// Curated dataset: pseudo-phase then three real phases, in ordinal
// order.  Ordinal == index into this list.
const PHASES = [-1, 0, 1, 2] as const;

function run(state: ViewState, actions: Action[]): ViewState {
  return actions.reduce((s, a) => reduce(s, PHASES, a), state);
}

describe('playback semantics', () => {
  it('play does not move until a tick arrives', () => {
    const s = run(initialState(0), [{ kind: 'play', direction: 'forward' }]);
    expect(s.playing).toBe(true);
    expect(s.currentPhase).toBe(0);
  });

  it('ticks walk phases in ordinal order', () => {
    let s = run(initialState(-1), [{ kind: 'play', direction: 'forward' }]);
    const seen = [s.currentPhase];
    for (let i = 0; i < 3; i += 1) {
      s = reduce(s, PHASES, { kind: 'tick' });
      seen.push(s.currentPhase);
    }
    expect(seen).toEqual([-1, 0, 1, 2]);
  });

  it('a tick at the boundary pauses instead of wrapping', () => {
    let s = run(initialState(2), [{ kind: 'play', direction: 'forward' }]);
    s = reduce(s, PHASES, { kind: 'tick' });
    expect(s.currentPhase).toBe(2);
    expect(s.playing).toBe(false);
  });

  it('backward playback pauses at the pseudo-phase', () => {
    let s = run(initialState(0), [{ kind: 'play', direction: 'backward' }]);
    s = reduce(s, PHASES, { kind: 'tick' });
    expect(s.currentPhase).toBe(-1);
    s = reduce(s, PHASES, { kind: 'tick' });
    expect(s.currentPhase).toBe(-1);
    expect(s.playing).toBe(false);
  });

  it('stepping while playing pauses first', () => {
    const s = run(initialState(0), [
      { kind: 'play', direction: 'forward' },
      { kind: 'step_forward' },
    ]);
    expect(s.playing).toBe(false);
    expect(s.currentPhase).toBe(1);
  });

  it('steps clamp at both ends', () => {
    expect(run(initialState(-1), [{ kind: 'step_backward' }]).currentPhase)
      .toBe(-1);
    expect(run(initialState(2), [{ kind: 'step_forward' }]).currentPhase)
      .toBe(2);
  });

  it('fast playback keeps direction and multiplies the rate', () => {
    const fast = run(initialState(0), [{ kind: 'fast_forward' }]);
    expect(fast.playing).toBe(true);
    expect(fast.fast).toBe(true);
    expect(fast.direction).toBe('forward');
    expect(tickMillis(fast)).toBe(1000 / FAST_MULTIPLIER);
    expect(tickMillis({ ...fast, fast: false })).toBe(1000);

    const back = run(fast, [{ kind: 'fast_backward' }]);
    expect(back.direction).toBe('backward');
  });

  it('selecting a phase stops playback and validates membership', () => {
    const s = run(initialState(-1), [
      { kind: 'play', direction: 'forward' },
      { kind: 'select_phase', phase: 2 },
    ]);
    expect(s).toMatchObject({ currentPhase: 2, playing: false });
    expect(() => reduce(s, PHASES, { kind: 'select_phase', phase: 7 }))
      .toThrow(/not in the dataset/);
  });

  it('a phase change drops the node selection', () => {
    const selected = run(initialState(1), [
      { kind: 'select_node', node: 4 },
    ]);
    expect(selected.selectedNode).toBe(4);
    const moved = reduce(selected, PHASES, { kind: 'step_forward' });
    expect(moved.selectedNode).toBeNull();
  });
});

describe('playback determinism', () => {
  // The scripted sequence of the release gate: play, two ticks, pause,
  // step back.  The landing ordinal is hand-computed per start phase:
  // two forward moves (clamped by the pause-at-end rule), then one
  // step back.
  const SCRIPT: Action[] = [
    { kind: 'play', direction: 'forward' },
    { kind: 'tick' },
    { kind: 'tick' },
    { kind: 'pause' },
    { kind: 'step_backward' },
  ];
  const LANDING: Record<number, number> = { [-1]: 0, 0: 1, 1: 1, 2: 1 };

  it.each(PHASES.map((p) => [p] as const))(
    'play, tick, tick, pause, step back from phase %d',
    (start) => {
      const final = run(initialState(start), SCRIPT);
      expect(final.currentPhase).toBe(LANDING[start]);
      expect(final.playing).toBe(false);
    },
  );

  it('replaying any action sequence gives the same final state', () => {
    // Tiny LCG so the sequences are fixed across runs.
    let x = 12345;
    const next = (n: number): number => {
      x = (x * 1103515245 + 12345) % 2147483648;
      return x % n;
    };
    const arb = (): Action => {
      switch (next(8)) {
        case 0:
          return { kind: 'select_phase', phase: PHASES[next(4)] };
        case 1:
          return { kind: 'play', direction: next(2) ? 'forward' : 'backward' };
        case 2:
          return { kind: 'pause' };
        case 3:
          return { kind: 'step_forward' };
        case 4:
          return { kind: 'step_backward' };
        case 5:
          return { kind: 'fast_forward' };
        case 6:
          return { kind: 'fast_backward' };
        default:
          return { kind: 'tick' };
      }
    };

    for (let round = 0; round < 50; round += 1) {
      const actions = Array.from({ length: 30 }, arb);
      const a = run(initialState(-1), actions);
      const b = run(initialState(-1), actions);
      expect(b.currentPhase).toBe(a.currentPhase);
      expect(b.playing).toBe(a.playing);
      expect(b.direction).toBe(a.direction);
      expect(b.fast).toBe(a.fast);
    }
  });
});

describe('search and visibility state', () => {
  it('search is plain state, not graph surgery', () => {
    const s = run(initialState(1), [{ kind: 'set_search', query: 'add' }]);
    expect(s.searchQuery).toBe('add');
    expect(run(s, [{ kind: 'set_search', query: '' }]).searchQuery).toBe('');
  });

  it('hidden sets toggle and survive phase changes until cleared', () => {
    let s = run(initialState(0), [
      { kind: 'toggle_node_hidden', node: 5 },
      { kind: 'toggle_edge_hidden', src: 2, dst: 0 },
      { kind: 'step_forward' },
    ]);
    expect(s.hiddenNodes.has(5)).toBe(true);
    expect(s.hiddenEdges.has('2->0')).toBe(true);
    s = run(s, [{ kind: 'toggle_node_hidden', node: 5 }]);
    expect(s.hiddenNodes.has(5)).toBe(false);
    s = run(s, [
      { kind: 'toggle_node_hidden', node: 7 },
      { kind: 'clear_hidden' },
    ]);
    expect(s.hiddenNodes.size).toBe(0);
    expect(s.hiddenEdges.size).toBe(0);
  });

  it('reduce never mutates its input', () => {
    const before = initialState(0);
    const frozen = JSON.stringify({
      ...before,
      hiddenNodes: [],
      hiddenEdges: [],
    });
    reduce(before, PHASES, { kind: 'toggle_node_hidden', node: 1 });
    reduce(before, PHASES, { kind: 'play', direction: 'forward' });
    expect(
      JSON.stringify({ ...before, hiddenNodes: [], hiddenEdges: [] }),
    ).toBe(frozen);
    expect(before.hiddenNodes.size).toBe(0);
  });
});
