// Pure view state.  Every control-panel gesture is an action folded
// into the state by `reduce`; nothing here touches the network or the
// DOM, which is what makes playback deterministic and replayable.

export type Direction = 'forward' | 'backward';

export interface ViewState {
  currentPhase: number;
  playing: boolean;
  direction: Direction;
  /** Base phases-per-second; fast playback multiplies this by 4. */
  speed: number;
  fast: boolean;
  selectedNode: number | null;
  searchQuery: string;
  hiddenNodes: ReadonlySet<number>;
  hiddenEdges: ReadonlySet<string>;
}

export type Action =
  | { kind: 'select_phase'; phase: number }
  | { kind: 'play'; direction: Direction }
  | { kind: 'pause' }
  | { kind: 'step_forward' }
  | { kind: 'step_backward' }
  | { kind: 'fast_forward' }
  | { kind: 'fast_backward' }
  | { kind: 'tick' }
  | { kind: 'set_search'; query: string }
  | { kind: 'select_node'; node: number | null }
  | { kind: 'toggle_node_hidden'; node: number }
  | { kind: 'toggle_edge_hidden'; src: number; dst: number }
  | { kind: 'clear_hidden' }
  | { kind: 'reset'; phase: number };

export const FAST_MULTIPLIER = 4;

export function edgeKey(src: number, dst: number): string {
  return `${src}->${dst}`;
}

export function initialState(phase: number): ViewState {
  return {
    currentPhase: phase,
    playing: false,
    direction: 'forward',
    speed: 1,
    fast: false,
    selectedNode: null,
    searchQuery: '',
    hiddenNodes: new Set(),
    hiddenEdges: new Set(),
  };
}

/** Interval between playback ticks, honoring the fast multiplier. */
export function tickMillis(state: ViewState): number {
  const rate = state.speed * (state.fast ? FAST_MULTIPLIER : 1);
  return 1000 / rate;
}

function ordinalOf(phases: readonly number[], phase: number): number {
  const i = phases.indexOf(phase);
  if (i < 0) {
    throw new Error(`phase ${phase} is not in the dataset`);
  }
  return i;
}

function atPhase(state: ViewState, phase: number): ViewState {
  if (phase === state.currentPhase) {
    return state;
  }
  // A phase change invalidates the selection; the node may not exist
  // there, and the detail panel is phase-scoped either way.
  return { ...state, currentPhase: phase, selectedNode: null };
}

function step(
  state: ViewState,
  phases: readonly number[],
  delta: 1 | -1,
): ViewState {
  const i = ordinalOf(phases, state.currentPhase) + delta;
  const clamped = Math.max(0, Math.min(phases.length - 1, i));
  return atPhase(state, phases[clamped]);
}

/**
 * Fold one action into the state.  `phases` is the dataset's phase id
 * list in ordinal order (pseudo-phase first when present); the current
 * phase is always a member of it.
 */
export function reduce(
  state: ViewState,
  phases: readonly number[],
  action: Action,
): ViewState {
  if (phases.length === 0) {
    throw new Error('cannot reduce with an empty phase list');
  }
  switch (action.kind) {
    case 'select_phase': {
      ordinalOf(phases, action.phase);
      return atPhase({ ...state, playing: false }, action.phase);
    }
    case 'play':
      return {
        ...state,
        playing: true,
        fast: false,
        direction: action.direction,
      };
    case 'pause':
      return { ...state, playing: false, fast: false };
    case 'step_forward':
      // Stepping while playing pauses first.
      return step({ ...state, playing: false, fast: false }, phases, 1);
    case 'step_backward':
      return step({ ...state, playing: false, fast: false }, phases, -1);
    case 'fast_forward':
      return { ...state, playing: true, fast: true, direction: 'forward' };
    case 'fast_backward':
      return { ...state, playing: true, fast: true, direction: 'backward' };
    case 'tick': {
      if (!state.playing) {
        return state;
      }
      const i = ordinalOf(phases, state.currentPhase);
      const j = i + (state.direction === 'forward' ? 1 : -1);
      if (j < 0 || j >= phases.length) {
        return { ...state, playing: false, fast: false };
      }
      return atPhase(state, phases[j]);
    }
    case 'set_search':
      return { ...state, searchQuery: action.query };
    case 'select_node':
      return { ...state, selectedNode: action.node };
    case 'toggle_node_hidden': {
      const hidden = new Set(state.hiddenNodes);
      if (!hidden.delete(action.node)) {
        hidden.add(action.node);
      }
      return { ...state, hiddenNodes: hidden };
    }
    case 'toggle_edge_hidden': {
      const key = edgeKey(action.src, action.dst);
      const hidden = new Set(state.hiddenEdges);
      if (!hidden.delete(key)) {
        hidden.add(key);
      }
      return { ...state, hiddenEdges: hidden };
    }
    case 'clear_hidden':
      return { ...state, hiddenNodes: new Set(), hiddenEdges: new Set() };
    case 'reset':
      return initialState(action.phase);
  }
}
