import { ApiClient, ApiError } from './api.js';
import { GraphView } from './graph.js';
import type { LayoutPoint } from './layout.js';
import { layoutSnapshot } from './layout.js';
import {
  ControlPanel,
  IssuesPanel,
  NodeDetailPanel,
  OverviewPanel,
  StatusBar,
} from './panels.js';
import type { Action, ViewState } from './state.js';
import { initialState, reduce, tickMillis } from './state.js';
import type { Phase, SummaryRow } from './types.js';

const LAYOUT_WIDTH = 1200;
const LAYOUT_HEIGHT = 800;

/**
 * The controller: owns the ViewState, talks to the API, and pushes
 * data into the graph and panels.  All mutation goes through
 * `dispatch`, and every fetch carries a sequence number so a stale
 * response (a superseded phase selection) can never overwrite a newer
 * one.
 */
export class App {
  readonly api: ApiClient;
  private stateValue: ViewState | null = null;
  private phases: Phase[] = [];
  private phaseIds: number[] = [];
  private summaryRows = new Map<number, SummaryRow>();
  /** Cumulative node positions; revisiting a phase reuses them. */
  private positions = new Map<number, LayoutPoint>();
  private pins = new Map<number, LayoutPoint>();
  private searchMatches: ReadonlySet<number> | null = null;

  private readonly graph: GraphView;
  private readonly statusBar: StatusBar;
  private readonly issues: IssuesPanel;
  private readonly overview: OverviewPanel;
  private readonly detail: NodeDetailPanel;
  private readonly controls: ControlPanel;

  private snapshotSeq = 0;
  private searchSeq = 0;
  private detailSeq = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, api: ApiClient) {
    this.api = api;

    const statusEl = document.createElement('div');
    const issuesEl = document.createElement('div');
    const main = document.createElement('div');
    main.className = 'main';
    const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
    svg.setAttribute('viewBox', `0 0 ${LAYOUT_WIDTH} ${LAYOUT_HEIGHT}`);
    const side = document.createElement('aside');
    side.className = 'side';
    const overviewEl = document.createElement('section');
    const detailEl = document.createElement('section');
    side.append(overviewEl, detailEl);
    main.append(svg, side);
    const controlsEl = document.createElement('div');
    root.replaceChildren(statusEl, issuesEl, main, controlsEl);

    this.statusBar = new StatusBar(statusEl);
    this.issues = new IssuesPanel(issuesEl);
    this.overview = new OverviewPanel(overviewEl);
    this.detail = new NodeDetailPanel(detailEl);
    this.graph = new GraphView(svg, {
      onNodeClick: (id) => void this.dispatch({ kind: 'select_node', node: id }),
      onNodeHide: (id) =>
        void this.dispatch({ kind: 'toggle_node_hidden', node: id }),
      onNodePinned: (id, at) => this.pin(id, at),
    });
    this.controls = new ControlPanel(controlsEl, {
      onSelectPhase: (phase) =>
        void this.dispatch({ kind: 'select_phase', phase }),
      onPlay: () => void this.dispatch({ kind: 'play', direction: 'forward' }),
      onPause: () => void this.dispatch({ kind: 'pause' }),
      onStepForward: () => void this.dispatch({ kind: 'step_forward' }),
      onStepBackward: () => void this.dispatch({ kind: 'step_backward' }),
      onFastForward: () => void this.dispatch({ kind: 'fast_forward' }),
      onFastBackward: () => void this.dispatch({ kind: 'fast_backward' }),
      onSearch: (query) => void this.search(query),
      onUpload: (file) => void this.upload(file),
      onClearHidden: () => void this.dispatch({ kind: 'clear_hidden' }),
    });
    this.detail.clear();
  }

  get state(): ViewState | null {
    return this.stateValue;
  }

  async init(): Promise<void> {
    try {
      const status = await this.api.status();
      this.statusBar.render(status);
      if (status.loaded) {
        await this.loadDataset();
      }
    } catch (error) {
      this.statusBar.error(describe(error));
    }
  }

  /** Fetch phase list and summary, then show the first phase. */
  private async loadDataset(): Promise<void> {
    this.phases = await this.api.phases();
    this.phaseIds = this.phases.map((p) => p.phase_id);
    const summary = await this.api.summary();
    this.summaryRows = new Map(summary.phases.map((r) => [r.phase_id, r]));
    this.positions = new Map();
    this.pins = new Map();
    this.searchMatches = null;
    this.stateValue = initialState(this.phaseIds[0]);
    this.controls.setPhases(this.phases, this.stateValue.currentPhase);
    this.detail.clear();
    await this.renderPhase();
  }

  /**
   * Fold an action into the state and carry out whatever it implies:
   * a re-render on phase change, a detail fetch on selection change,
   * timer upkeep on playback changes.
   */
  async dispatch(action: Action): Promise<void> {
    if (this.stateValue === null) {
      return;
    }
    const before = this.stateValue;
    this.stateValue = reduce(before, this.phaseIds, action);
    const after = this.stateValue;

    this.syncTimer();
    const work: Promise<void>[] = [];
    if (after.currentPhase !== before.currentPhase) {
      this.controls.setPhase(after.currentPhase);
      work.push(this.renderPhase());
    }
    if (after.selectedNode !== before.selectedNode) {
      work.push(this.showDetail(after.selectedNode));
    }
    if (
      after.hiddenNodes !== before.hiddenNodes ||
      after.hiddenEdges !== before.hiddenEdges
    ) {
      this.graph.applyVisibility(after);
    }
    await Promise.all(work);
  }

  private syncTimer(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    const state = this.stateValue;
    if (state !== null && state.playing) {
      this.timer = setInterval(() => {
        void this.dispatch({ kind: 'tick' });
      }, tickMillis(state));
    }
  }

  private async renderPhase(): Promise<void> {
    const state = this.stateValue;
    if (state === null) {
      return;
    }
    const seq = ++this.snapshotSeq;
    const snapshot = await this.api.snapshot(state.currentPhase);
    if (seq !== this.snapshotSeq) {
      return; // superseded by a newer selection
    }
    const placed = layoutSnapshot(
      snapshot.nodes,
      snapshot.edges,
      this.positions,
      this.pins,
      { width: LAYOUT_WIDTH, height: LAYOUT_HEIGHT },
    );
    for (const [id, at] of placed) {
      this.positions.set(id, at);
    }
    const row = this.summaryRows.get(state.currentPhase);
    if (row !== undefined) {
      this.overview.render(row);
    }
    this.graph.render(snapshot, this.positions, {
      hiddenNodes: state.hiddenNodes,
      hiddenEdges: state.hiddenEdges,
      searchMatches: null,
    });
    await this.refreshSearch();
  }

  /** Re-run the active query against the current phase. */
  private async refreshSearch(): Promise<void> {
    const state = this.stateValue;
    if (state === null) {
      return;
    }
    const seq = ++this.searchSeq;
    if (state.searchQuery === '') {
      this.searchMatches = null;
      this.graph.applySearch(null);
      return;
    }
    const ids = await this.api.search(state.searchQuery, state.currentPhase);
    if (seq !== this.searchSeq) {
      return;
    }
    this.searchMatches = new Set(ids);
    this.graph.applySearch(this.searchMatches);
  }

  async search(query: string): Promise<void> {
    await this.dispatch({ kind: 'set_search', query });
    await this.refreshSearch();
  }

  private async showDetail(node: number | null): Promise<void> {
    const state = this.stateValue;
    if (state === null || node === null) {
      this.detail.clear();
      return;
    }
    const seq = ++this.detailSeq;
    const payload = await this.api.node(node, state.currentPhase);
    if (seq === this.detailSeq) {
      this.detail.render(payload);
    }
  }

  private pin(id: number, at: LayoutPoint): void {
    this.pins.set(id, at);
    this.positions.set(id, at);
  }

  async upload(file: File): Promise<void> {
    try {
      const body = await file.text();
      const result = await this.api.upload(body, file.name);
      this.issues.render(result.warnings);
      this.statusBar.render(result);
      await this.loadDataset();
    } catch (error) {
      if (error instanceof ApiError) {
        this.issues.render(error.issues);
        this.statusBar.error(`upload rejected: ${error.message}`);
      } else {
        this.statusBar.error(describe(error));
      }
    }
  }

  destroy(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
