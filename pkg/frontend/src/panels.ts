import type {
  Issue,
  NodeDetail,
  Phase,
  ServerStatus,
  SummaryRow,
} from './types.js';

// Panels are plain DOM writers.  Every count and flag they show is a
// field of an API payload rendered verbatim; the data-field attributes
// exist so tests can walk the displayed values.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function field(
  dl: HTMLDListElement,
  label: string,
  name: string,
  value: string,
): void {
  dl.append(el('dt', undefined, label));
  const dd = el('dd', undefined, value);
  dd.dataset.field = name;
  dl.append(dd);
}

const OVERVIEW_COUNTS: ReadonlyArray<[string, keyof SummaryRow]> = [
  ['generated', 'generated'],
  ['removed', 'removed'],
  ['opcode updates', 'opcode_updates'],
  ['value updates', 'value_updates'],
  ['edges added', 'edge_adds'],
  ['edges removed', 'edge_removes'],
  ['edges replaced', 'edge_replaces'],
];

/** Per-phase activity counts for the current phase. */
export class OverviewPanel {
  constructor(private readonly root: HTMLElement) {
    this.root.classList.add('overview');
  }

  render(row: SummaryRow): void {
    this.root.replaceChildren();
    this.root.append(el('h2', undefined, `phase ${row.phase_id}: ${row.name}`));
    const dl = el('dl');
    for (const [label, key] of OVERVIEW_COUNTS) {
      field(dl, label, key, String(row[key]));
    }
    this.root.append(dl);
  }
}

/** Everything the API says about one node at the current phase. */
export class NodeDetailPanel {
  constructor(private readonly root: HTMLElement) {
    this.root.classList.add('node-detail');
  }

  clear(message = 'click a node'): void {
    this.root.replaceChildren(el('p', 'placeholder', message));
  }

  render(detail: NodeDetail): void {
    this.root.replaceChildren();
    this.root.append(el('h2', undefined, `node ${detail.node_id}`));
    const dl = el('dl');
    field(dl, 'address', 'address', detail.address);
    field(dl, 'opcode', 'effective_opcode', detail.effective_opcode ?? '');
    field(dl, 'mnemonic', 'mnemonic', detail.mnemonic);
    field(dl, 'value', 'current_value', detail.current_value ?? '');
    field(dl, 'status', 'status', detail.status ?? 'absent');
    field(
      dl,
      'generated this phase',
      'generated_this_phase',
      detail.status === 'alive_and_generated_this_phase' ||
        detail.status === 'generated_this_phase'
        ? 'yes'
        : 'no',
    );
    field(dl, 'created phase', 'created_phase', String(detail.created_phase));
    field(
      dl,
      'removed phase',
      'removed_phase',
      detail.removed_phase === null ? '' : String(detail.removed_phase),
    );
    this.root.append(dl);

    const values = el('ul', 'value-changes');
    for (const change of detail.value_changes) {
      values.append(
        el('li', undefined, `instr ${change.instr_id}: ${change.value}`),
      );
    }
    this.root.append(el('h3', undefined, 'value changes'), values);

    const edges = el('ul', 'edge-changes');
    for (const change of detail.edge_changes) {
      const target =
        change.old_dst === null
          ? `-> ${change.dst}`
          : `${change.old_dst} -> ${change.dst}`;
      edges.append(
        el('li', undefined, `instr ${change.instr_id}: ${change.action} ${target}`),
      );
    }
    this.root.append(el('h3', undefined, 'edge changes'), edges);

    const last = el('p', 'last-access');
    last.dataset.field = 'last_access';
    last.textContent =
      detail.last_access === null
        ? 'never accessed'
        : `${detail.last_access.symbol} ` +
          `(instr ${detail.last_access.instr_id}, ` +
          `phase ${detail.last_access.phase_name})`;
    this.root.append(el('h3', undefined, 'last access'), last);
  }
}

export interface ControlHandlers {
  onSelectPhase: (phase: number) => void;
  onPlay: () => void;
  onPause: () => void;
  onStepForward: () => void;
  onStepBackward: () => void;
  onFastForward: () => void;
  onFastBackward: () => void;
  onSearch: (query: string) => void;
  onUpload: (file: File) => void;
  onClearHidden: () => void;
}

type PlaybackKey =
  | 'onPlay'
  | 'onPause'
  | 'onStepForward'
  | 'onStepBackward'
  | 'onFastForward'
  | 'onFastBackward';

const BUTTONS: ReadonlyArray<[string, string, PlaybackKey]> = [
  ['fast-backward', '<<', 'onFastBackward'],
  ['step-backward', '|<', 'onStepBackward'],
  ['play', 'play', 'onPlay'],
  ['pause', 'pause', 'onPause'],
  ['step-forward', '>|', 'onStepForward'],
  ['fast-forward', '>>', 'onFastForward'],
];

/** Bottom control strip: phase picker, playback, search, upload. */
export class ControlPanel {
  private phaseSelect: HTMLSelectElement;
  private searchBox: HTMLInputElement;

  constructor(
    private readonly root: HTMLElement,
    handlers: ControlHandlers,
  ) {
    this.root.classList.add('controls');

    this.phaseSelect = el('select');
    this.phaseSelect.dataset.field = 'phase';
    this.phaseSelect.addEventListener('change', () => {
      handlers.onSelectPhase(Number(this.phaseSelect.value));
    });
    this.root.append(this.phaseSelect);

    for (const [name, label, handler] of BUTTONS) {
      const button = el('button', `playback ${name}`, label);
      button.dataset.action = name;
      button.addEventListener('click', () => handlers[handler]());
      this.root.append(button);
    }

    this.searchBox = el('input');
    this.searchBox.type = 'search';
    this.searchBox.placeholder = 'search opcode, mnemonic, value, address';
    this.searchBox.addEventListener('input', () => {
      handlers.onSearch(this.searchBox.value);
    });
    this.root.append(this.searchBox);

    const reveal = el('button', 'clear-hidden', 'reveal hidden');
    reveal.addEventListener('click', () => handlers.onClearHidden());
    this.root.append(reveal);

    const upload = el('input');
    upload.type = 'file';
    upload.accept = 'application/json,.json';
    upload.addEventListener('change', () => {
      const file = upload.files?.[0];
      if (file) {
        handlers.onUpload(file);
        upload.value = '';
      }
    });
    this.root.append(upload);
  }

  setPhases(phases: readonly Phase[], current: number): void {
    this.phaseSelect.replaceChildren();
    for (const phase of phases) {
      const option = el('option', undefined, `${phase.ordinal}: ${phase.name}`);
      option.value = String(phase.phase_id);
      this.phaseSelect.append(option);
    }
    this.setPhase(current);
  }

  setPhase(phase: number): void {
    this.phaseSelect.value = String(phase);
  }
}

/** Header line: dataset identity, or an invitation to upload. */
export class StatusBar {
  constructor(private readonly root: HTMLElement) {
    this.root.classList.add('status-bar');
  }

  render(status: ServerStatus): void {
    if (!status.loaded) {
      this.root.textContent = 'no dataset loaded; upload a trace to begin';
      return;
    }
    this.root.textContent =
      `${status.source_name}: ${status.node_count} nodes, ` +
      `${status.phase_count} phases, ` +
      `${status.instruction_count} instructions`;
  }

  error(message: string): void {
    this.root.textContent = message;
  }
}

/** Validation issues from a rejected upload, shown verbatim. */
export class IssuesPanel {
  constructor(private readonly root: HTMLElement) {
    this.root.classList.add('issues');
  }

  clear(): void {
    this.root.replaceChildren();
  }

  render(issues: readonly Issue[]): void {
    this.root.replaceChildren();
    if (issues.length === 0) {
      return;
    }
    const list = el('ul');
    for (const issue of issues) {
      list.append(
        el(
          'li',
          `issue ${issue.severity.toLowerCase()}`,
          `${issue.severity} ${issue.code} ${issue.locator}: ${issue.message}`,
        ),
      );
    }
    this.root.append(list);
  }
}
