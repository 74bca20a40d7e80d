// Wire types for the /api endpoints.  Field names match the server's
// JSON exactly; the UI renders these values verbatim and computes
// nothing from them.

export type NodeStatus =
  | 'alive'
  | 'removed_this_phase'
  | 'alive_and_generated_this_phase'
  | 'generated_this_phase';

export interface ServerStatus {
  loaded: boolean;
  source_name?: string;
  content_hash?: string;
  ingested_at?: string;
  node_count?: number;
  phase_count?: number;
  instruction_count?: number;
}

export interface Phase {
  phase_id: number;
  name: string;
  ordinal: number;
  func_id_start: number | null;
  func_id_end: number | null;
}

export interface SnapshotNode {
  node_id: number;
  address: string;
  effective_opcode: string;
  mnemonic: string;
  current_value: string | null;
  status: NodeStatus;
}

export interface SnapshotEdge {
  src: number;
  dst: number;
  multiplicity: number;
}

export interface Anomaly {
  instr_id: number;
  src: number;
  dst: number;
}

export interface Snapshot {
  phase: number;
  nodes: SnapshotNode[];
  edges: SnapshotEdge[];
  anomalies: Anomaly[];
}

export interface SummaryRow {
  phase_id: number;
  name: string;
  generated: number;
  removed: number;
  opcode_updates: number;
  value_updates: number;
  edge_adds: number;
  edge_removes: number;
  edge_replaces: number;
}

export interface Summary {
  phases: SummaryRow[];
}

export interface OpcodeChange {
  node_id: number;
  old: string;
  new: string;
}

export interface ValueAppend {
  node_id: number;
  value: string;
}

export interface Diff {
  from_phase: number;
  to_phase: number;
  nodes_added: number[];
  nodes_removed: number[];
  opcode_changed: OpcodeChange[];
  edges_added: SnapshotEdge[];
  edges_removed: SnapshotEdge[];
  values_appended: ValueAppend[];
}

export interface ValueChange {
  instr_id: number;
  value: string;
}

export interface EdgeChange {
  instr_id: number;
  action: string;
  dst: number;
  old_dst: number | null;
}

export interface LastAccess {
  instr_id: number;
  func_id: number;
  symbol: string;
  phase_id: number;
  phase_name: string;
}

export interface NodeDetail {
  node_id: number;
  address: string;
  initial_opcode: string;
  mnemonic: string;
  alive: boolean;
  phase: number;
  present: boolean;
  effective_opcode: string | null;
  current_value: string | null;
  status: NodeStatus | null;
  created_phase: number;
  removed_phase: number | null;
  value_changes: ValueChange[];
  edge_changes: EdgeChange[];
  last_access: LastAccess | null;
}

export interface Issue {
  severity: string;
  code: string;
  locator: string;
  message: string;
}

export interface UploadResult {
  loaded: boolean;
  source_name: string;
  content_hash: string;
  ingested_at: string;
  node_count: number;
  phase_count: number;
  instruction_count: number;
  warnings: Issue[];
}

export interface ErrorBody {
  error: { code: string; message: string };
  issues?: Issue[];
}
