import { drag } from 'd3-drag';
import { select } from 'd3-selection';
import type { Selection } from 'd3-selection';
import { edgeKey } from './state.js';
import type { LayoutPoint } from './layout.js';
import type { Snapshot, SnapshotEdge, SnapshotNode } from './types.js';

export interface GraphCallbacks {
  onNodeClick: (id: number) => void;
  /** Context action on a node: hide it. */
  onNodeHide: (id: number) => void;
  /** Drag finished: pin the node where it was dropped. */
  onNodePinned: (id: number, at: LayoutPoint) => void;
}

export interface RenderView {
  hiddenNodes: ReadonlySet<number>;
  hiddenEdges: ReadonlySet<string>;
  /** null: no active search.  Otherwise the matched node ids. */
  searchMatches: ReadonlySet<number> | null;
}

/** Above this many rendered nodes, labels only show on hover. */
export const DEGRADED_THRESHOLD = 1500;

const STATUS_CLASS: Record<string, string> = {
  alive: 'alive',
  removed_this_phase: 'ghost',
  alive_and_generated_this_phase: 'generated',
  generated_this_phase: 'ephemeral',
};

const NODE_RADIUS = 14;

/**
 * SVG node-link view of one snapshot.  Rendering is a keyed data join:
 * node identity is node_id, edge identity is "src->dst".  Search and
 * visibility are pure class toggles; they never add or remove
 * elements, so the graph keeps its context while filtering.
 */
export class GraphView {
  private readonly svg: Selection<SVGSVGElement, unknown, null, undefined>;
  private readonly edgeLayer: Selection<SVGGElement, unknown, null, undefined>;
  private readonly nodeLayer: Selection<SVGGElement, unknown, null, undefined>;
  private lastOpcode = new Map<number, string>();
  private renderedNodes: SnapshotNode[] = [];

  constructor(
    svgElement: SVGSVGElement,
    private readonly callbacks: GraphCallbacks,
  ) {
    this.svg = select(svgElement).classed('graph', true);
    this.edgeLayer = this.svg.append('g').attr('class', 'edges');
    this.nodeLayer = this.svg.append('g').attr('class', 'nodes');
  }

  nodeCount(): number {
    return this.renderedNodes.length;
  }

  render(
    snapshot: Snapshot,
    layout: ReadonlyMap<number, LayoutPoint>,
    view: RenderView,
  ): void {
    this.renderedNodes = snapshot.nodes;
    this.svg.classed('degraded', snapshot.nodes.length > DEGRADED_THRESHOLD);

    const at = (id: number): LayoutPoint => layout.get(id) ?? { x: 0, y: 0 };

    this.edgeLayer
      .selectAll<SVGLineElement, SnapshotEdge>('line.edge')
      .data(snapshot.edges, (e) => edgeKey(e.src, e.dst))
      .join('line')
      .attr('class', 'edge')
      .attr('data-edge', (e) => edgeKey(e.src, e.dst))
      .attr('stroke-width', (e) => Math.min(1 + e.multiplicity, 5))
      .attr('x1', (e) => at(e.src).x)
      .attr('y1', (e) => at(e.src).y)
      .attr('x2', (e) => at(e.dst).x)
      .attr('y2', (e) => at(e.dst).y);

    const flash = new Set<number>();
    const entering = new Set<number>();
    for (const n of snapshot.nodes) {
      const before = this.lastOpcode.get(n.node_id);
      if (before === undefined) {
        entering.add(n.node_id);
      } else if (before !== n.effective_opcode) {
        flash.add(n.node_id);
      }
    }
    this.lastOpcode = new Map(
      snapshot.nodes.map((n) => [n.node_id, n.effective_opcode]),
    );

    const groups = this.nodeLayer
      .selectAll<SVGGElement, SnapshotNode>('g.node')
      .data(snapshot.nodes, (n) => String(n.node_id))
      .join((enter) => {
        const g = enter.append('g');
        g.append('circle').attr('r', NODE_RADIUS);
        g.append('text').attr('class', 'label').attr('dy', NODE_RADIUS + 12);
        g.append('title');
        g.on('click', (_event, n) => this.callbacks.onNodeClick(n.node_id));
        g.on('contextmenu', (event, n) => {
          event.preventDefault();
          this.callbacks.onNodeHide(n.node_id);
        });
        return g;
      })
      .attr('data-node-id', (n) => String(n.node_id))
      .attr(
        'transform',
        (n) => `translate(${at(n.node_id).x},${at(n.node_id).y})`,
      )
      .attr('class', (n) => {
        const parts = ['node', STATUS_CLASS[n.status] ?? 'alive'];
        if (entering.has(n.node_id)) {
          parts.push('enter');
        }
        if (flash.has(n.node_id)) {
          parts.push('opchanged');
        }
        return parts.join(' ');
      });
    groups.select<SVGTextElement>('text.label').text((n) => n.effective_opcode);
    groups.select<SVGTitleElement>('title').text((n) => n.mnemonic);

    groups.call(
      drag<SVGGElement, SnapshotNode>()
        .on('drag', (event, n) => {
          select<SVGGElement, SnapshotNode>(event.sourceEvent.target.closest('g.node'))
            .attr('transform', `translate(${event.x},${event.y})`);
          this.moveEdges(n.node_id, { x: event.x, y: event.y });
        })
        .on('end', (event, n) => {
          this.callbacks.onNodePinned(n.node_id, { x: event.x, y: event.y });
        }),
    );

    this.applyVisibility(view);
    this.applySearch(view.searchMatches);
  }

  private moveEdges(id: number, to: LayoutPoint): void {
    this.edgeLayer
      .selectAll<SVGLineElement, SnapshotEdge>('line.edge')
      .filter((e) => e.src === id)
      .attr('x1', to.x)
      .attr('y1', to.y);
    this.edgeLayer
      .selectAll<SVGLineElement, SnapshotEdge>('line.edge')
      .filter((e) => e.dst === id)
      .attr('x2', to.x)
      .attr('y2', to.y);
  }

  /** Class-only visibility pass; element set stays fixed. */
  applyVisibility(view: Pick<RenderView, 'hiddenNodes' | 'hiddenEdges'>): void {
    this.nodeLayer
      .selectAll<SVGGElement, SnapshotNode>('g.node')
      .classed('hidden', (n) => view.hiddenNodes.has(n.node_id));
    this.edgeLayer
      .selectAll<SVGLineElement, SnapshotEdge>('line.edge')
      .classed(
        'hidden',
        (e) =>
          view.hiddenEdges.has(edgeKey(e.src, e.dst)) ||
          view.hiddenNodes.has(e.src) ||
          view.hiddenNodes.has(e.dst),
      );
  }

  /**
   * Class-only search pass: matches get .hit, everything else .dim.
   * Passing null clears both.  Never touches the element set.
   */
  applySearch(matches: ReadonlySet<number> | null): void {
    this.nodeLayer
      .selectAll<SVGGElement, SnapshotNode>('g.node')
      .classed('hit', (n) => matches !== null && matches.has(n.node_id))
      .classed('dim', (n) => matches !== null && !matches.has(n.node_id));
    this.edgeLayer
      .selectAll<SVGLineElement, SnapshotEdge>('line.edge')
      .classed(
        'dim',
        (e) =>
          matches !== null && !(matches.has(e.src) && matches.has(e.dst)),
      );
  }
}
