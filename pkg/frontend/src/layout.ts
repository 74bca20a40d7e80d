import {
  forceCollide,
  forceLink,
  forceManyBody,
  forceSimulation,
  forceX,
  forceY,
} from 'd3-force';
import { randomLcg } from 'd3-random';
import type { SnapshotEdge, SnapshotNode } from './types.js';

export interface LayoutPoint {
  x: number;
  y: number;
}

export interface LayoutOptions {
  width: number;
  height: number;
  /** Simulation ticks; fixed so identical inputs give identical output. */
  iterations?: number;
}

interface SimNode extends LayoutPoint {
  id: number;
  fx?: number | null;
  fy?: number | null;
}

// d3 rewrites link endpoints from ids to node objects in place.
interface SimLink {
  source: number | SimNode;
  target: number | SimNode;
}

const GOLDEN_ANGLE = Math.PI * (3 - Math.sqrt(5));
const LCG_SEED = 0.6180339887;

/**
 * Deterministic first position for a node never seen before: a
 * phyllotaxis spiral indexed by node id, so a given id always starts
 * at the same spot regardless of what else is on screen.
 */
export function seedPosition(
  id: number,
  width: number,
  height: number,
): LayoutPoint {
  const radius = 12 * Math.sqrt(id + 1);
  const angle = id * GOLDEN_ANGLE;
  return {
    x: width / 2 + radius * Math.cos(angle),
    y: height / 2 + radius * Math.sin(angle),
  };
}

/**
 * Lay out one snapshot.  Nodes present in `previous` keep exactly the
 * position they had (phase transitions read as evolution, not
 * re-layout); only newcomers relax around them.  `pins` are positions
 * the user chose by dragging and always win.
 */
export function layoutSnapshot(
  nodes: readonly SnapshotNode[],
  edges: readonly SnapshotEdge[],
  previous: ReadonlyMap<number, LayoutPoint>,
  pins: ReadonlyMap<number, LayoutPoint>,
  options: LayoutOptions,
): Map<number, LayoutPoint> {
  const { width, height } = options;
  const iterations = options.iterations ?? 120;

  const sim: SimNode[] = nodes.map((n) => {
    const pin = pins.get(n.node_id);
    const kept = pin ?? previous.get(n.node_id);
    const start = kept ?? seedPosition(n.node_id, width, height);
    return {
      id: n.node_id,
      x: start.x,
      y: start.y,
      fx: kept ? start.x : null,
      fy: kept ? start.y : null,
    };
  });

  const ids = new Set(sim.map((n) => n.id));
  const links: SimLink[] = edges
    .filter((e) => ids.has(e.src) && ids.has(e.dst) && e.src !== e.dst)
    .map((e) => ({ source: e.src, target: e.dst }));

  const simulation = forceSimulation(sim)
    .randomSource(randomLcg(LCG_SEED))
    .force('charge', forceManyBody().strength(-60))
    .force('collide', forceCollide(18))
    .force(
      'link',
      forceLink<SimNode, SimLink>(links)
        .id((n) => n.id)
        .distance(70)
        .strength(0.4),
    )
    .force('x', forceX(width / 2).strength(0.03))
    .force('y', forceY(height / 2).strength(0.03))
    .stop();

  simulation.tick(iterations);

  const out = new Map<number, LayoutPoint>();
  for (const n of sim) {
    out.set(n.id, { x: n.x, y: n.y });
  }
  return out;
}
