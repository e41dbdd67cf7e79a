// Pure scene construction: StatePayload + view options in, drawable scene
// out. Rendering the same inputs twice must produce deep-equal scenes —
// that property is what the tests diff. No DOM, no canvas, no fetches.

import { Layer, StatePayload } from "./types.js";

// Okabe-Ito palette: the three damage states stay distinguishable for
// colorblind viewers.
export const DAMAGE_COLORS: Record<string, string> = {
  intact: "#0072B2",
  damaged: "#E69F00",
  collapsed: "#D55E00",
};
export const CENTER_COLOR = "#009E73";
export const INFRA_COLORS: Record<string, string> = { up: "#009E73", down: "#CC79A7" };
export const ROAD_COLORS: Record<string, string> = { open: "#8a8a8a", blocked: "#CC79A7" };

export interface SceneMarker {
  id: string; // city entity id, exactly one marker per entity
  kind: "building" | "center" | "infra";
  x: number;
  y: number;
  radius: number;
  color: string;
  shape: "circle" | "star" | "square";
  label: string;
}

export interface SceneLine {
  id: string; // edge id
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: string;
  dashed: boolean;
}

export interface Scene {
  width: number;
  height: number;
  t: number;
  preDisaster: boolean;
  layer: Layer;
  lines: SceneLine[];
  markers: SceneMarker[];
}

export interface ViewOptions {
  layer: Layer;
  width?: number;
  height?: number;
}

interface Projector {
  (lat: number, lon: number): { x: number; y: number };
}

function makeProjector(state: StatePayload, width: number, height: number): Projector {
  const lats = state.nodes.map((n) => n.lat);
  const lons = state.nodes.map((n) => n.lon);
  const minLat = Math.min(...lats);
  const maxLat = Math.max(...lats);
  const minLon = Math.min(...lons);
  const maxLon = Math.max(...lons);
  const pad = 24;
  const spanLat = Math.max(maxLat - minLat, 1e-9);
  const spanLon = Math.max(maxLon - minLon, 1e-9);
  return (lat, lon) => ({
    x: pad + ((lon - minLon) / spanLon) * (width - 2 * pad),
    // screen y grows downward; latitude grows upward
    y: height - pad - ((lat - minLat) / spanLat) * (height - 2 * pad),
  });
}

export function buildScene(state: StatePayload, view: ViewOptions): Scene {
  const width = view.width ?? 800;
  const height = view.height ?? 640;
  const project = makeProjector(state, width, height);
  const nodeAt = new Map(state.nodes.map((n) => [n.id, project(n.lat, n.lon)]));

  const lines: SceneLine[] = state.edges.map((e) => {
    const a = nodeAt.get(e.a)!;
    const b = nodeAt.get(e.b)!;
    return {
      id: e.id,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      color: e.passable ? ROAD_COLORS.open : ROAD_COLORS.blocked,
      dashed: !e.passable,
    };
  });

  const markers: SceneMarker[] = [];
  for (const b of state.buildings) {
    const p = project(b.lat, b.lon);
    markers.push({
      id: b.id,
      kind: "building",
      x: p.x,
      y: p.y,
      radius: 7,
      color: DAMAGE_COLORS[b.damage],
      shape: "circle",
      label: `${b.id}: ${b.damage}, trapped ${b.trapped}, saved ${b.saved}`,
    });
  }
  for (const c of state.rescue_centers) {
    const p = project(c.lat, c.lon);
    markers.push({
      id: c.id,
      kind: "center",
      x: p.x,
      y: p.y,
      radius: 9,
      color: CENTER_COLOR,
      shape: "star",
      label: `${c.id}: ${c.teams.length} team(s)`,
    });
  }
  if (view.layer !== "buildings") {
    for (const asset of state.infrastructure[view.layer] ?? []) {
      const p = project(asset.lat, asset.lon);
      markers.push({
        id: asset.id,
        kind: "infra",
        x: p.x,
        y: p.y,
        radius: 5,
        color: INFRA_COLORS[asset.status],
        shape: "square",
        label: `${asset.id} (${view.layer}): ${asset.status}`,
      });
    }
  }

  return {
    width,
    height,
    t: state.t,
    preDisaster: state.pre_disaster,
    layer: view.layer,
    lines,
    markers,
  };
}

/** Topmost marker within picking distance of scene coordinates, if any. */
export function hitTest(scene: Scene, x: number, y: number): SceneMarker | null {
  for (let i = scene.markers.length - 1; i >= 0; i--) {
    const m = scene.markers[i];
    const dx = m.x - x;
    const dy = m.y - y;
    if (dx * dx + dy * dy <= (m.radius + 4) * (m.radius + 4)) return m;
  }
  return null;
}
