// Payload shapes of the twin API. The console displays these verbatim and
// performs no simulation math of its own.

export type DamageState = "intact" | "damaged" | "collapsed";
export type InfraStatus = "up" | "down";
export type Layer = "buildings" | "water" | "electricity" | "telecom" | "gas";

export const INFRA_LAYERS: Exclude<Layer, "buildings">[] = [
  "water",
  "electricity",
  "telecom",
  "gas",
];

export interface NodePayload {
  id: string;
  lat: number;
  lon: number;
}

export interface EdgePayload {
  id: string;
  a: string;
  b: string;
  length_m: number;
  passable: boolean;
}

export interface BuildingPayload {
  id: string;
  node_ref: string;
  lat: number;
  lon: number;
  occupancy: number;
  damage: DamageState;
  trapped: number;
  saved: number;
}

export interface TeamPayload {
  team_id: string;
  kind: string;
}

export interface CenterPayload {
  id: string;
  node_ref: string;
  lat: number;
  lon: number;
  teams: TeamPayload[];
}

export interface InfraAssetPayload {
  id: string;
  node_ref: string;
  lat: number;
  lon: number;
  status: InfraStatus;
}

export interface ReportMarkerPayload {
  zone: string;
  count: number;
}

export interface StatePayload {
  query_t: number;
  t: number;
  pre_disaster: boolean;
  horizon_s: number;
  mode: "education" | "estimating";
  nodes: NodePayload[];
  edges: EdgePayload[];
  buildings: BuildingPayload[];
  rescue_centers: CenterPayload[];
  teams: Record<string, { at: string; busy_until: number }>;
  infrastructure: Record<string, InfraAssetPayload[]>;
  reports: ReportMarkerPayload[];
}

export interface RoutePayload {
  nodes: string[];
  edges: string[];
  cost: number;
  hops: number;
}

export interface AssignmentPayload {
  team_id: string;
  building_id: string;
  depart: number;
  route: RoutePayload;
}

export interface PlanOfferPayload {
  plan_id: string;
  assignments: AssignmentPayload[];
  success_rate: number;
  total_saved: number;
  total_route_cost_m: number;
}

export interface PlansResponse {
  mode: string;
  plans: PlanOfferPayload[];
  report: OutcomeReportPayload | null;
}

export interface DecisionLogEntry {
  team_id: string;
  building_id: string;
  depart: number;
  travel_s: number;
  t_done: number;
  route_cost_m: number;
  trapped: number;
  saved: number;
}

export interface OutcomeReportPayload {
  scenario: { epicenter: number[]; magnitude: number; seed: number; origin_time: number };
  plan: string;
  total_trapped: number;
  total_saved: number;
  casualties: number;
  buildings: Record<DamageState, number>;
  infra: Record<string, { up: number; down: number }>;
  decisions_log: DecisionLogEntry[];
  success_rate: number;
}
