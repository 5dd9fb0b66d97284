export interface SeedSetJson {
  label: number;
  points: Array<[number, number]>;
}

export interface SeedsJson {
  sets: SeedSetJson[];
}

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
}

export type RunMode = "fb" | "tube";

export interface RunParams {
  alpha_f?: number;
  alpha_b?: number;
  beta_s?: number;
  beta_d?: number;
  sigma?: number;
  epsilon?: number;
}

export interface Progress {
  status: "idle" | "running" | "done" | "failed";
  accepted_count: number;
  total: number;
  error?: string;
}

export interface ContourJson {
  label: number;
  points: Array<[number, number]>;
  closed: boolean;
}

export interface ContoursJson {
  contours: ContourJson[];
}

export interface DistanceMap {
  width: number;
  height: number;
  values: Float32Array;
}
