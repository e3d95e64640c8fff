/** Wire types for the /v1 service.
 *
 * These mirror the JSON the service exchanges; the editor never derives
 * domain facts from them, it only displays and mutates. Unknown fields
 * are carried through untouched, which is why every shape keeps an index
 * signature.
 */

export interface KernelPorts {
  stream: number;
  cascade: number;
  dma: number;
  [extra: string]: unknown;
}

export interface KernelData {
  source_ref: string;
  in_ports: KernelPorts;
  out_ports: KernelPorts;
  cycles_per_invocation: number;
  local_mem_bytes: number;
  [extra: string]: unknown;
}

export interface PortWrapperData {
  mode: string;
  serves: string;
  plio_ports: number;
  reuse_factor: number;
  [extra: string]: unknown;
}

export interface CcData {
  expr: string;
  kernel?: string;
  stage_kernels?: string[];
  dca_kernel?: string;
  [extra: string]: unknown;
}

export interface PstData {
  dacs: PortWrapperData[];
  cc: CcData;
  dccs: PortWrapperData[];
  [extra: string]: unknown;
}

export interface PuData {
  name: string;
  psts: PstData[];
  [extra: string]: unknown;
}

export interface DuData {
  name: string;
  amc: { mode: string; [extra: string]: unknown } | null;
  tpc: { mode: string; [extra: string]: unknown };
  ssc: { sender_mode: string; receiver_mode: string; [extra: string]: unknown };
  onchip_buffer_bytes: number;
  [extra: string]: unknown;
}

export interface DesignDocument {
  format_version: string;
  kernels: Record<string, KernelData>;
  pus: PuData[];
  dus: DuData[];
  pairings: Record<string, string[]>;
  [extra: string]: unknown;
}

export interface Diagnostic {
  code: string;
  path: string;
  message: string;
  severity: "error" | "warning";
}

export interface ResourceData {
  aie_cores_used: number;
  plio_in_used: number;
  plio_out_used: number;
  uram_bytes_used: number;
  aie_core_fraction: number;
  plio_in_fraction: number;
  plio_out_fraction: number;
  uram_fraction: number;
  over_budget: string[];
}

export interface ValidationResponse {
  deployable: boolean;
  diagnostics: Diagnostic[];
  resource: ResourceData;
  summary: string;
}

export interface WorkloadBody {
  app: string;
  size: string;
}

export interface SimulateRequest {
  design: DesignDocument;
  workload: WorkloadBody;
  platform?: Record<string, number>;
  cost_model?: Record<string, unknown>;
}

/** One trace event: [start_ps, duration_ps, resource, phase, pair]. */
export type TraceRow = [number, number, string, string, string];

export interface SimResponse {
  total_time_s: number;
  tasks_per_sec: number;
  ops_per_sec: number | null;
  iterations: number;
  tasks_done: number;
  phases: Record<string, number>;
  busy_fraction: Record<string, number>;
  trace: TraceRow[];
}

export interface GenerateResponse {
  files: Record<string, string>;
  signature: string;
}

export interface KernelListing {
  kernels: { name: string; revision: string; [extra: string]: unknown }[];
}

export interface ProblemPayload {
  code: string;
  message: string;
  location: string;
  diagnostics?: Diagnostic[];
}
