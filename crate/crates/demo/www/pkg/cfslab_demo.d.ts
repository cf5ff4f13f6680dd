/* tslint:disable */
/* eslint-disable */

/**
 * Closed-chain spectrum and Lagrangian of a random pair of operator points.
 */
export class PairReport {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly im: Float64Array;
    readonly lagrangian: number;
    readonly re: Float64Array;
    readonly spacelike: boolean;
}

/**
 * Error of the Dyson series of orders 0..=max_order against the adaptive
 * integrator, for a random smooth family of `dim x dim` matrices.
 */
export function dyson_errors(seed: number, dim: number, strength: number, max_order: number): Float64Array;

export function random_pair(seed: number, dim: number, spin: number, max_modulus: number): PairReport;

/**
 * L(0, (t, x)) of the regularized 1+1 vacuum for each `t` in `times`.
 */
export function vacuum_profile(x: number, times: Float64Array, epsilon: number, points: number, extent: number, mass: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_pairreport_free: (a: number, b: number) => void;
    readonly dyson_errors: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly pairreport_im: (a: number) => [number, number];
    readonly pairreport_lagrangian: (a: number) => number;
    readonly pairreport_re: (a: number) => [number, number];
    readonly pairreport_spacelike: (a: number) => number;
    readonly random_pair: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly vacuum_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
