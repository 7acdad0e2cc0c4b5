/* tslint:disable */
/* eslint-disable */

export function decode_set(family: string, param: number, set: string): string;

/**
 * All members inside `{1..n_max}` and the pairwise antichain check.
 */
export function enumerate(family: string, param: number, n_max: number): string;

/**
 * Per-level exact counts with `log2` densities for plotting.
 */
export function level_counts(family: string, param: number, n_max: number): string;

/**
 * Plan table `k, ℓ_k, a_k, s_k` with the Kraft-sum certificate.
 */
export function plan_report(family: string, param: number, n_max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly decode_set: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly enumerate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly level_counts: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly plan_report: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
