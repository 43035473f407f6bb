/* tslint:disable */
/* eslint-disable */

/**
 * Heralded outcome-0 state of a closed, ideal cat run.
 */
export class CatDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly axis_p: Float64Array;
    readonly axis_x: Float64Array;
    readonly beta_im: number;
    readonly beta_re: number;
    /**
     * Uhlmann fidelity with the even cat.
     */
    readonly fidelity: number;
    readonly p0: number;
    readonly truncation_warning: boolean;
    /**
     * Row-major, one row per `p` value.
     */
    readonly wigner: Float64Array;
}

export function cat(flux_on: number, cycles: number, n_m: number, points: number): CatDemo;

export function couplings(asym: number, b_field_t: number, points: number, compensate: boolean): Float64Array;

export function g_eff_hz(flux: number): number;

export function trajectory(flux: number, cycles: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_catdemo_free: (a: number, b: number) => void;
    readonly cat: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly catdemo_axis_p: (a: number) => [number, number];
    readonly catdemo_axis_x: (a: number) => [number, number];
    readonly catdemo_beta_im: (a: number) => number;
    readonly catdemo_beta_re: (a: number) => number;
    readonly catdemo_fidelity: (a: number) => number;
    readonly catdemo_p0: (a: number) => number;
    readonly catdemo_truncation_warning: (a: number) => number;
    readonly catdemo_wigner: (a: number) => [number, number];
    readonly couplings: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly g_eff_hz: (a: number) => [number, number, number];
    readonly trajectory: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
