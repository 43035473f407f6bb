/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_catdemo_free: (a: number, b: number) => void;
export const cat: (a: number, b: number, c: number, d: number) => [number, number, number];
export const catdemo_axis_p: (a: number) => [number, number];
export const catdemo_axis_x: (a: number) => [number, number];
export const catdemo_beta_im: (a: number) => number;
export const catdemo_beta_re: (a: number) => number;
export const catdemo_fidelity: (a: number) => number;
export const catdemo_p0: (a: number) => number;
export const catdemo_truncation_warning: (a: number) => number;
export const catdemo_wigner: (a: number) => [number, number];
export const couplings: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const g_eff_hz: (a: number) => [number, number, number];
export const trajectory: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
