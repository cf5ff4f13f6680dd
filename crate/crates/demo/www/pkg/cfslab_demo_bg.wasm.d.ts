/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_pairreport_free: (a: number, b: number) => void;
export const dyson_errors: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const pairreport_im: (a: number) => [number, number];
export const pairreport_lagrangian: (a: number) => number;
export const pairreport_re: (a: number) => [number, number];
export const pairreport_spacelike: (a: number) => number;
export const random_pair: (a: number, b: number, c: number, d: number) => [number, number, number];
export const vacuum_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
