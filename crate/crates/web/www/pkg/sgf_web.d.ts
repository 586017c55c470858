/* tslint:disable */
/* eslint-disable */

/**
 * A model trained in the page on synthetic samples.
 */
export class Session {
    free(): void;
    [Symbol.dispose](): void;
    classify(_class: number, index: number, noise: number): string;
    constructor(seed: number);
    train(per_class: number, noise: number): string;
}

export function classes(): string[];

export function cost(target: string): string;

export function preview(_class: number, seed: number, noise: number, unit: string): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_session_free: (a: number, b: number) => void;
    readonly classes: () => [number, number];
    readonly cost: (a: number, b: number) => [number, number, number, number];
    readonly preview: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly session_classify: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly session_new: (a: number) => [number, number, number];
    readonly session_train: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
