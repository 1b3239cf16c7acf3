/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[lo_0, hi_0, lo_1, hi_1]`.
     */
    bounds(): Float64Array;
    /**
     * Current dispersion estimate, 0 before the first sample.
     */
    dispersion(): number;
    /**
     * Adds `count` samples with cascade updates; returns the new total.
     */
    grow(count: number): number;
    /**
     * `game` is `"fence"` or `"chauffeur"`.
     */
    constructor(game: string, seed: bigint);
    /**
     * Outcome code of every node of a `res × res` lattice over the domain,
     * row 0 at the top.
     */
    outcomes(res: number, dt: number, t_max: number): Uint8Array;
    /**
     * Sample coordinates, `x0, y0, x1, y1, …`.
     */
    points(): Float64Array;
    /**
     * Interpolated values on a `width × height` raster, row 0 at the top.
     */
    raster(width: number, height: number): Float32Array;
    samples(): number;
    /**
     * Both players follow the current field from `(x, y)`. Returns the path
     * `x0, y0, x1, y1, …` followed by the outcome code (0 capture, 1 escape,
     * 2 timeout).
     */
    trajectory(x: number, y: number, dt: number, t_max: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_bounds: (a: number) => [number, number];
    readonly demo_dispersion: (a: number) => number;
    readonly demo_grow: (a: number, b: number) => [number, number, number];
    readonly demo_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly demo_outcomes: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_points: (a: number) => [number, number];
    readonly demo_raster: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_samples: (a: number) => number;
    readonly demo_trajectory: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
