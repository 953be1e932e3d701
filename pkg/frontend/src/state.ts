/**
 * Session state and its pure transitions.
 *
 * The uploaded image is kept exactly as the base64 of the file bytes;
 * nothing client-side ever re-encodes or touches pixels. All preview
 * content comes back from the service.
 */

export type Mode = "single" | "interpolate" | "chain";

export interface ResultParams {
  label: string;
  tf: number[];
  ccm: number[];
}

export interface SessionState {
  imageB64: string | null;
  imageName: string | null;
  styles: string[];
  mode: Mode;
  style: string | null;
  styleA: string | null;
  styleB: string | null;
  t: number;
  chain: string[];
  result: { image: string; params: ResultParams | null } | null;
}

export function initialState(): SessionState {
  return {
    imageB64: null,
    imageName: null,
    styles: [],
    mode: "single",
    style: null,
    styleA: null,
    styleB: null,
    t: 0.5,
    chain: [],
    result: null,
  };
}

export function withStyles(state: SessionState, styles: string[]): SessionState {
  const pick = (current: string | null, fallbackIndex: number): string | null => {
    if (current !== null && styles.includes(current)) return current;
    return styles[Math.min(fallbackIndex, styles.length - 1)] ?? null;
  };
  return {
    ...state,
    styles: [...styles],
    style: pick(state.style, 0),
    styleA: pick(state.styleA, 0),
    styleB: pick(state.styleB, 1),
    chain: state.chain.filter((name) => styles.includes(name)),
  };
}

export function withImage(state: SessionState, imageB64: string, name: string): SessionState {
  return { ...state, imageB64, imageName: name, result: null };
}

export function withMode(state: SessionState, mode: Mode): SessionState {
  return { ...state, mode };
}

/** Clamp into [0, 1]; the slider contract never leaves that range. */
export function withT(state: SessionState, t: number): SessionState {
  const clamped = Number.isFinite(t) ? Math.min(1, Math.max(0, t)) : 0;
  return { ...state, t: clamped };
}

export function withStyle(state: SessionState, style: string): SessionState {
  return { ...state, style };
}

export function withEndpoints(state: SessionState, styleA: string, styleB: string): SessionState {
  return { ...state, styleA, styleB };
}

export function pushChain(state: SessionState, style: string): SessionState {
  return { ...state, chain: [...state.chain, style] };
}

export function removeChainAt(state: SessionState, index: number): SessionState {
  return { ...state, chain: state.chain.filter((_, i) => i !== index) };
}

export function withResult(
  state: SessionState,
  image: string,
  params: ResultParams | null,
): SessionState {
  return { ...state, result: { image, params } };
}

/** Reason the current state cannot be submitted, or null when ready. */
export function blockedReason(state: SessionState): string | null {
  if (state.imageB64 === null) return "load an image first";
  if (state.styles.length === 0) return "no styles available";
  switch (state.mode) {
    case "single":
      return state.style === null ? "pick a style" : null;
    case "interpolate":
      return state.styleA === null || state.styleB === null ? "pick both styles" : null;
    case "chain":
      return state.chain.length === 0 ? "chain is empty" : null;
  }
}
