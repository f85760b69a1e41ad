/** Shared UI state with last-write-wins fetch sequencing.
 *
 * Panels subscribe to state changes; every fetch issued on behalf of a
 * panel takes a sequence number, and responses arriving for a superseded
 * sequence are discarded, so slow responses can never clobber newer ones.
 */

export interface UiState {
  selectedFrame: string | null;
  colorFeature: string;
  mapColorFeature: string;
  brushedFips: string | null;
  sortKey: string | null;
  sortDir: "asc" | "desc";
}

export type Listener = (state: UiState, changed: Set<keyof UiState>) => void;

export class Store {
  private state: UiState = {
    selectedFrame: null,
    colorFeature: "sentiment",
    mapColorFeature: "leaning",
    brushedFips: null,
    sortKey: null,
    sortDir: "desc",
  };
  private listeners: Listener[] = [];
  private sequences = new Map<string, number>();
  private knownFrames = new Set<string>();
  private knownFips = new Set<string>();

  get current(): UiState {
    return { ...this.state };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  setKnownFrames(names: Iterable<string>): void {
    this.knownFrames = new Set(names);
  }

  setKnownFips(fips: Iterable<string>): void {
    this.knownFips = new Set(fips);
  }

  /** Take the next sequence number for a named fetch channel. */
  nextSequence(channel: string): number {
    const next = (this.sequences.get(channel) ?? 0) + 1;
    this.sequences.set(channel, next);
    return next;
  }

  /** True when `seq` is still the latest issued for the channel. */
  isCurrent(channel: string, seq: number): boolean {
    return this.sequences.get(channel) === seq;
  }

  selectFrame(name: string | null): void {
    if (name !== null && this.knownFrames.size && !this.knownFrames.has(name)) {
      return; // invariant: selected frame is one of the 12 or none
    }
    if (name === this.state.selectedFrame) return;
    this.update({ selectedFrame: name });
  }

  brushFips(fips: string | null): void {
    if (fips !== null && this.knownFips.size && !this.knownFips.has(fips)) {
      return; // invariant: brushed fips must exist in the loaded county list
    }
    if (fips === this.state.brushedFips) return;
    this.update({ brushedFips: fips });
  }

  setSort(key: string | null, dir: "asc" | "desc"): void {
    this.update({ sortKey: key, sortDir: dir });
  }

  toggleSort(key: string): void {
    if (this.state.sortKey === key) {
      this.update({ sortDir: this.state.sortDir === "asc" ? "desc" : "asc" });
    } else {
      this.update({ sortKey: key, sortDir: "desc" });
    }
  }

  setColorFeature(feature: string): void {
    this.update({ colorFeature: feature });
  }

  setMapColorFeature(feature: string): void {
    this.update({ mapColorFeature: feature });
  }

  private update(patch: Partial<UiState>): void {
    const changed = new Set<keyof UiState>();
    for (const key of Object.keys(patch) as (keyof UiState)[]) {
      if (this.state[key] !== patch[key]) changed.add(key);
    }
    if (!changed.size) return;
    this.state = { ...this.state, ...patch };
    const snapshot = this.current;
    for (const listener of [...this.listeners]) listener(snapshot, changed);
  }
}
