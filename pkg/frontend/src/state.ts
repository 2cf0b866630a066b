/** Single store behind the dashboard.
 *
 * The store holds nothing the service did not say: campaign summaries,
 * slices, recommendations, and the revision last seen all come back from
 * endpoints verbatim, and every mutation re-fetches the summary so the
 * page re-renders from authoritative state. The only local additions are
 * presentation flags (busy, banner, per-field errors).
 */

import {
  Api,
  ApiError,
  CampaignSummary,
  CreateCampaignRequest,
  ParetoResult,
  Recommendation,
  SliceResult,
} from "./api.js";

export const CONFLICT_MESSAGE = "campaign changed elsewhere, reload";

export interface Banner {
  kind: "none" | "conflict" | "error";
  message: string;
}

export interface ViewState {
  campaign: CampaignSummary | null;
  /** Revision echoed by the last successful call; the view shows a refresh
   * banner whenever the server reports it moved. */
  revision: number | null;
  slice: SliceResult | null;
  sliceDim: number;
  sliceObjective: number;
  recommendation: Recommendation | null;
  pareto: ParetoResult | null;
  banner: Banner;
  fieldErrors: Record<string, string>;
  busy: boolean;
}

const INITIAL: ViewState = {
  campaign: null,
  revision: null,
  slice: null,
  sliceDim: 0,
  sliceObjective: 0,
  recommendation: null,
  pareto: null,
  banner: { kind: "none", message: "" },
  fieldErrors: {},
  busy: false,
};

/** "rows[0].yield: expected a number" -> {yield: "expected a number"}.
 * Service validation messages always lead with the offending field path. */
export function fieldErrorsFromMessage(message: string): Record<string, string> {
  const match = /^([A-Za-z0-9_.[\]]+): (.*)$/.exec(message);
  if (match === null) {
    return {};
  }
  const path = match[1].replace(/^rows\[\d+\]\./, "");
  return { [path]: match[2] };
}

export interface PendingRowView {
  point: number[];
  outputs: string[];
}

export interface PendingView {
  inputColumns: string[];
  outputColumns: string[];
  rows: PendingRowView[];
}

/** Table the DOM layer renders for suggested-but-unmeasured settings. */
export function pendingView(campaign: CampaignSummary): PendingView {
  return {
    inputColumns: campaign.space.variables.map((v) => v.name),
    outputColumns: campaign.output_names,
    rows: campaign.pending.map((point) => ({
      point: [...point],
      outputs: campaign.output_names.map(() => ""),
    })),
  };
}

export type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = INITIAL;
  private readonly listeners = new Set<Listener>();

  constructor(private readonly api: Api) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private set(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Re-notify listeners without changing server state; the DOM layer
   * uses it when only presentation drafts changed. */
  refreshView(): void {
    this.set({});
  }

  private fail(exc: unknown): void {
    if (exc instanceof ApiError) {
      if (exc.code === "conflict") {
        this.set({ banner: { kind: "conflict", message: CONFLICT_MESSAGE } });
        return;
      }
      if (exc.code === "validation" || exc.code === "parse" || exc.code === "schema") {
        const fields = fieldErrorsFromMessage(exc.message);
        if (Object.keys(fields).length > 0) {
          this.set({ fieldErrors: { ...this.state.fieldErrors, ...fields } });
          return;
        }
      }
      this.set({ banner: { kind: "error", message: exc.message } });
      return;
    }
    const message = exc instanceof Error ? exc.message : String(exc);
    this.set({ banner: { kind: "error", message } });
  }

  private async run<T>(work: () => Promise<T>): Promise<T | null> {
    this.set({ busy: true, banner: { kind: "none", message: "" }, fieldErrors: {} });
    try {
      return await work();
    } catch (exc) {
      this.fail(exc);
      return null;
    } finally {
      this.set({ busy: false });
    }
  }

  /** Pull the authoritative summary and everything derived from it. */
  private async sync(id: string): Promise<void> {
    const reply = await this.api.getCampaign(id);
    this.set({ campaign: reply.data, revision: reply.revision });
    await this.refreshDerived();
  }

  private async refreshDerived(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null) {
      this.set({ slice: null, recommendation: null, pareto: null });
      return;
    }
    await Promise.all([
      this.loadSlice(),
      this.loadRecommendation(),
      this.loadPareto(),
    ]);
  }

  private async loadSlice(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null || campaign.n < 2) {
      this.set({ slice: null });
      return;
    }
    try {
      const reply = await this.api.slice(campaign.id, {
        dim: this.state.sliceDim,
        points: 120,
        objective: this.state.sliceObjective,
      });
      this.set({ slice: reply.data });
    } catch (exc) {
      if (exc instanceof ApiError && exc.code === "insufficient_data") {
        this.set({ slice: null });
        return;
      }
      throw exc;
    }
  }

  private async loadRecommendation(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null || campaign.n === 0) {
      this.set({ recommendation: null });
      return;
    }
    const reply = await this.api.recommend(campaign.id);
    this.set({ recommendation: reply.data });
  }

  private async loadPareto(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null || campaign.objectives.length < 2 || campaign.n === 0) {
      this.set({ pareto: null });
      return;
    }
    const reply = await this.api.pareto(campaign.id);
    this.set({ pareto: reply.data });
  }

  async createCampaign(req: CreateCampaignRequest): Promise<boolean> {
    const done = await this.run(async () => {
      const reply = await this.api.createCampaign(req);
      this.set({
        campaign: reply.data,
        revision: reply.revision,
        slice: null,
        sliceDim: 0,
        sliceObjective: 0,
        recommendation: null,
        pareto: null,
      });
      return true;
    });
    return done === true;
  }

  async openCampaign(id: string): Promise<boolean> {
    const done = await this.run(async () => {
      await this.sync(id);
      return true;
    });
    return done === true;
  }

  /** Re-fetch after an external change; clears the conflict banner. */
  async refresh(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null) {
      return;
    }
    await this.run(() => this.sync(campaign.id));
  }

  async suggest(q: number, strategy?: string): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null) {
      return;
    }
    await this.run(async () => {
      await this.api.ask(campaign.id, strategy === undefined ? { q } : { q, strategy });
      await this.sync(campaign.id);
    });
  }

  /** Record one measured row. Values arrive as strings straight from the
   * form; anything non-numeric becomes a per-field error without a round
   * trip, mirroring what the service would answer. */
  async submitRow(values: Record<string, string | number>): Promise<boolean> {
    const campaign = this.state.campaign;
    if (campaign === null) {
      return false;
    }
    const columns = [
      ...campaign.space.variables.map((v) => v.name),
      ...campaign.output_names,
    ];
    const row: Record<string, number> = {};
    const fieldErrors: Record<string, string> = {};
    for (const name of columns) {
      const raw = values[name];
      const value = typeof raw === "number" ? raw : Number(raw);
      if (raw === undefined || raw === "" || !Number.isFinite(value)) {
        fieldErrors[name] = "expected a number";
      } else {
        row[name] = value;
      }
    }
    if (Object.keys(fieldErrors).length > 0) {
      this.set({ fieldErrors });
      return false;
    }
    const done = await this.run(async () => {
      await this.api.tell(campaign.id, [row], {
        revision: this.state.revision ?? campaign.revision,
      });
      await this.sync(campaign.id);
      return true;
    });
    return done === true;
  }

  async selectDimension(dim: number): Promise<void> {
    this.set({ sliceDim: dim });
    await this.run(() => this.loadSlice());
  }

  async selectObjective(objective: number): Promise<void> {
    this.set({ sliceObjective: objective });
    await this.run(() => this.loadSlice());
  }
}
