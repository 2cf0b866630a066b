/** In-memory stand-in for the campaign service.
 *
 * Mirrors the wire contract the real service exposes: envelope-unwrapped
 * replies, revision bumps on every accepted mutation, 409-style conflict
 * errors carrying the current revision, per-field validation messages,
 * pending rows cleared by matching tells, and a slice whose band always
 * brackets its mean. No model fitting happens here; numbers are simple
 * deterministic functions so tests stay instant.
 */

import {
  Api,
  ApiError,
  AskOptions,
  AskResult,
  CampaignSummary,
  ConstraintDoc,
  CreateCampaignRequest,
  ObjectiveDoc,
  ParetoResult,
  Recommendation,
  Reply,
  SliceOptions,
  SliceResult,
  TellOptions,
  TellResult,
  VariableDoc,
} from "../src/api.js";

interface FakeCampaign {
  id: string;
  variables: Required<VariableDoc>[];
  output_names: string[];
  objectives: ObjectiveDoc[];
  constraints: ConstraintDoc[];
  points: number[][];
  outputs: number[][];
  pending: number[][];
  revision: number;
  seed: number;
  askCalls: number;
}

function feasible(campaign: FakeCampaign, row: number): boolean {
  for (const con of campaign.constraints) {
    const value = campaign.outputs[row][con.output_index];
    if (con.direction === "le" ? value > con.threshold : value < con.threshold) {
      return false;
    }
  }
  return true;
}

function bestSoFar(campaign: FakeCampaign): Array<number | null> {
  if (campaign.objectives.length > 1) {
    return campaign.points.map(() => null);
  }
  const spec = campaign.objectives[0];
  const sign = spec.sense === "minimize" ? -1 : 1;
  let best: number | null = null;
  const out: Array<number | null> = [];
  for (let i = 0; i < campaign.points.length; i += 1) {
    if (feasible(campaign, i)) {
      const value = campaign.outputs[i][spec.output_index];
      if (best === null || sign * value > sign * best) {
        best = value;
      }
    }
    out.push(best);
  }
  return out;
}

function bestRow(campaign: FakeCampaign): number | null {
  if (campaign.points.length === 0) {
    return null;
  }
  const spec = campaign.objectives[0];
  const sign = spec.sense === "minimize" ? -1 : 1;
  const rows = campaign.points.map((_, i) => i);
  const feasibleRows = rows.filter((i) => feasible(campaign, i));
  const pool = feasibleRows.length > 0 ? feasibleRows : rows;
  let best = pool[0];
  for (const i of pool) {
    if (
      sign * campaign.outputs[i][spec.output_index] >
      sign * campaign.outputs[best][spec.output_index]
    ) {
      best = i;
    }
  }
  return best;
}

function dominates(
  campaign: FakeCampaign,
  a: number,
  b: number,
): boolean {
  let strict = false;
  for (const spec of campaign.objectives) {
    const sign = spec.sense === "minimize" ? -1 : 1;
    const va = sign * campaign.outputs[a][spec.output_index];
    const vb = sign * campaign.outputs[b][spec.output_index];
    if (va < vb) {
      return false;
    }
    if (va > vb) {
      strict = true;
    }
  }
  return strict;
}

function paretoRows(campaign: FakeCampaign): number[] {
  const rows = campaign.points.map((_, i) => i);
  return rows.filter((i) => !rows.some((j) => j !== i && dominates(campaign, j, i)));
}

function summarize(campaign: FakeCampaign): CampaignSummary {
  const doc: CampaignSummary = {
    id: campaign.id,
    space: { variables: campaign.variables.map((v) => ({ ...v })) },
    output_names: [...campaign.output_names],
    objectives: campaign.objectives.map((o) => ({ ...o })),
    constraints: campaign.constraints.map((c) => ({ ...c })),
    n: campaign.points.length,
    revision: campaign.revision,
    pending: campaign.pending.map((p) => [...p]),
    observations: {
      points: campaign.points.map((p) => [...p]),
      outputs: campaign.outputs.map((o) => [...o]),
    },
    trace: bestSoFar(campaign),
    seed: campaign.seed,
  };
  if (campaign.objectives.length > 1) {
    doc.pareto = paretoRows(campaign);
  } else {
    const row = bestRow(campaign);
    doc.incumbent =
      row === null
        ? null
        : { row, value: campaign.outputs[row][campaign.objectives[0].output_index] };
  }
  return doc;
}

export class FakeApi implements Api {
  private readonly campaigns = new Map<string, FakeCampaign>();
  private counter = 0;

  /** Settled calls per endpoint, for interaction assertions. */
  readonly calls: string[] = [];

  private get(id: string): FakeCampaign {
    const campaign = this.campaigns.get(id);
    if (campaign === undefined) {
      throw new ApiError("not_found", `no campaign '${id}'`, 404);
    }
    return campaign;
  }

  /** Simulates another client writing the campaign. */
  bumpExternally(id: string): void {
    this.get(id).revision += 1;
  }

  async createCampaign(req: CreateCampaignRequest): Promise<Reply<CampaignSummary>> {
    this.calls.push("createCampaign");
    if (!req.space || !Array.isArray(req.space.variables) || req.space.variables.length === 0) {
      throw new ApiError("validation", "space.variables: at least one variable is required", 422);
    }
    req.space.variables.forEach((v, i) => {
      for (const field of ["lower", "upper"] as const) {
        const value = v[field];
        if (typeof value !== "number" || !Number.isFinite(value)) {
          throw new ApiError(
            "validation",
            `space.variables[${i}].${field}: expected a number`,
            422,
          );
        }
      }
    });
    const objectives = (req.objectives ?? [{ name: "y" }]).map((o, i) => ({
      name: o.name,
      sense: (o.sense ?? "maximize") as "maximize" | "minimize",
      output_index: i,
    }));
    const constraints = (req.constraints ?? []).map((c, j) => {
      if (typeof c.threshold !== "number" || !Number.isFinite(c.threshold)) {
        throw new ApiError(
          "validation",
          `constraints[${j}].threshold: expected a number`,
          422,
        );
      }
      return {
        name: c.name,
        threshold: c.threshold,
        direction: (c.direction ?? "le") as "le" | "ge",
        output_index: objectives.length + j,
      };
    });
    this.counter += 1;
    const campaign: FakeCampaign = {
      id: `fake-${this.counter}`,
      variables: req.space.variables.map((v) => ({ unit: "", ...v })),
      output_names: [...objectives.map((o) => o.name), ...constraints.map((c) => c.name)],
      objectives,
      constraints,
      points: [],
      outputs: [],
      pending: [],
      revision: 0,
      seed: req.seed ?? 0,
      askCalls: 0,
    };
    this.campaigns.set(campaign.id, campaign);
    return { data: summarize(campaign), revision: 0 };
  }

  async getCampaign(id: string): Promise<Reply<CampaignSummary>> {
    this.calls.push("getCampaign");
    const campaign = this.get(id);
    return { data: summarize(campaign), revision: campaign.revision };
  }

  async ask(id: string, opts: AskOptions = {}): Promise<Reply<AskResult>> {
    this.calls.push("ask");
    const campaign = this.get(id);
    const q = opts.q ?? 1;
    if (q < 1) {
      throw new ApiError("validation", "q: expected a positive integer", 422);
    }
    const points: number[][] = [];
    for (let k = 0; k < q; k += 1) {
      campaign.askCalls += 1;
      const point = campaign.variables.map((variable, d) => {
        const phase = (campaign.askCalls * 0.37 + d * 0.21) % 1;
        return variable.lower + (variable.upper - variable.lower) * (0.1 + 0.8 * phase);
      });
      points.push(point);
    }
    campaign.pending.push(...points.map((p) => [...p]));
    campaign.revision += 1;
    return {
      data: { names: campaign.variables.map((v) => v.name), points },
      revision: campaign.revision,
    };
  }

  async tell(
    id: string,
    rows: Array<Record<string, number>>,
    opts: TellOptions = {},
  ): Promise<Reply<TellResult>> {
    this.calls.push("tell");
    const campaign = this.get(id);
    const expected = opts.revision ?? campaign.revision;
    if (expected !== campaign.revision) {
      throw new ApiError(
        "conflict",
        `campaign is at revision ${campaign.revision}, request expected ${expected}`,
        409,
        campaign.revision,
      );
    }
    const inputNames = campaign.variables.map((v) => v.name);
    const columns = [...inputNames, ...campaign.output_names];
    rows.forEach((row, i) => {
      for (const name of columns) {
        const value = row[name];
        if (typeof value !== "number" || !Number.isFinite(value)) {
          throw new ApiError("validation", `rows[${i}].${name}: expected a number`, 422);
        }
      }
    });
    for (const row of rows) {
      const point = inputNames.map((name) => row[name]);
      campaign.variables.forEach((variable, d) => {
        if (point[d] < variable.lower || point[d] > variable.upper) {
          throw new ApiError(
            "validation",
            `rows lie outside the design-space bounds`,
            422,
          );
        }
      });
      campaign.points.push(point);
      campaign.outputs.push(campaign.output_names.map((name) => row[name]));
      campaign.pending = campaign.pending.filter(
        (p) => !p.every((value, d) => Math.abs(value - point[d]) < 1e-9),
      );
    }
    campaign.revision += 1;
    return {
      data: {
        added: rows.length,
        n: campaign.points.length,
        pending: campaign.pending.map((p) => [...p]),
        trace: bestSoFar(campaign),
      },
      revision: campaign.revision,
    };
  }

  async recommend(id: string): Promise<Reply<Recommendation>> {
    this.calls.push("recommend");
    const campaign = this.get(id);
    if (campaign.points.length === 0) {
      throw new ApiError("insufficient_data", "nothing has been observed yet", 422);
    }
    const columns = [
      ...campaign.variables.map((v) => v.name),
      ...campaign.output_names,
    ];
    const indices =
      campaign.objectives.length > 1 ? paretoRows(campaign) : [bestRow(campaign) as number];
    return {
      data: {
        indices,
        rationale: campaign.objectives.length > 1 ? "pareto_front" : "best_observed",
        flagged: false,
        columns,
        rows: indices.map((i) => [...campaign.points[i], ...campaign.outputs[i]]),
      },
      revision: campaign.revision,
    };
  }

  async pareto(id: string): Promise<Reply<ParetoResult>> {
    this.calls.push("pareto");
    const campaign = this.get(id);
    if (campaign.objectives.length < 2) {
      throw new ApiError("argument", "the campaign has a single objective", 422);
    }
    const indices = paretoRows(campaign);
    return {
      data: {
        indices,
        columns: [...campaign.variables.map((v) => v.name), ...campaign.output_names],
        rows: indices.map((i) => [...campaign.points[i], ...campaign.outputs[i]]),
      },
      revision: campaign.revision,
    };
  }

  async slice(id: string, opts: SliceOptions = {}): Promise<Reply<SliceResult>> {
    this.calls.push("slice");
    const campaign = this.get(id);
    const dim = opts.dim ?? 0;
    if (dim < 0 || dim >= campaign.variables.length) {
      throw new ApiError("validation", `dim: expected 0..${campaign.variables.length - 1}, got ${dim}`, 422);
    }
    if (campaign.points.length < 2) {
      throw new ApiError("insufficient_data", "a posterior slice needs at least 2 observations", 422);
    }
    const objective = opts.objective ?? 0;
    const spec = campaign.objectives[objective];
    if (spec === undefined) {
      throw new ApiError("validation", `objective: expected 0..${campaign.objectives.length - 1}, got ${objective}`, 422);
    }
    const points = opts.points ?? 120;
    const variable = campaign.variables[dim];
    const anchor = campaign.points[bestRow(campaign) ?? 0];
    const grid: number[] = [];
    const mean: number[] = [];
    const lower: number[] = [];
    const upper: number[] = [];
    const center = campaign.outputs.reduce(
      (acc, row) => acc + row[spec.output_index],
      0,
    );
    for (let i = 0; i < points; i += 1) {
      const t = i / (points - 1);
      const value = variable.lower + t * (variable.upper - variable.lower);
      grid.push(value);
      const m = center / campaign.outputs.length + Math.sin(t * 5) * 0.5;
      const band = 0.1 + Math.abs(Math.cos(t * 3)) * 0.4;
      mean.push(m);
      lower.push(m - 2 * band);
      upper.push(m + 2 * band);
    }
    return {
      data: {
        dim,
        name: variable.name,
        objective: spec.name,
        anchor: [...anchor],
        grid,
        mean,
        lower,
        upper,
      },
      revision: campaign.revision,
    };
  }
}
