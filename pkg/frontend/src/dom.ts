/** Thin DOM layer: renders the store's state and wires events back into
 * store actions. No numbers are computed here; tables and charts show
 * service responses through the pure geometry in charts.ts. */

import { CampaignSummary } from "./api.js";
import {
  SliceChart,
  TraceChart,
  formatValue,
  sliceChart,
  traceChart,
} from "./charts.js";
import { Store, ViewState, pendingView } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

type Child = Node | string | null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    if (child === null) {
      continue;
    }
    node.append(child);
  }
  return node;
}

function svgEl(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Element[]
): Element {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

/** Form drafts survive re-renders without entering the store. */
const drafts = new Map<string, string>();

function draftInput(key: string, attrs: Record<string, string> = {}): HTMLInputElement {
  const input = el("input", { type: "text", ...attrs });
  input.value = drafts.get(key) ?? "";
  input.addEventListener("input", () => drafts.set(key, input.value));
  return input;
}

function clearDrafts(prefix: string): void {
  for (const key of [...drafts.keys()]) {
    if (key.startsWith(prefix)) {
      drafts.delete(key);
    }
  }
}

function fieldError(state: ViewState, name: string): HTMLElement | null {
  const message = state.fieldErrors[name];
  if (message === undefined) {
    return null;
  }
  return el("div", { class: "field-error" }, `${name}: ${message}`);
}

function numberCell(value: number): HTMLElement {
  return el("td", { class: "num" }, formatValue(value));
}

function banner(store: Store, state: ViewState): HTMLElement | null {
  if (state.banner.kind === "none") {
    return null;
  }
  const reload = el("button", {}, "reload");
  reload.addEventListener("click", () => void store.refresh());
  return el(
    "div",
    { class: `banner ${state.banner.kind}` },
    state.banner.message,
    " ",
    reload,
  );
}

function drawTrace(chart: TraceChart): Element {
  const { width, height, pad } = chart.frame;
  const axes: Element[] = [
    svgEl("line", {
      x1: String(pad), y1: String(height - pad),
      x2: String(width - pad), y2: String(height - pad),
      class: "axis",
    }),
    svgEl("line", {
      x1: String(pad), y1: String(pad),
      x2: String(pad), y2: String(height - pad),
      class: "axis",
    }),
  ];
  for (const tick of chart.xTicks) {
    const label = svgEl("text", {
      x: String(tick.pos), y: String(height - pad + 14),
      class: "tick-label", "text-anchor": "middle",
    });
    label.textContent = formatValue(tick.value);
    axes.push(label);
  }
  for (const tick of chart.yTicks) {
    const label = svgEl("text", {
      x: String(pad - 6), y: String(tick.pos + 3),
      class: "tick-label", "text-anchor": "end",
    });
    label.textContent = formatValue(tick.value);
    axes.push(label);
  }
  const dots = chart.xs.map((x, i) =>
    svgEl("circle", { cx: String(x), cy: String(chart.ys[i]), r: "2.5", class: "trace-dot" }),
  );
  return svgEl(
    "svg",
    { viewBox: `0 0 ${width} ${height}`, class: "chart" },
    ...axes,
    svgEl("path", { d: chart.path, class: "trace-line" }),
    ...dots,
  );
}

function drawSlice(chart: SliceChart): Element {
  const { width, height, pad } = chart.frame;
  const parts: Element[] = [
    svgEl("path", { d: chart.bandPath, class: "band" }),
    svgEl("path", { d: chart.meanPath, class: "mean-line" }),
    svgEl("line", {
      x1: String(pad), y1: String(height - pad),
      x2: String(width - pad), y2: String(height - pad),
      class: "axis",
    }),
    svgEl("line", {
      x1: String(pad), y1: String(pad),
      x2: String(pad), y2: String(height - pad),
      class: "axis",
    }),
  ];
  if (chart.anchorX !== null) {
    parts.push(
      svgEl("line", {
        x1: String(chart.anchorX), y1: String(pad),
        x2: String(chart.anchorX), y2: String(height - pad),
        class: "anchor-line",
      }),
    );
  }
  for (const tick of chart.xTicks) {
    const label = svgEl("text", {
      x: String(tick.pos), y: String(height - pad + 14),
      class: "tick-label", "text-anchor": "middle",
    });
    label.textContent = formatValue(tick.value);
    parts.push(label);
  }
  for (const tick of chart.yTicks) {
    const label = svgEl("text", {
      x: String(pad - 6), y: String(tick.pos + 3),
      class: "tick-label", "text-anchor": "end",
    });
    label.textContent = formatValue(tick.value);
    parts.push(label);
  }
  return svgEl("svg", { viewBox: `0 0 ${width} ${height}`, class: "chart" }, ...parts);
}

function createForm(store: Store, state: ViewState): HTMLElement {
  const section = el("section", { class: "card" }, el("h2", {}, "new campaign"));

  const varCount = Number(drafts.get("create-var-count") ?? "2");
  const rows = el("div", {});
  for (let i = 0; i < varCount; i += 1) {
    rows.append(
      el(
        "div",
        { class: "form-row" },
        draftInput(`create-var-${i}-name`, { placeholder: "name" }),
        draftInput(`create-var-${i}-lower`, { placeholder: "lower", class: "narrow" }),
        draftInput(`create-var-${i}-upper`, { placeholder: "upper", class: "narrow" }),
        draftInput(`create-var-${i}-unit`, { placeholder: "unit", class: "narrow" }),
        fieldError(state, `space.variables[${i}].lower`),
        fieldError(state, `space.variables[${i}].upper`),
        fieldError(state, `space.variables[${i}].name`),
      ),
    );
  }
  const addVar = el("button", {}, "add variable");
  addVar.addEventListener("click", () => {
    drafts.set("create-var-count", String(varCount + 1));
    store.refreshView();
  });

  const objective = el(
    "div",
    { class: "form-row" },
    el("label", {}, "objective"),
    draftInput("create-objective", { placeholder: "y" }),
    (() => {
      const select = el("select", { id: "create-sense" });
      for (const sense of ["maximize", "minimize"]) {
        select.append(el("option", { value: sense }, sense));
      }
      const saved = drafts.get("create-sense");
      if (saved !== undefined) {
        select.value = saved;
      }
      select.addEventListener("change", () => drafts.set("create-sense", select.value));
      return select;
    })(),
  );

  const constraint = el(
    "div",
    { class: "form-row" },
    el("label", {}, "constraint"),
    draftInput("create-con-name", { placeholder: "name (optional)" }),
    draftInput("create-con-threshold", { placeholder: "threshold", class: "narrow" }),
    (() => {
      const select = el("select", {});
      for (const direction of ["le", "ge"]) {
        select.append(el("option", { value: direction }, direction));
      }
      const saved = drafts.get("create-con-direction");
      if (saved !== undefined) {
        select.value = saved;
      }
      select.addEventListener("change", () =>
        drafts.set("create-con-direction", select.value),
      );
      return select;
    })(),
    fieldError(state, "constraints[0].threshold"),
  );

  const submit = el("button", { class: "primary" }, "create campaign");
  submit.addEventListener("click", () => {
    const variables = [];
    for (let i = 0; i < varCount; i += 1) {
      const name = drafts.get(`create-var-${i}-name`) ?? "";
      if (name.trim() === "") {
        continue;
      }
      variables.push({
        name: name.trim(),
        lower: Number(drafts.get(`create-var-${i}-lower`)),
        upper: Number(drafts.get(`create-var-${i}-upper`)),
        unit: (drafts.get(`create-var-${i}-unit`) ?? "").trim(),
      });
    }
    const objectiveName = (drafts.get("create-objective") ?? "").trim() || "y";
    const sense = drafts.get("create-sense") ?? "maximize";
    const conName = (drafts.get("create-con-name") ?? "").trim();
    const request = {
      space: { variables },
      objectives: [{ name: objectiveName, sense }],
      ...(conName === ""
        ? {}
        : {
            constraints: [
              {
                name: conName,
                threshold: Number(drafts.get("create-con-threshold")),
                direction: drafts.get("create-con-direction") ?? "le",
              },
            ],
          }),
    };
    void store.createCampaign(request).then((created) => {
      if (created) {
        clearDrafts("create-");
      }
    });
  });

  const openRow = el(
    "div",
    { class: "form-row" },
    el("label", {}, "or open existing"),
    draftInput("open-id", { placeholder: "campaign id" }),
    (() => {
      const button = el("button", {}, "open");
      button.addEventListener("click", () => {
        const id = (drafts.get("open-id") ?? "").trim();
        if (id !== "") {
          void store.openCampaign(id);
        }
      });
      return button;
    })(),
  );

  section.append(rows, addVar, objective, constraint, submit, el("hr"), openRow);
  return section;
}

function statusBar(campaign: CampaignSummary, state: ViewState): HTMLElement {
  const bits = [
    `id ${campaign.id}`,
    `n ${campaign.n}`,
    `revision ${state.revision ?? campaign.revision}`,
    `seed ${campaign.seed}`,
  ];
  if (campaign.incumbent !== undefined && campaign.incumbent !== null) {
    bits.push(`incumbent ${formatValue(campaign.incumbent.value)} (row ${campaign.incumbent.row})`);
  }
  return el("div", { class: "status" }, bits.join("  ·  "));
}

function suggestControls(store: Store, state: ViewState): HTMLElement {
  const qInput = draftInput("suggest-q", { class: "narrow" });
  if (qInput.value === "") {
    qInput.value = "2";
    drafts.set("suggest-q", "2");
  }
  const button = el("button", { class: "primary" }, "Suggest batch");
  button.disabled = state.busy;
  button.addEventListener("click", () => {
    const q = Number(drafts.get("suggest-q") ?? "2");
    void store.suggest(Number.isInteger(q) && q > 0 ? q : 2);
  });
  return el("div", { class: "form-row" }, el("label", {}, "q"), qInput, button);
}

function pendingTable(store: Store, state: ViewState, campaign: CampaignSummary): HTMLElement {
  const view = pendingView(campaign);
  const section = el("section", { class: "card" }, el("h2", {}, "pending suggestions"));
  if (view.rows.length === 0) {
    section.append(el("p", { class: "muted" }, "none; ask for a batch"));
    return section;
  }
  const header = el(
    "tr",
    {},
    ...view.inputColumns.map((name) => el("th", {}, name)),
    ...view.outputColumns.map((name) => el("th", {}, `${name} (measured)`)),
    el("th", {}, ""),
  );
  const table = el("table", {}, header);
  view.rows.forEach((row, i) => {
    const cells: Child[] = row.point.map((value) => numberCell(value));
    for (const name of view.outputColumns) {
      cells.push(el("td", {}, draftInput(`pending-${i}-${name}`, { class: "narrow" })));
    }
    const submit = el("button", {}, "Submit result");
    submit.disabled = state.busy;
    submit.addEventListener("click", () => {
      const values: Record<string, string | number> = {};
      view.inputColumns.forEach((name, d) => {
        values[name] = row.point[d];
      });
      for (const name of view.outputColumns) {
        values[name] = drafts.get(`pending-${i}-${name}`) ?? "";
      }
      void store.submitRow(values).then((recorded) => {
        if (recorded) {
          clearDrafts(`pending-${i}-`);
        }
      });
    });
    cells.push(el("td", {}, submit));
    table.append(el("tr", {}, ...cells));
  });
  section.append(table);
  for (const name of view.outputColumns) {
    const err = fieldError(state, name);
    if (err !== null) {
      section.append(err);
    }
  }
  return section;
}

function entryRow(store: Store, state: ViewState, campaign: CampaignSummary): HTMLElement {
  const columns = [
    ...campaign.space.variables.map((v) => v.name),
    ...campaign.output_names,
  ];
  const inputs = columns.map((name) =>
    el(
      "span",
      { class: "entry-cell" },
      el("label", {}, name),
      draftInput(`entry-${name}`, { class: "narrow" }),
    ),
  );
  const submit = el("button", {}, "Record row");
  submit.disabled = state.busy;
  submit.addEventListener("click", () => {
    const values: Record<string, string | number> = {};
    for (const name of columns) {
      values[name] = drafts.get(`entry-${name}`) ?? "";
    }
    void store.submitRow(values).then((recorded) => {
      if (recorded) {
        clearDrafts("entry-");
      }
    });
  });
  const errors = columns
    .map((name) => fieldError(state, name))
    .filter((node): node is HTMLElement => node !== null);
  return el("div", { class: "entry-row" }, ...inputs, submit, ...errors);
}

function observationsTable(campaign: CampaignSummary): HTMLElement {
  const section = el("section", { class: "card" }, el("h2", {}, "observations"));
  if (campaign.n === 0) {
    section.append(el("p", { class: "muted" }, "none yet"));
    return section;
  }
  const columns = [
    "#",
    ...campaign.space.variables.map((v) => v.name),
    ...campaign.output_names,
    "best so far",
  ];
  const table = el("table", {}, el("tr", {}, ...columns.map((c) => el("th", {}, c))));
  campaign.observations.points.forEach((point, i) => {
    const best = campaign.trace[i];
    table.append(
      el(
        "tr",
        {},
        el("td", {}, String(i)),
        ...point.map((value) => numberCell(value)),
        ...campaign.observations.outputs[i].map((value) => numberCell(value)),
        el("td", { class: "num muted" }, best === null ? "" : formatValue(best)),
      ),
    );
  });
  section.append(el("div", { class: "scroll" }, table));
  return section;
}

function traceSection(campaign: CampaignSummary): HTMLElement {
  const section = el("section", { class: "card" }, el("h2", {}, "best so far"));
  const chart = traceChart(campaign.trace);
  if (chart === null) {
    section.append(el("p", { class: "muted" }, "no feasible observations yet"));
    return section;
  }
  section.append(drawTrace(chart));
  return section;
}

function sliceSection(store: Store, state: ViewState, campaign: CampaignSummary): HTMLElement {
  const section = el("section", { class: "card" }, el("h2", {}, "posterior slice"));
  const dimSelect = el("select", {});
  campaign.space.variables.forEach((variable, i) => {
    dimSelect.append(el("option", { value: String(i) }, variable.name));
  });
  dimSelect.value = String(state.sliceDim);
  dimSelect.addEventListener("change", () => {
    void store.selectDimension(Number(dimSelect.value));
  });
  const controls = el("div", { class: "form-row" }, el("label", {}, "dimension"), dimSelect);
  if (campaign.objectives.length > 1) {
    const objSelect = el("select", {});
    campaign.objectives.forEach((objective, i) => {
      objSelect.append(el("option", { value: String(i) }, objective.name));
    });
    objSelect.value = String(state.sliceObjective);
    objSelect.addEventListener("change", () => {
      void store.selectObjective(Number(objSelect.value));
    });
    controls.append(el("label", {}, "objective"), objSelect);
  }
  section.append(controls);
  if (state.slice === null) {
    section.append(el("p", { class: "muted" }, "needs at least 2 observations"));
    return section;
  }
  const anchor = state.slice.anchor[state.slice.dim] ?? null;
  section.append(drawSlice(sliceChart(state.slice, undefined, anchor)));
  section.append(
    el(
      "p",
      { class: "muted" },
      `${state.slice.objective} along ${state.slice.name}, other settings held at the incumbent; shaded band is the model's uncertainty`,
    ),
  );
  return section;
}

function recommendSection(state: ViewState): HTMLElement | null {
  const rec = state.recommendation;
  if (rec === null) {
    return null;
  }
  const section = el("section", { class: "card" }, el("h2", {}, "recommendation"));
  section.append(
    el(
      "p",
      {},
      `rationale: ${rec.rationale}`,
      rec.flagged ? el("span", { class: "flag" }, " (flagged: weak evidence)") : null,
    ),
  );
  const table = el("table", {}, el("tr", {}, ...rec.columns.map((c) => el("th", {}, c))));
  rec.rows.forEach((row) => {
    table.append(el("tr", {}, ...row.map((value) => numberCell(value))));
  });
  section.append(table);
  return section;
}

function paretoSection(state: ViewState): HTMLElement | null {
  const front = state.pareto;
  if (front === null) {
    return null;
  }
  const section = el("section", { class: "card" }, el("h2", {}, "pareto front"));
  const table = el(
    "table",
    {},
    el("tr", {}, el("th", {}, "#"), ...front.columns.map((c) => el("th", {}, c))),
  );
  front.rows.forEach((row, i) => {
    table.append(
      el(
        "tr",
        {},
        el("td", {}, String(front.indices[i])),
        ...row.map((value) => numberCell(value)),
      ),
    );
  });
  section.append(table);
  return section;
}

export function mount(root: HTMLElement, store: Store): void {
  const render = (state: ViewState): void => {
    root.replaceChildren();
    root.append(el("h1", {}, "boat campaigns"));
    const alert = banner(store, state);
    if (alert !== null) {
      root.append(alert);
    }
    const campaign = state.campaign;
    if (campaign === null) {
      root.append(createForm(store, state));
      return;
    }
    root.append(statusBar(campaign, state));
    root.append(suggestControls(store, state));
    root.append(pendingTable(store, state, campaign));
    const entry = el(
      "section",
      { class: "card" },
      el("h2", {}, "record a measurement"),
      entryRow(store, state, campaign),
    );
    root.append(entry);
    root.append(traceSection(campaign));
    root.append(sliceSection(store, state, campaign));
    const rec = recommendSection(state);
    if (rec !== null) {
      root.append(rec);
    }
    const front = paretoSection(state);
    if (front !== null) {
      root.append(front);
    }
    root.append(observationsTable(campaign));
  };
  store.subscribe(render);
  render(store.getState());
}
