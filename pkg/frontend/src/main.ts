// Browser entry point: binds the static panels in index.html to a
// ConsoleStore and re-renders the dynamic regions on every state change.

import { ConsoleStore } from "./state.js";
import type { ConsoleState } from "./state.js";
import type { MetadataDoc } from "./types.js";
import {
  answerView,
  constraintErrorView,
  constraintList,
  historyStrip,
  instanceList,
  minconfLabel,
} from "./view.js";

const store = new ConsoleStore();

function get<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const baseUrl = get<HTMLInputElement>("base-url");
const metaText = get<HTMLTextAreaElement>("meta-text");
const metaFile = get<HTMLInputElement>("meta-file");
const connectBtn = get<HTMLButtonElement>("connect");
const modelText = get<HTMLTextAreaElement>("model-text");
const modelFile = get<HTMLInputElement>("model-file");
const modelBtn = get<HTMLButtonElement>("add-model");
const modelList = get<HTMLElement>("model-list");

const instName = get<HTMLInputElement>("inst-name");
const instModel = get<HTMLSelectElement>("inst-model");
const instLabel = get<HTMLInputElement>("inst-label");
const instMinconf = get<HTMLInputElement>("inst-minconf");
const instMinconfOut = get<HTMLElement>("inst-minconf-out");
const instBtn = get<HTMLButtonElement>("add-instance");
const instList = get<HTMLElement>("instance-list");

const consText = get<HTMLInputElement>("constraint-text");
const consBtn = get<HTMLButtonElement>("add-constraint");
const consError = get<HTMLElement>("constraint-error");
const consList = get<HTMLElement>("constraint-list");

const projectBox = get<HTMLElement>("project-targets");
const projectExtra = get<HTMLInputElement>("project-extra");
const minToggle = get<HTMLInputElement>("minimize-on");
const minFactual = get<HTMLSelectElement>("minimize-factual");
const minContrastive = get<HTMLSelectElement>("minimize-contrastive");
const minBeta = get<HTMLInputElement>("minimize-beta");
const minGamma = get<HTMLInputElement>("minimize-gamma");
const solveBtn = get<HTMLButtonElement>("solve");
const answerBox = get<HTMLElement>("answer");
const historyBox = get<HTMLElement>("history");
const exportBtn = get<HTMLButtonElement>("export-script");
const banner = get<HTMLElement>("banner");

function readFileInto(input: HTMLInputElement, target: HTMLTextAreaElement): void {
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => {
      target.value = String(reader.result ?? "");
    };
    reader.readAsText(file);
  });
}

readFileInto(metaFile, metaText);
readFileInto(modelFile, modelText);

function parseDoc(raw: string, what: string): unknown | null {
  try {
    return JSON.parse(raw);
  } catch (exc) {
    store.setBanner(`${what} is not valid JSON: ${String(exc)}`);
    return null;
  }
}

connectBtn.addEventListener("click", () => {
  const doc = parseDoc(metaText.value, "metadata");
  if (doc !== null) {
    void store.connect(baseUrl.value.trim(), doc as MetadataDoc);
  }
});

modelBtn.addEventListener("click", () => {
  const doc = parseDoc(modelText.value, "model document");
  if (doc !== null) void store.addModel(doc);
});

instMinconf.addEventListener("input", () => {
  instMinconfOut.textContent = minconfLabel(Number(instMinconf.value)) ?? "off";
});

instBtn.addEventListener("click", () => {
  const minconf = minconfLabel(Number(instMinconf.value));
  void store.addInstance({
    name: instName.value.trim(),
    model_id: instModel.value,
    label: instLabel.value.trim(),
    ...(minconf !== undefined ? { minconf } : {}),
  });
});

consBtn.addEventListener("click", () => {
  void store.addConstraint(consText.value).then((ok) => {
    if (ok) consText.value = "";
  });
});
consText.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") consBtn.click();
});

function selectedProject(): string[] {
  const picked: string[] = [];
  projectBox
    .querySelectorAll<HTMLInputElement>("input[type=checkbox]:checked")
    .forEach((box) => picked.push(box.value));
  for (const raw of projectExtra.value.split(",")) {
    const item = raw.trim();
    if (item !== "") picked.push(item);
  }
  return picked;
}

function minimizeSpec(): string | undefined {
  if (!minToggle.checked) return undefined;
  const args = [minFactual.value, minContrastive.value];
  const beta = minBeta.value.trim();
  const gamma = minGamma.value.trim();
  if (beta !== "") args.push(`beta=${beta}`);
  if (gamma !== "") args.push(`gamma=${gamma}`);
  return `l1norm(${args.join(", ")})`;
}

solveBtn.addEventListener("click", () => {
  void store.solve({ project: selectedProject(), minimize: minimizeSpec() });
});

exportBtn.addEventListener("click", () => {
  store
    .exportScript()
    .then((bundle) => {
      const blob = new Blob([JSON.stringify(bundle, null, 2)], {
        type: "application/json",
      });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "session-script.json";
      a.click();
      URL.revokeObjectURL(a.href);
    })
    .catch((err) => store.setBanner(String(err)));
});

function syncSelect(select: HTMLSelectElement, options: string[]): void {
  const current = select.value;
  select.textContent = "";
  for (const name of options) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.appendChild(opt);
  }
  if (options.includes(current)) select.value = current;
}

function syncProjectTargets(state: ConsoleState): void {
  const checked = new Set(
    [...projectBox.querySelectorAll<HTMLInputElement>("input:checked")].map(
      (box) => box.value,
    ),
  );
  projectBox.textContent = "";
  for (const inst of state.instances) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = inst.name;
    if (checked.has(inst.name)) box.checked = true;
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${inst.name}`));
    projectBox.appendChild(label);
  }
}

function render(state: ConsoleState): void {
  const connected = state.sessionId !== null;
  const locked = !connected || state.solving || state.busy;

  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;

  connectBtn.disabled = state.busy;
  modelBtn.disabled = locked;
  instBtn.disabled = locked || state.models.length === 0;
  consBtn.disabled = locked;
  solveBtn.disabled = locked || state.instances.length === 0;
  solveBtn.textContent = state.solving ? "solving…" : "solve";
  exportBtn.disabled = !connected;

  modelList.textContent = "";
  for (const id of state.models) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.textContent = id;
    modelList.appendChild(chip);
  }

  syncSelect(instModel, state.models);
  syncSelect(minFactual, state.instances.map((i) => i.name));
  syncSelect(
    minContrastive,
    state.instances.map((i) => i.name),
  );
  syncProjectTargets(state);

  instList.textContent = "";
  instList.appendChild(instanceList(state.instances));

  consList.textContent = "";
  consList.appendChild(
    constraintList(state.constraints, locked, (cid) => void store.retract(cid)),
  );
  consError.textContent = "";
  if (state.constraintError) {
    consError.appendChild(
      constraintErrorView(state.constraintError.payload, state.constraintError.source),
    );
  }

  const shown = store.displayed();
  answerBox.textContent = "";
  answerBox.appendChild(
    answerView(shown.record, shown.historical, state.answerStale),
  );

  historyBox.textContent = "";
  historyBox.appendChild(
    historyStrip(state.history, state.viewing, (i) => store.view(i)),
  );
}

store.subscribe(() => render(store.state));
render(store.state);
