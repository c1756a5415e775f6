/**
 * GUI panel: one DOM widget per mirrored element, grouped by folders and tab
 * groups in insertion order. User edits flow to the server; server-pushed
 * changes re-render without echoing back.
 */

import { Connection } from "./connection";
import { GuiElement, Mirror } from "./mirror";
import { WireValue } from "./wire";

function text(v: WireValue, fallback = ""): string {
  return typeof v === "string" ? v : fallback;
}

export class GuiPanel {
  private lastRevision = -1;
  private activeTabs = new Map<number, number>(); // tab_group uid -> tab uid
  /** set while programmatically updating inputs, to suppress echo sends */
  private muted = false;

  constructor(
    private rootEl: HTMLElement,
    private connection: Connection,
  ) {}

  widgetCount(): number {
    return this.rootEl.querySelectorAll("[data-uid]").length;
  }

  /** Rebuild the panel if the mirror changed. Rebuilding wholesale keeps the
   * widget tree trivially consistent with the mirror (desk-scale panels). */
  sync(mirror: Mirror): void {
    if (mirror.revision === this.lastRevision) return;
    this.lastRevision = mirror.revision;
    const focused = document.activeElement as HTMLElement | null;
    const focusKey = focused?.dataset?.uid;
    this.muted = true;
    try {
      this.rootEl.textContent = "";
      this.renderContainer(mirror, 0, this.rootEl);
    } finally {
      this.muted = false;
    }
    if (focusKey !== undefined) {
      const el = this.rootEl.querySelector<HTMLElement>(`[data-uid="${focusKey}"]`);
      el?.focus();
    }
  }

  private childrenOf(mirror: Mirror, containerUid: number): GuiElement[] {
    return [...mirror.gui.values()]
      .filter((el) => el.containerUid === containerUid)
      .sort((a, b) => a.order - b.order);
  }

  private renderContainer(mirror: Mirror, containerUid: number, parent: HTMLElement): void {
    for (const el of this.childrenOf(mirror, containerUid)) {
      if (el.props.visible === false) continue;
      parent.appendChild(this.renderElement(mirror, el));
    }
  }

  private renderElement(mirror: Mirror, el: GuiElement): HTMLElement {
    switch (el.kind) {
      case "folder":
        return this.renderFolder(mirror, el);
      case "tab_group":
        return this.renderTabGroup(mirror, el);
      case "markdown":
        return this.renderMarkdown(el);
      case "button":
        return this.renderButton(el);
      default:
        return this.renderInputRow(el);
    }
  }

  private renderFolder(mirror: Mirror, el: GuiElement): HTMLElement {
    const details = document.createElement("details");
    details.className = "gui-folder";
    details.open = el.props.expanded !== false;
    const summary = document.createElement("summary");
    summary.textContent = text(el.props.label, "folder");
    details.appendChild(summary);
    const body = document.createElement("div");
    details.appendChild(body);
    this.renderContainer(mirror, el.uid, body);
    return details;
  }

  private renderTabGroup(mirror: Mirror, el: GuiElement): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "gui-tabs";
    const tabs = this.childrenOf(mirror, el.uid);
    const active = this.activeTabs.get(el.uid) ?? tabs[0]?.uid;
    const bar = document.createElement("div");
    bar.className = "gui-tab-bar";
    for (const tab of tabs) {
      const button = document.createElement("button");
      button.textContent = text(tab.props.label, "tab");
      button.className = tab.uid === active ? "active" : "";
      button.addEventListener("click", () => {
        this.activeTabs.set(el.uid, tab.uid);
        this.lastRevision = -1; // force re-render
        this.sync(mirror);
      });
      bar.appendChild(button);
    }
    wrap.appendChild(bar);
    const body = document.createElement("div");
    wrap.appendChild(body);
    if (active !== undefined && mirror.gui.has(active)) {
      this.renderContainer(mirror, active, body);
    }
    return wrap;
  }

  private renderMarkdown(el: GuiElement): HTMLElement {
    const div = document.createElement("div");
    div.className = "gui-markdown";
    div.textContent = text(el.props.content);
    return div;
  }

  private renderButton(el: GuiElement): HTMLElement {
    const button = document.createElement("button");
    button.className = "gui-button";
    button.dataset.uid = String(el.uid);
    button.textContent = text(el.props.label, "button");
    button.disabled = el.props.disabled === true;
    const color = el.props.color;
    if (Array.isArray(color)) {
      button.style.background = `rgb(${color.join(",")})`;
    }
    button.addEventListener("click", () => {
      if (!this.muted) this.connection.sendClick(el.uid);
    });
    return button;
  }

  private renderInputRow(el: GuiElement): HTMLElement {
    const row = document.createElement("label");
    row.className = "gui-row";
    const caption = document.createElement("span");
    caption.textContent = text(el.props.label);
    row.appendChild(caption);
    row.appendChild(this.renderInput(el));
    return row;
  }

  private renderInput(el: GuiElement): HTMLElement {
    const send = (value: unknown) => {
      if (!this.muted) this.connection.sendGuiUpdate(el.uid, el.kind, value);
    };
    const disabled = el.props.disabled === true;

    if (el.kind === "checkbox") {
      const input = document.createElement("input");
      input.type = "checkbox";
      input.dataset.uid = String(el.uid);
      input.checked = el.value === true;
      input.disabled = disabled;
      input.addEventListener("change", () => send(input.checked));
      return input;
    }
    if (el.kind === "slider" || el.kind === "number") {
      const input = document.createElement("input");
      input.type = el.kind === "slider" ? "range" : "number";
      input.dataset.uid = String(el.uid);
      if (typeof el.props.min === "number") input.min = String(el.props.min);
      if (typeof el.props.max === "number") input.max = String(el.props.max);
      if (typeof el.props.step === "number") input.step = String(el.props.step);
      input.value = String(typeof el.value === "number" ? el.value : 0);
      input.disabled = disabled;
      input.addEventListener("input", () => {
        const v = Number(input.value);
        if (Number.isFinite(v)) send(v);
      });
      return input;
    }
    if (el.kind === "dropdown") {
      const select = document.createElement("select");
      select.dataset.uid = String(el.uid);
      const options = Array.isArray(el.props.options) ? el.props.options : [];
      for (const option of options) {
        const opt = document.createElement("option");
        opt.value = String(option);
        opt.textContent = String(option);
        if (option === el.value) opt.selected = true;
        select.appendChild(opt);
      }
      select.disabled = disabled;
      select.addEventListener("change", () => send(select.value));
      return select;
    }
    if (el.kind === "rgb") {
      const input = document.createElement("input");
      input.type = "color";
      input.dataset.uid = String(el.uid);
      if (Array.isArray(el.value)) {
        const [r, g, b] = el.value.map((c) => Number(c));
        input.value =
          "#" + [r, g, b].map((c) => Math.round(c).toString(16).padStart(2, "0")).join("");
      }
      input.disabled = disabled;
      input.addEventListener("change", () => {
        const hex = input.value;
        send([
          parseInt(hex.slice(1, 3), 16),
          parseInt(hex.slice(3, 5), 16),
          parseInt(hex.slice(5, 7), 16),
        ]);
      });
      return input;
    }
    if (el.kind === "vector3") {
      const wrap = document.createElement("span");
      wrap.className = "gui-vector3";
      const current = Array.isArray(el.value) ? el.value.map(Number) : [0, 0, 0];
      const inputs: HTMLInputElement[] = [];
      for (let axis = 0; axis < 3; axis++) {
        const input = document.createElement("input");
        input.type = "number";
        input.dataset.uid = String(el.uid);
        if (typeof el.props.step === "number") input.step = String(el.props.step);
        input.value = String(current[axis]);
        input.disabled = disabled;
        input.addEventListener("change", () => {
          const values = inputs.map((i) => Number(i.value));
          if (values.every(Number.isFinite)) send(values);
        });
        inputs.push(input);
        wrap.appendChild(input);
      }
      return wrap;
    }
    // text
    const input = document.createElement("input");
    input.type = "text";
    input.dataset.uid = String(el.uid);
    input.value = text(el.value);
    input.disabled = disabled;
    input.addEventListener("change", () => send(input.value));
    return input;
  }
}
