/**
 * Client-side state mirror: the same scene-graph and GUI apply semantics as
 * the server, fed exclusively by decoded wire messages.
 */

import { RawMessage, WireValue } from "./wire";
import { Pose, compose, identityPose, makePose } from "./pose";

const NODE_COMMON = new Set(["type", "path", "wxyz", "position", "visible", "clickable"]);
const GUI_COMMON = new Set(["type", "uid", "container_uid", "order", "value"]);

export interface SceneNode {
  path: string;
  kind: string;
  props: { [name: string]: WireValue };
  pose: Pose;
  visible: boolean;
  clickable: boolean;
  version: number; // bumped on any change, for render caching
}

export interface GuiElement {
  uid: number;
  kind: string;
  containerUid: number;
  order: number;
  props: { [name: string]: WireValue };
  value: WireValue;
  version: number;
}

export interface CameraState {
  pose: Pose;
  fov: number;
  aspect: number;
  lookAt: [number, number, number];
}

export function defaultCamera(): CameraState {
  return {
    pose: { wxyz: [1, 0, 0, 0], position: [3, 3, 3] },
    fov: Math.PI / 3,
    aspect: 16 / 9,
    lookAt: [0, 0, 0],
  };
}

export function pathSegments(path: string): string[] {
  return path.split("/").filter((s) => s.length > 0);
}

/** Segment-wise path comparison, matching the server's tuple ordering. */
export function comparePaths(a: string, b: string): number {
  const sa = pathSegments(a);
  const sb = pathSegments(b);
  const n = Math.min(sa.length, sb.length);
  for (let i = 0; i < n; i++) {
    if (sa[i] < sb[i]) return -1;
    if (sa[i] > sb[i]) return 1;
  }
  return sa.length - sb.length;
}

function parentPath(path: string): string {
  const segments = pathSegments(path);
  segments.pop();
  return "/" + segments.join("/");
}

function isAncestor(ancestor: string, path: string): boolean {
  if (ancestor === "/") return path !== "/";
  return path.startsWith(ancestor + "/");
}

export class Mirror {
  nodes = new Map<string, SceneNode>();
  gui = new Map<number, GuiElement>();
  camera: CameraState = defaultCamera();
  lastSeq = 0;
  /** bumped when anything changes; cheap dirty check for render/gui sync */
  revision = 0;

  constructor() {
    this.nodes.set("/", {
      path: "/",
      kind: "placeholder",
      props: {},
      pose: identityPose(),
      visible: true,
      clickable: false,
      version: 0,
    });
  }

  applyBatch(seq: number, messages: RawMessage[]): void {
    if (seq <= this.lastSeq) {
      throw new Error(`batch seq ${seq} not greater than last seq ${this.lastSeq}`);
    }
    for (const msg of messages) this.applyMessage(msg);
    this.lastSeq = seq;
  }

  applyMessage(msg: RawMessage): void {
    this.revision += 1;
    const t = msg.type;
    if (t.startsWith("scene_upsert_")) {
      this.upsertNode(t.slice("scene_upsert_".length), msg);
    } else if (t === "scene_set_pose") {
      this.withNode(msg, (node) => {
        node.pose = makePose(msg.wxyz as number[], msg.position as number[]);
      });
    } else if (t === "scene_set_visible") {
      this.withNode(msg, (node) => {
        node.visible = msg.visible as boolean;
      });
    } else if (t === "scene_set_clickable") {
      this.withNode(msg, (node) => {
        node.clickable = msg.clickable as boolean;
      });
    } else if (t.startsWith("scene_set_") && t.endsWith("_prop")) {
      this.withNode(msg, (node) => {
        node.props[msg.name as string] = normalizeValue(msg.value);
      });
    } else if (t === "scene_remove") {
      this.removeNode(msg.path as string);
    } else if (t.startsWith("gui_add_")) {
      this.addGui(t.slice("gui_add_".length), msg);
    } else if (t.startsWith("gui_set_") && t.endsWith("_prop")) {
      this.withGui(msg, (el) => {
        el.props[msg.name as string] = normalizeValue(msg.value);
      });
    } else if (t.startsWith("gui_set_") && t.endsWith("_value")) {
      this.withGui(msg, (el) => {
        el.value = normalizeValue(msg.value);
      });
    } else if (t === "gui_remove") {
      this.removeGui(msg.uid as number);
    } else if (t === "camera_set") {
      this.camera = {
        pose: makePose(msg.wxyz as number[], msg.position as number[]),
        fov: msg.fov as number,
        aspect: msg.aspect as number,
        lookAt: msg.look_at as [number, number, number],
      };
    } else {
      throw new Error(`client cannot apply server message of type ${t}`);
    }
  }

  // -- scene

  private upsertNode(kind: string, msg: RawMessage): void {
    const path = msg.path as string;
    const segments = pathSegments(path);
    // auto-create missing ancestors; existing nodes are never clobbered
    for (let i = 1; i < segments.length; i++) {
      const ancestor = "/" + segments.slice(0, i).join("/");
      if (!this.nodes.has(ancestor)) {
        this.nodes.set(ancestor, {
          path: ancestor,
          kind: "placeholder",
          props: {},
          pose: identityPose(),
          visible: true,
          clickable: false,
          version: this.revision,
        });
      }
    }
    const props: { [name: string]: WireValue } = {};
    for (const [key, value] of Object.entries(msg)) {
      if (!NODE_COMMON.has(key)) props[key] = normalizeValue(value);
    }
    this.nodes.set(path, {
      path,
      kind,
      props,
      pose: makePose(msg.wxyz as number[], msg.position as number[]),
      visible: msg.visible as boolean,
      clickable: msg.clickable as boolean,
      version: this.revision,
    });
  }

  private withNode(msg: RawMessage, fn: (node: SceneNode) => void): void {
    const node = this.nodes.get(msg.path as string);
    if (node === undefined) {
      console.warn(`update for unknown node ${msg.path}`);
      return;
    }
    fn(node);
    node.version = this.revision;
  }

  private removeNode(path: string): void {
    if (!this.nodes.has(path)) {
      console.warn(`remove for unknown path ${path} (already gone)`);
      return;
    }
    for (const key of [...this.nodes.keys()]) {
      if (key === path || isAncestor(path, key)) this.nodes.delete(key);
    }
    // prune childless placeholder ancestors (mirrors server semantics)
    let ancestor = parentPath(path);
    while (ancestor !== "/") {
      const node = this.nodes.get(ancestor);
      if (node === undefined || node.kind !== "placeholder") break;
      let hasChild = false;
      for (const key of this.nodes.keys()) {
        if (isAncestor(ancestor, key)) {
          hasChild = true;
          break;
        }
      }
      if (hasChild) break;
      this.nodes.delete(ancestor);
      ancestor = parentPath(ancestor);
    }
  }

  worldPose(path: string): Pose {
    const segments = pathSegments(path);
    let pose = this.nodes.get("/")!.pose;
    for (let i = 1; i <= segments.length; i++) {
      const node = this.nodes.get("/" + segments.slice(0, i).join("/"));
      if (node === undefined) break;
      pose = compose(pose, node.pose);
    }
    return pose;
  }

  effectiveVisibility(path: string): boolean {
    if (!this.nodes.get("/")!.visible) return false;
    const segments = pathSegments(path);
    for (let i = 1; i <= segments.length; i++) {
      const node = this.nodes.get("/" + segments.slice(0, i).join("/"));
      if (node !== undefined && !node.visible) return false;
    }
    return true;
  }

  sortedNodePaths(): string[] {
    return [...this.nodes.keys()].sort(comparePaths);
  }

  // -- gui

  private addGui(kind: string, msg: RawMessage): void {
    const props: { [name: string]: WireValue } = {};
    for (const [key, value] of Object.entries(msg)) {
      if (!GUI_COMMON.has(key)) props[key] = normalizeValue(value);
    }
    this.gui.set(msg.uid as number, {
      uid: msg.uid as number,
      kind,
      containerUid: msg.container_uid as number,
      order: msg.order as number,
      props,
      value: normalizeValue(msg.value ?? null),
      version: this.revision,
    });
  }

  private withGui(msg: RawMessage, fn: (el: GuiElement) => void): void {
    const el = this.gui.get(msg.uid as number);
    if (el === undefined) {
      console.warn(`update for unknown gui uid ${msg.uid}`);
      return;
    }
    fn(el);
    el.version = this.revision;
  }

  private removeGui(uid: number): void {
    if (!this.gui.has(uid)) {
      console.warn(`remove for unknown gui uid ${uid} (already gone)`);
      return;
    }
    const doomed = new Set<number>([uid]);
    let changed = true;
    while (changed) {
      changed = false;
      for (const el of this.gui.values()) {
        if (!doomed.has(el.uid) && doomed.has(el.containerUid)) {
          doomed.add(el.uid);
          changed = true;
        }
      }
    }
    for (const u of doomed) this.gui.delete(u);
  }

  sortedGuiUids(): number[] {
    return [...this.gui.keys()].sort((a, b) => a - b);
  }
}

/**
 * Wire values arrive as plain decode output; `undefined` (omitted optional
 * fields) becomes null so canonical rendering matches the server.
 */
function normalizeValue(value: WireValue | undefined): WireValue {
  return value === undefined ? null : value;
}
