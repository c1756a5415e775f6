/**
 * Scene rendering: one three.js object per mirrored node, reconciled after
 * every applied batch. World poses use the same composition rule as the
 * mirror; hidden subtrees are not drawn. Exactly one render object per node
 * and vice versa (checked by the render-hygiene tests).
 */

import * as THREE from "three";

import { Mirror, SceneNode } from "./mirror";
import { WireValue } from "./wire";

function asNumber(v: WireValue, fallback = 0): number {
  return typeof v === "number" ? v : fallback;
}

function asColor(v: WireValue): THREE.Color {
  if (Array.isArray(v) && v.length === 3) {
    return new THREE.Color(
      asNumber(v[0]) / 255,
      asNumber(v[1]) / 255,
      asNumber(v[2]) / 255,
    );
  }
  return new THREE.Color(0.6, 0.6, 0.6);
}

function float32From(v: WireValue): Float32Array {
  if (v instanceof Uint8Array) {
    return new Float32Array(v.buffer.slice(v.byteOffset, v.byteOffset + v.byteLength));
  }
  return new Float32Array(0);
}

function disposeDeep(object: THREE.Object3D): void {
  object.traverse((child) => {
    const mesh = child as Partial<THREE.Mesh>;
    if (mesh.geometry) (mesh.geometry as THREE.BufferGeometry).dispose();
    const material = mesh.material as THREE.Material | THREE.Material[] | undefined;
    if (Array.isArray(material)) material.forEach((m) => m.dispose());
    else if (material) material.dispose();
  });
}

// ---------------------------------------------------------------------------
// per-kind visual builders

function buildFrame(node: SceneNode): THREE.Object3D {
  const length = asNumber(node.props.axes_length, 0.5);
  const group = new THREE.Group();
  if (node.props.show_axes !== false) {
    group.add(new THREE.AxesHelper(length));
  }
  return group;
}

function buildGrid(node: SceneNode): THREE.Object3D {
  const width = asNumber(node.props.width, 10);
  const height = asNumber(node.props.height, 10);
  const cell = Math.max(asNumber(node.props.cell_size, 0.5), 1e-6);
  const color = asColor(node.props.color);
  const positions: number[] = [];
  const halfW = width / 2;
  const halfH = height / 2;
  for (let x = -halfW; x <= halfW + 1e-9; x += cell) {
    positions.push(x, -halfH, 0, x, halfH, 0);
  }
  for (let y = -halfH; y <= halfH + 1e-9; y += cell) {
    positions.push(-halfW, y, 0, halfW, y, 0);
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.Float32BufferAttribute(positions, 3));
  const lines = new THREE.LineSegments(
    geometry,
    new THREE.LineBasicMaterial({ color, transparent: true, opacity: 0.6 }),
  );
  const plane = node.props.plane;
  if (plane === "yz") lines.rotateY(Math.PI / 2);
  else if (plane === "xz") lines.rotateX(Math.PI / 2);
  return lines;
}

function buildPointCloud(node: SceneNode): THREE.Object3D {
  const positions = float32From(node.props.positions);
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  const colorBytes = node.props.colors;
  let vertexColors = false;
  if (colorBytes instanceof Uint8Array && colorBytes.length === positions.length) {
    const colors = new Float32Array(colorBytes.length);
    for (let i = 0; i < colorBytes.length; i++) colors[i] = colorBytes[i] / 255;
    geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
    vertexColors = true;
  }
  return new THREE.Points(
    geometry,
    new THREE.PointsMaterial({
      size: asNumber(node.props.point_size, 0.01),
      vertexColors,
    }),
  );
}

function buildLineSegments(node: SceneNode): THREE.Object3D {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(float32From(node.props.positions), 3));
  return new THREE.LineSegments(
    geometry,
    new THREE.LineBasicMaterial({ color: asColor(node.props.color) }),
  );
}

function buildMesh(node: SceneNode): THREE.Object3D {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(float32From(node.props.vertices), 3));
  const faces = node.props.faces;
  if (faces instanceof Uint8Array) {
    const indices = new Uint32Array(faces.buffer.slice(faces.byteOffset, faces.byteOffset + faces.byteLength));
    geometry.setIndex(new THREE.BufferAttribute(indices, 1));
  }
  geometry.computeVertexNormals();
  return new THREE.Mesh(
    geometry,
    new THREE.MeshLambertMaterial({
      color: asColor(node.props.color),
      wireframe: node.props.wireframe === true,
      side: THREE.DoubleSide,
    }),
  );
}

function buildBox(node: SceneNode): THREE.Object3D {
  const dims = node.props.dimensions;
  const [dx, dy, dz] = Array.isArray(dims) ? dims.map((d) => asNumber(d, 1)) : [1, 1, 1];
  return new THREE.Mesh(
    new THREE.BoxGeometry(dx, dy, dz),
    new THREE.MeshLambertMaterial({ color: asColor(node.props.color) }),
  );
}

function buildIcosphere(node: SceneNode): THREE.Object3D {
  return new THREE.Mesh(
    new THREE.IcosahedronGeometry(
      asNumber(node.props.radius, 0.5),
      Math.round(asNumber(node.props.subdivisions, 2)),
    ),
    new THREE.MeshLambertMaterial({ color: asColor(node.props.color) }),
  );
}

function buildCameraFrustum(node: SceneNode): THREE.Object3D {
  // wireframe pyramid: apex at the node origin looking down +Z, with the
  // far rectangle sized by fov (vertical) and aspect
  const fov = asNumber(node.props.fov, Math.PI / 2);
  const aspect = asNumber(node.props.aspect, 16 / 9);
  const scale = asNumber(node.props.scale, 0.3);
  const halfY = Math.tan(fov / 2) * scale;
  const halfX = halfY * aspect;
  const z = scale;
  const corners: [number, number, number][] = [
    [-halfX, -halfY, z],
    [halfX, -halfY, z],
    [halfX, halfY, z],
    [-halfX, halfY, z],
  ];
  const positions: number[] = [];
  for (let i = 0; i < 4; i++) {
    positions.push(0, 0, 0, ...corners[i]); // apex to corner
    positions.push(...corners[i], ...corners[(i + 1) % 4]); // far rectangle
  }
  // up marker above the far rectangle
  positions.push(-halfX * 0.4, halfY, z, 0, halfY * 1.4, z);
  positions.push(0, halfY * 1.4, z, halfX * 0.4, halfY, z);
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.Float32BufferAttribute(positions, 3));
  return new THREE.LineSegments(
    geometry,
    new THREE.LineBasicMaterial({ color: asColor(node.props.color) }),
  );
}

function buildLabel(node: SceneNode): THREE.Object3D {
  const text = typeof node.props.text === "string" ? node.props.text : "";
  const sprite = new THREE.Sprite(new THREE.SpriteMaterial({ color: 0xffffff }));
  if (typeof document !== "undefined") {
    const canvas = document.createElement("canvas");
    canvas.width = 256;
    canvas.height = 64;
    const ctx = canvas.getContext("2d");
    if (ctx) {
      ctx.fillStyle = "rgba(20, 20, 28, 0.75)";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      ctx.fillStyle = "#ffffff";
      ctx.font = "28px system-ui, sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(text, canvas.width / 2, canvas.height / 2);
      const texture = new THREE.CanvasTexture(canvas);
      sprite.material.dispose();
      sprite.material = new THREE.SpriteMaterial({ map: texture, transparent: true });
    }
  }
  sprite.scale.set(0.8, 0.2, 1);
  return sprite;
}

function buildImage(node: SceneNode): THREE.Object3D {
  const width = asNumber(node.props.render_width, 1);
  const height = asNumber(node.props.render_height, 1);
  const pixelW = Math.round(asNumber(node.props.width, 1));
  const pixelH = Math.round(asNumber(node.props.height, 1));
  const data = node.props.data;
  const material = new THREE.MeshBasicMaterial({ side: THREE.DoubleSide });
  if (data instanceof Uint8Array && data.length === pixelW * pixelH * 3) {
    const rgba = new Uint8Array(pixelW * pixelH * 4);
    for (let i = 0; i < pixelW * pixelH; i++) {
      rgba[i * 4] = data[i * 3];
      rgba[i * 4 + 1] = data[i * 3 + 1];
      rgba[i * 4 + 2] = data[i * 3 + 2];
      rgba[i * 4 + 3] = 255;
    }
    const texture = new THREE.DataTexture(rgba, pixelW, pixelH, THREE.RGBAFormat);
    texture.needsUpdate = true;
    texture.flipY = true;
    material.map = texture;
  }
  return new THREE.Mesh(new THREE.PlaneGeometry(width, height), material);
}

function buildPlaceholder(): THREE.Object3D {
  return new THREE.Group();
}

const BUILDERS: { [kind: string]: (node: SceneNode) => THREE.Object3D } = {
  frame: buildFrame,
  grid: buildGrid,
  point_cloud: buildPointCloud,
  line_segments: buildLineSegments,
  mesh: buildMesh,
  box: buildBox,
  icosphere: buildIcosphere,
  camera_frustum: buildCameraFrustum,
  label: buildLabel,
  image: buildImage,
  placeholder: buildPlaceholder,
};

interface Entry {
  object: THREE.Object3D;
  kind: string;
  version: number;
}

export class RenderIndex {
  private entries = new Map<string, Entry>();

  constructor(private root: THREE.Object3D) {}

  /** Reconcile render objects with the mirror's node map. */
  sync(mirror: Mirror): void {
    for (const [path, entry] of [...this.entries]) {
      if (!mirror.nodes.has(path)) {
        this.root.remove(entry.object);
        disposeDeep(entry.object);
        this.entries.delete(path);
      }
    }
    for (const [path, node] of mirror.nodes) {
      let entry = this.entries.get(path);
      if (entry !== undefined && (entry.kind !== node.kind || entry.version !== node.version)) {
        this.root.remove(entry.object);
        disposeDeep(entry.object);
        this.entries.delete(path);
        entry = undefined;
      }
      if (entry === undefined) {
        const builder = BUILDERS[node.kind];
        if (builder === undefined) {
          console.warn(`skipping node of unknown kind ${node.kind}`);
          continue;
        }
        const object = builder(node);
        object.userData.path = path;
        this.root.add(object);
        entry = { object, kind: node.kind, version: node.version };
        this.entries.set(path, entry);
      }
      // poses compose exactly as on the server; flat placement at world pose
      const world = mirror.worldPose(path);
      entry.object.position.set(world.position[0], world.position[1], world.position[2]);
      entry.object.quaternion.set(world.wxyz[1], world.wxyz[2], world.wxyz[3], world.wxyz[0]);
      entry.object.visible = mirror.effectiveVisibility(path);
    }
  }

  objectCount(): number {
    return this.entries.size;
  }

  /** Walk up from a picked three.js object to the node path that owns it. */
  pathFor(object: THREE.Object3D | null): string | null {
    let current: THREE.Object3D | null = object;
    while (current !== null) {
      const path = current.userData?.path;
      if (typeof path === "string") return path;
      current = current.parent;
    }
    return null;
  }
}
