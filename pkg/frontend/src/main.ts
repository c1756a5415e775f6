/**
 * Browser viewer entry point: connect, mirror, render with orbit controls,
 * GUI panel, interaction capture (camera reports throttled to 30 Hz, click
 * rays on clickable nodes), and a status banner.
 */

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import { canonicalState } from "./canonical";
import { Connection } from "./connection";
import { GuiPanel } from "./gui";
import { RenderIndex } from "./render";

const CAMERA_REPORT_MIN_INTERVAL_MS = 1000 / 30;

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

function main(): void {
  const banner = document.getElementById("banner") as HTMLDivElement;
  const panelEl = document.getElementById("gui-panel") as HTMLDivElement;
  const canvasWrap = document.getElementById("scene") as HTMLDivElement;

  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setPixelRatio(window.devicePixelRatio);
  canvasWrap.appendChild(renderer.domElement);

  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x11131a);
  scene.add(new THREE.AmbientLight(0xffffff, 0.7));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(4, 6, 8);
  scene.add(sun);

  const camera = new THREE.PerspectiveCamera(60, 1, 0.01, 1000);
  camera.position.set(3, 3, 3);
  camera.up.set(0, 0, 1);
  const controls = new OrbitControls(camera, renderer.domElement);
  controls.target.set(0, 0, 0);

  const nodeRoot = new THREE.Group();
  scene.add(nodeRoot);
  const renderIndex = new RenderIndex(nodeRoot);

  const connection = new Connection(wsUrl(), {
    onStatus: (status, detail) => {
      banner.dataset.status = status;
      if (status === "connected") {
        banner.textContent = `connected (client ${connection.clientId})`;
      } else if (status === "rejected") {
        banner.textContent = `build mismatch — reload after regenerating: ${detail ?? ""}`;
      } else if (status === "disconnected") {
        banner.textContent = "disconnected — retrying…";
      } else {
        banner.textContent = "connecting…";
      }
    },
  });
  const panel = new GuiPanel(panelEl, connection);
  connection.connect();

  // hidden debug hook: canonical dump for cross-implementation checks
  (window as unknown as { scenesyncDump: () => string }).scenesyncDump = () =>
    canonicalState(connection.mirror);

  function resize(): void {
    const width = canvasWrap.clientWidth;
    const height = canvasWrap.clientHeight;
    renderer.setSize(width, height, false);
    camera.aspect = width / Math.max(height, 1);
    camera.updateProjectionMatrix();
  }
  window.addEventListener("resize", resize);
  resize();

  // camera reports, throttled
  let lastReport = 0;
  let reportQueued = false;
  function reportCamera(): void {
    const now = performance.now();
    if (now - lastReport < CAMERA_REPORT_MIN_INTERVAL_MS) {
      if (!reportQueued) {
        reportQueued = true;
        setTimeout(() => {
          reportQueued = false;
          reportCamera();
        }, CAMERA_REPORT_MIN_INTERVAL_MS - (now - lastReport));
      }
      return;
    }
    lastReport = now;
    if (connection.status !== "connected") return;
    const q = camera.quaternion;
    connection.sendCameraReport(
      [q.w, q.x, q.y, q.z],
      [camera.position.x, camera.position.y, camera.position.z],
      (camera.fov * Math.PI) / 180,
      camera.aspect,
      [controls.target.x, controls.target.y, controls.target.z],
    );
  }
  controls.addEventListener("change", reportCamera);

  // click rays on clickable nodes (ignore drags)
  const raycaster = new THREE.Raycaster();
  let downAt: [number, number] | null = null;
  renderer.domElement.addEventListener("pointerdown", (ev) => {
    downAt = [ev.clientX, ev.clientY];
  });
  renderer.domElement.addEventListener("pointerup", (ev) => {
    if (downAt === null) return;
    const moved = Math.hypot(ev.clientX - downAt[0], ev.clientY - downAt[1]);
    downAt = null;
    if (moved > 4 || connection.status !== "connected") return;
    const rect = renderer.domElement.getBoundingClientRect();
    const sx = (ev.clientX - rect.left) / rect.width;
    const sy = (ev.clientY - rect.top) / rect.height;
    raycaster.setFromCamera(new THREE.Vector2(sx * 2 - 1, -(sy * 2 - 1)), camera);
    const hits = raycaster.intersectObjects(nodeRoot.children, true);
    for (const hit of hits) {
      const path = renderIndex.pathFor(hit.object);
      if (path === null) continue;
      const node = connection.mirror.nodes.get(path);
      if (node === undefined || !node.clickable) continue;
      const dir = raycaster.ray.direction;
      connection.sendSceneClick(
        path,
        [camera.position.x, camera.position.y, camera.position.z],
        [dir.x, dir.y, dir.z],
        [sx, sy],
      );
      break;
    }
  });

  // apply server camera pushes
  let appliedCameraPose: unknown = null;
  function maybeApplyServerCamera(): void {
    const cam = connection.mirror.camera;
    if (cam === appliedCameraPose) return;
    appliedCameraPose = cam;
    camera.position.set(cam.pose.position[0], cam.pose.position[1], cam.pose.position[2]);
    camera.quaternion.set(cam.pose.wxyz[1], cam.pose.wxyz[2], cam.pose.wxyz[3], cam.pose.wxyz[0]);
    camera.fov = (cam.fov * 180) / Math.PI;
    controls.target.set(cam.lookAt[0], cam.lookAt[1], cam.lookAt[2]);
    camera.updateProjectionMatrix();
    controls.update();
  }
  maybeApplyServerCamera();

  let syncedRevision = -1;
  function frame(): void {
    requestAnimationFrame(frame);
    controls.update();
    if (connection.mirror.revision !== syncedRevision) {
      syncedRevision = connection.mirror.revision;
      renderIndex.sync(connection.mirror);
      panel.sync(connection.mirror);
      maybeApplyServerCamera();
    }
    renderer.render(scene, camera);
  }
  frame();
}

main();
